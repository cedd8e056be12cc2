fn main() {
    let code = cooploc::cli::run_cli(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
