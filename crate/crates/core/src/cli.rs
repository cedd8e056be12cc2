//! The `cooploc` command line: `validate`, `run`, `verify` and `bench`.
//!
//! Exit codes: 0 success, 1 failed verification or I/O error, 2 invalid
//! scenario, 3 solver failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::run_bench;
use crate::error::Error;
use crate::fusion::FusionConfig;
use crate::sim::{self, parse_methods, RunOptions, Scenario};
use crate::verify::{run_verify, Sabotage, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Environment variable naming the default output directory of `run`.
pub const OUT_ENV: &str = "COOPLOC_OUT";

#[derive(Debug, Parser)]
#[command(name = "cooploc", version, about = "Cooperative localization experiments and solver checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file.
    Validate {
        /// Scenario TOML, or `default` for the built-in scenario.
        scenario: String,
    },
    /// Run a Monte Carlo experiment and write CSV tables.
    Run {
        scenario: String,
        /// Comma-separated subset of dr,naive,dmv,ecmv,pecmv,joint.
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = OUT_ENV, default_value = "cooploc-out")]
        out: PathBuf,
        /// Worker threads; defaults to the available cores.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Run the random-instance property sweeps.
    Verify {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, hide = true)]
        sabotage: Option<SabotageArg>,
    },
    /// Time the DMV and PECMV updates.
    Bench {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SabotageArg {
    NaiveAsDmv,
}

fn load_scenario(arg: &str) -> crate::Result<Scenario> {
    let path = Path::new(arg);
    if arg == "default" && !path.exists() {
        return Ok(Scenario::builtin());
    }
    Scenario::load(path).map_err(|e| match e {
        Error::Io(msg) => Error::scenario(arg, msg),
        other => other,
    })
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Scenario { .. } => EXIT_INVALID,
        Error::Io(_) => EXIT_FAILED,
        _ => EXIT_SOLVER,
    }
}

/// Parses `args` (program name first) and executes the command, writing
/// reports to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_for(&e)
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    match cmd {
        Command::Validate { scenario } => {
            let sc = load_scenario(&scenario)?;
            writeln!(
                out,
                "ok: {} ({} agents, {} steps, {} relative measurements)",
                sc.name,
                sc.agents.len(),
                sc.horizon,
                sc.relative_event_count()
            )?;
            Ok(EXIT_OK)
        }
        Command::Run {
            scenario,
            methods,
            runs,
            seed,
            out: dir,
            parallel,
        } => {
            let sc = load_scenario(&scenario)?;
            let opts = RunOptions {
                methods: methods.as_deref().map(parse_methods).transpose()?,
                runs,
                seed,
            };
            let result = match parallel {
                Some(k) => rayon::ThreadPoolBuilder::new()
                    .num_threads(k.max(1))
                    .build()
                    .map_err(|e| Error::Io(e.to_string()))?
                    .install(|| sim::run_monte_carlo(&sc, &opts)),
                None => sim::run_monte_carlo(&sc, &opts),
            };
            let result = match result {
                Ok(r) => r,
                Err(e @ Error::Update { .. }) => {
                    writeln!(err, "solver failure: {e}")?;
                    return Ok(EXIT_SOLVER);
                }
                Err(e) => return Err(e),
            };
            let mut files = sim::write_csvs(&result, &dir)?;
            files.extend(sim::write_traces(&result, &dir)?);
            writeln!(out, "{} runs of `{}`", result.runs.len(), result.scenario)?;
            writeln!(out, "{:<7} {:>5} {:>10} {:>8} {:>8}  verdict", "method", "agent", "final rmse", "in band", "above")?;
            for r in sim::summary(&result)? {
                writeln!(
                    out,
                    "{:<7} {:>5} {:>10.4} {:>8.2} {:>8.2}  {}",
                    r.method, r.agent, r.final_rmse, r.in_band, r.above_band, r.verdict
                )?;
            }
            for f in files {
                writeln!(out, "wrote {}", f.display())?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            instances,
            seed,
            sabotage,
        } => {
            let opts = VerifyOptions {
                instances,
                seed,
                sabotage: sabotage.map(|s| match s {
                    SabotageArg::NaiveAsDmv => Sabotage::NaiveAsDmv,
                }),
                ..VerifyOptions::default()
            };
            let report = run_verify(&opts)?;
            for p in &report.properties {
                writeln!(out, "{p}")?;
            }
            if report.all_passed() {
                writeln!(out, "all {} properties passed", report.properties.len())?;
                Ok(EXIT_OK)
            } else {
                let names: Vec<&str> = report.failed().map(|p| p.name.as_str()).collect();
                writeln!(err, "failed properties: {}", names.join(", "))?;
                Ok(EXIT_FAILED)
            }
        }
        Command::Bench { instances, seed } => {
            let report = run_bench(instances, seed, &FusionConfig::default())?;
            write!(out, "{report}")?;
            Ok(EXIT_OK)
        }
    }
}
