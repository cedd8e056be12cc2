mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use cooploc::cli::{run_cli, EXIT_FAILED, EXIT_INVALID, EXIT_OK, EXIT_SOLVER, OUT_ENV};
use cooploc::sim::Scenario;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cooploc").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_scenario(dir: &Path, sc: &Scenario) -> String {
    let p = dir.join("scenario.toml");
    fs::write(&p, sc.to_toml()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validate_builtin_and_file() {
    let (code, out, _) = cli(&["validate", "default"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.starts_with("ok:"));
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), &common::team_scenario(4));
    assert_eq!(cli(&["validate", &path]).0, EXIT_OK);
}

#[test]
fn validate_reports_key_path() {
    let mut sc = Scenario::builtin();
    sc.absolute[0].landmark = 42;
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), &sc);
    let (code, _, err) = cli(&["validate", &path]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("absolute[0].landmark"), "{err}");
}

#[test]
fn malformed_and_missing_inputs_are_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    fs::write(&p, "name = 3\n").unwrap();
    assert_eq!(cli(&["validate", p.to_str().unwrap()]).0, EXIT_INVALID);
    assert_eq!(cli(&["validate", "/no/such/file.toml"]).0, EXIT_INVALID);
    assert_eq!(cli(&["frobnicate"]).0, EXIT_INVALID);
    assert_eq!(cli(&["run", "default", "--methods", "dr,bogus"]).0, EXIT_INVALID);
}

#[test]
fn run_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &common::team_scenario(3));
    let run = |name: &str| {
        let out = dir.path().join(name);
        let (code, stdout, err) = cli(&[
            "run",
            &scenario,
            "--runs",
            "1",
            "--seed",
            "7",
            "--methods",
            "dr,naive,dmv,pecmv,joint",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(stdout.contains("wrote"));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["rmse.csv", "nees.csv", "events.csv", "summary.csv", "trace-dmv.ndjson"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(a.join("timing.csv").exists());
    let header = fs::read_to_string(a.join("rmse.csv")).unwrap();
    assert!(header.starts_with("method,agent,t,rmse"));
}

#[test]
fn solver_failure_exits_three() {
    // two robots on the same spot ranging each other
    let mut sc = common::team_scenario(2);
    sc.agents[1].initial_pose = sc.agents[0].initial_pose;
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &sc);
    let out = dir.path().join("out");
    let (code, _, err) = cli(&["run", &scenario, "--runs", "1", "--methods", "dmv", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_SOLVER, "{err}");
    assert!(err.contains("solver failure"), "{err}");
}

#[test]
fn verify_exit_codes() {
    assert_eq!(cli(&["verify", "--instances", "0"]).0, EXIT_OK);
    let (code, _, err) = cli(&["verify", "--instances", "6", "--sabotage", "naive-as-dmv"]);
    assert_eq!(code, EXIT_FAILED);
    assert!(err.contains("failed properties"), "{err}");
}

#[test]
fn bench_prints_both_methods() {
    let (code, out, _) = cli(&["bench", "--instances", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("dmv") && out.contains("pecmv"), "{out}");
}

#[test]
fn binary_honours_output_env() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &common::team_scenario(3));
    let out = dir.path().join("from-env");
    let status = Command::new(env!("CARGO_BIN_EXE_cooploc"))
        .args(["run", &scenario, "--runs", "1", "--methods", "dr"])
        .env(OUT_ENV, &out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(out.join("summary.csv").exists());
    let status = Command::new(env!("CARGO_BIN_EXE_cooploc")).arg("--help").output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
}
