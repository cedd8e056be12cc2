//! A short run of the property sweeps with pass/fail lines per property.
//!
//! cargo run --release --example verify_sweep -- [instances]

use cooploc::verify::{run_verify, VerifyOptions};

fn main() -> cooploc::Result<()> {
    let instances = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let report = run_verify(&VerifyOptions { instances, ..Default::default() })?;
    for p in &report.properties {
        println!("{p}");
    }
    println!("{}", if report.all_passed() { "all passed" } else { "FAILURES" });
    Ok(())
}
