//! The built-in three-robot scenario: final RMSE and NEES verdicts per
//! method.
//!
//! cargo run --release --example monte_carlo -- [runs]

use cooploc::sim::{final_rmse, method_consistency, run_monte_carlo, Method, RunOptions, Scenario, CONSISTENCY_THRESHOLD};

fn main() -> cooploc::Result<()> {
    let runs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let sc = Scenario::builtin();
    let res = run_monte_carlo(&sc, &RunOptions { runs: Some(runs), ..Default::default() })?;
    println!("{} runs, NEES verdicts from step {:?}", runs, res.first_relative_step);
    for m in &res.methods {
        let verdicts: std::vec::Vec<String> = method_consistency(&res, *m, CONSISTENCY_THRESHOLD)?
            .iter()
            .map(|r| format!("{} ({:.2})", r.verdict, r.in_band))
            .collect();
        println!("{:<6} final rmse {:.4}  {}", m, final_rmse(&res, *m), verdicts.join("  "));
    }
    let naive = res.runs[0].track(Method::Naive).map(|t| t.messages).unwrap_or(0);
    println!("messages per run: {naive} for {} scheduled measurements", sc.relative_event_count());
    Ok(())
}
