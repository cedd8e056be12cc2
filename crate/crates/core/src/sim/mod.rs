//! Scenarios, Monte Carlo runs and consistency metrics.

pub mod export;
pub mod metrics;
pub mod run;
pub mod scenario;

pub use export::{summary, timing, write_csvs, write_traces, SummaryRow, TimingRow, CONSISTENCY_THRESHOLD};
pub use metrics::{
    chi2_band, chi2_quantile, consistency_report, final_rmse, method_consistency, nees, position_rmse, rmse,
    ConsistencyBand, ConsistencyReport, Verdict,
};
pub use run::{generate_truth, run_method, run_monte_carlo, run_one, run_seed, GroundTruth, RunOptions, RunRecord, SimResult};
pub use scenario::{parse_methods, Method, Scenario};
