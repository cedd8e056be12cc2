//! Per-update timing of the DMV and PECMV solvers on random 3-D instances.

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::fusion::{update, FusionConfig, GammaMode, Side};
use crate::instances::instance_set;
use crate::types::FusionMethod;

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub method: &'static str,
    pub samples: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub mean_iters: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn get(&self, method: FusionMethod) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method.name())
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>8} {:>12} {:>12} {:>10}", "method", "samples", "mean ms", "median ms", "iters")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<8} {:>8} {:>12.4} {:>12.4} {:>10.1}",
                r.method, r.samples, r.mean_ms, r.median_ms, r.mean_iters
            )?;
        }
        Ok(())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times one observer-side update per instance for each method, DMV with
/// γ = 1.
pub fn run_bench(instances: usize, seed: u64, cfg: &FusionConfig) -> Result<BenchReport> {
    let set = instance_set(instances, seed);
    let cfg = cfg.with_gamma(GammaMode::One);
    let mut rows = Vec::new();
    for method in [FusionMethod::Dmv, FusionMethod::Pecmv] {
        let mut times = Vec::with_capacity(set.len());
        let mut iters = 0;
        for inst in &set {
            let start = Instant::now();
            let out = update(method, Side::Observer, &inst.bel_i, &inst.bel_j, &inst.meas, &cfg)?;
            times.push(start.elapsed().as_secs_f64() * 1e3);
            iters += out.solver_iters;
        }
        let n = times.len().max(1) as f64;
        rows.push(BenchRow {
            method: method.name(),
            samples: times.len(),
            mean_ms: times.iter().sum::<f64>() / n,
            median_ms: median(times),
            mean_iters: iters as f64 / n,
        });
    }
    Ok(BenchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_report() {
        let rep = run_bench(1, 3, &FusionConfig::default()).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rows.iter().all(|r| r.samples == 1 && r.mean_ms == r.median_ms));
        assert!(rep.get(FusionMethod::Pecmv).unwrap().mean_iters >= 0.0);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
