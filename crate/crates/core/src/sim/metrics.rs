//! Position RMSE, NEES and chi-square consistency bands.

use std::fmt;

use serde::Serialize;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

use super::run::SimResult;
use super::scenario::Method;

/// Root mean square of 2-D position errors.
pub fn rmse(errors: &[[f64; 2]]) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    let sum: f64 = errors.iter().map(|e| e[0] * e[0] + e[1] * e[1]).sum();
    (sum / errors.len() as f64).sqrt()
}

/// `eᵀ P⁻¹ e` for a 2-D error, `None` if `P` is not positive definite.
pub fn nees_term(e: [f64; 2], p: [[f64; 2]; 2]) -> Option<f64> {
    let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    if !(det > 0.0 && p[0][0] > 0.0) {
        return None;
    }
    let q = (p[1][1] * e[0] * e[0] - (p[0][1] + p[1][0]) * e[0] * e[1] + p[0][0] * e[1] * e[1]) / det;
    Some(q)
}

fn position_error(result: &SimResult, run: usize, method: Method, agent: usize, t: usize) -> Option<([f64; 2], [[f64; 2]; 2])> {
    let rec = &result.runs[run];
    let est = rec.track(method)?.est[t][agent];
    let truth = rec.truth[t][agent];
    Some(([est.pose.x - truth.x, est.pose.y - truth.y], est.position_cov()))
}

/// RMSE(t) over runs for one agent (by index).
pub fn position_rmse(result: &SimResult, method: Method, agent: usize) -> Vec<f64> {
    (0..=result.horizon)
        .map(|t| {
            let errs: Vec<[f64; 2]> = (0..result.runs.len())
                .filter_map(|r| position_error(result, r, method, agent, t).map(|(e, _)| e))
                .collect();
            rmse(&errs)
        })
        .collect()
}

/// Average NEES ε̄(t) over runs for one agent (by index).
pub fn nees(result: &SimResult, method: Method, agent: usize) -> Result<Vec<f64>> {
    let m = result.runs.len();
    (0..=result.horizon)
        .map(|t| {
            let mut sum = 0.0;
            for r in 0..m {
                let Some((e, p)) = position_error(result, r, method, agent, t) else {
                    continue;
                };
                sum += nees_term(e, p).ok_or(Error::SingularCovariance { run: r, t })?;
            }
            Ok(sum / m as f64)
        })
        .collect()
}

/// Mean over agents of the RMSE at the last step.
pub fn final_rmse(result: &SimResult, method: Method) -> f64 {
    let n = result.agents.len();
    (0..n).map(|k| *position_rmse(result, method, k).last().unwrap_or(&0.0)).sum::<f64>() / n as f64
}

/// Two-sided acceptance region for the average NEES of `runs` runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyBand {
    pub r1: f64,
    pub r2: f64,
    pub runs: usize,
    pub dof: usize,
    pub alpha: f64,
}

/// Quantile of the chi-square distribution with `k` degrees of freedom:
/// Wilson–Hilferty start, then safeguarded Newton on the CDF.
pub fn chi2_quantile(k: f64, p: f64) -> f64 {
    let dist = ChiSquared::new(k).expect("positive degrees of freedom");
    let z = Normal::standard().inverse_cdf(p);
    let c = 2.0 / (9.0 * k);
    let mut x = (k * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-300);
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for _ in 0..200 {
        let f = dist.cdf(x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = dist.pdf(x);
        let mut next = if d > 0.0 { x - f / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(1.0) };
        }
        if (next - x).abs() <= 1e-14 * x.max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

pub fn chi2_band(runs: usize, dof: usize, alpha: f64) -> ConsistencyBand {
    debug_assert!(runs * dof >= 1 && alpha > 0.0 && alpha < 1.0);
    let k = (runs * dof) as f64;
    let m = runs as f64;
    ConsistencyBand {
        r1: chi2_quantile(k, alpha / 2.0) / m,
        r2: chi2_quantile(k, 1.0 - alpha / 2.0) / m,
        runs,
        dof,
        alpha,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Overconfident,
    Conservative,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "CONSISTENT",
            Verdict::Overconfident => "OVERCONFIDENT",
            Verdict::Conservative => "CONSERVATIVE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub in_band: f64,
    pub above: f64,
    pub below: f64,
    pub verdict: Verdict,
}

impl ConsistencyReport {
    /// Fraction of steps not above the band.
    pub fn not_above(&self) -> f64 {
        1.0 - self.above
    }
}

/// Classifies an NEES series: consistent when at least `threshold` of the
/// steps fall in the band, otherwise by which side holds more violations.
pub fn consistency_report(series: &[f64], band: &ConsistencyBand, threshold: f64) -> ConsistencyReport {
    let n = series.len().max(1) as f64;
    let above = series.iter().filter(|&&v| v > band.r2).count() as f64;
    let below = series.iter().filter(|&&v| v < band.r1).count() as f64;
    let in_band = series.len() as f64 - above - below;
    let verdict = if in_band / n >= threshold {
        Verdict::Consistent
    } else if above >= below {
        Verdict::Overconfident
    } else {
        Verdict::Conservative
    };
    ConsistencyReport {
        in_band: in_band / n,
        above: above / n,
        below: below / n,
        verdict,
    }
}

/// Consistency of every agent under `method`, over the steps from the first
/// relative update on (all steps if there is none).
pub fn method_consistency(result: &SimResult, method: Method, threshold: f64) -> Result<Vec<ConsistencyReport>> {
    let band = chi2_band(result.runs.len(), 2, 0.05);
    let from = result.first_relative_step.unwrap_or(0);
    (0..result.agents.len())
        .map(|k| Ok(consistency_report(&nees(result, method, k)?[from..], &band, threshold)))
        .collect()
}
