//! Randomized property sweeps over the fusion rules and their solvers.
//!
//! Every check produces a slack, positive when the property holds with room
//! to spare. A property passes when all of its slacks are at least `-tol`.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::fusion::config::FusionConfig;
use crate::fusion::dmv::{dmv_bound_cov, dmv_covariance, dmv_gain, dmv_objective};
use crate::fusion::pair::{linearize, Linearized, PairProblem, Side};
use crate::fusion::{dmv_fuse, ecmv_fuse, emv, pecmv_fuse};
use crate::instances::{self, PairInstance};
use crate::linalg::{self, Mat, Vec};
use crate::solvers::saddle::saddle_solve;
use crate::solvers::scalar::{omega_search, ScalarSearchSpec};
use crate::solvers::logdet::logdet_max;
use crate::types::FusionResult;

/// Deliberate defects used to show that the sweeps can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sabotage {
    /// Report the Naive update wherever DMV is expected.
    NaiveAsDmv,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub instances: usize,
    pub seed: u64,
    /// Hidden cross blocks sampled per instance.
    pub hidden_samples: usize,
    pub cfg: FusionConfig,
    pub sabotage: Option<Sabotage>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            instances: 200,
            seed: 1,
            hidden_samples: 20,
            cfg: FusionConfig::default(),
            sabotage: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub checks: usize,
    pub failures: usize,
    /// Smallest slack seen; `+inf` when nothing was checked.
    pub worst_slack: f64,
    pub tol: f64,
}

impl PropertyCheck {
    pub fn new(name: impl Into<String>, tol: f64) -> Self {
        Self {
            name: name.into(),
            checks: 0,
            failures: 0,
            worst_slack: f64::INFINITY,
            tol,
        }
    }

    pub fn record(&mut self, slack: f64) {
        self.checks += 1;
        // NaN slack counts as a failure
        if !(slack >= -self.tol) {
            self.failures += 1;
        }
        if slack.is_nan() || slack < self.worst_slack {
            self.worst_slack = slack;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn merge(&mut self, other: &PropertyCheck) {
        self.checks += other.checks;
        self.failures += other.failures;
        if other.worst_slack.is_nan() || other.worst_slack < self.worst_slack {
            self.worst_slack = other.worst_slack;
        }
    }
}

impl fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<48} {:>6} checks {:>4} failed  worst slack {:+.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.checks,
            self.failures,
            self.worst_slack
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub properties: std::vec::Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(PropertyCheck::passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.properties.iter().filter(|p| !p.passed())
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.properties.iter().find(|p| p.name == name)
    }

    fn extend(&mut self, other: VerifyReport) {
        self.properties.extend(other.properties);
    }
}

/// Folds per-instance reports that list the same properties in the same order.
fn combine(name_order: &[(&str, f64)], parts: std::vec::Vec<std::vec::Vec<PropertyCheck>>) -> VerifyReport {
    let mut out: std::vec::Vec<PropertyCheck> = name_order.iter().map(|(n, t)| PropertyCheck::new(*n, *t)).collect();
    for part in parts {
        for (acc, p) in out.iter_mut().zip(&part) {
            acc.merge(p);
        }
    }
    VerifyReport { properties: out }
}

fn rel(a: f64, scale: f64) -> f64 {
    a / scale.abs().max(f64::MIN_POSITIVE)
}

fn psd_slack(m: &Mat) -> f64 {
    linalg::min_eigenvalue(m)
}

fn dmv_result(lin: &Linearized, opts: &VerifyOptions) -> Result<FusionResult> {
    match opts.sabotage {
        Some(Sabotage::NaiveAsDmv) => emv::naive_fuse(lin),
        None => dmv_fuse(lin, &opts.cfg),
    }
}

fn cov(r: &FusionResult) -> &Mat {
    r.belief.cov.matrix()
}

pub const DMV_BOUNDS_TRUTH: &str = "dmv-bounds-true-covariance";
pub const DMV_DET: &str = "dmv-det-non-increasing";
pub const DMV_OVER_EMV: &str = "dmv-dominates-emv";

/// DMV consistency against hidden cross blocks, local improvement and
/// dominance over the exact update.
pub fn dmv_suite(set: &[PairInstance], opts: &VerifyOptions) -> Result<VerifyReport> {
    let names = [(DMV_BOUNDS_TRUTH, 1e-8), (DMV_DET, 0.0), (DMV_OVER_EMV, 1e-8)];
    let parts = set
        .par_iter()
        .enumerate()
        .map(|(idx, inst)| -> Result<std::vec::Vec<PropertyCheck>> {
            let mut checks: std::vec::Vec<PropertyCheck> = names.iter().map(|(n, t)| PropertyCheck::new(*n, *t)).collect();
            let lin = linearize(&inst.bel_i, &inst.bel_j, &inst.meas, Side::Observer)?;
            let p = &lin.problem;
            let dmv = dmv_result(&lin, opts)?;
            let p_dmv = cov(&dmv);
            let mut rng = instances::rng_for(opts.seed ^ (0x7431 + idx as u64));
            for _ in 0..opts.hidden_samples {
                let x = instances::random_cross(&p.p_own, &p.p_other, &mut rng);
                let actual = p.cov_for_gain(&dmv.gain, &x);
                checks[0].record(psd_slack(&(p_dmv - actual)));
                let (_, p_emv) = p.emv(&x)?;
                checks[2].record(psd_slack(&(p_dmv - p_emv)));
            }
            let det_prior = linalg::sym_det(&p.p_own);
            checks[1].record(rel(det_prior * (1.0 + 1e-10) - linalg::sym_det(p_dmv), det_prior));
            Ok(checks)
        })
        .collect::<Result<std::vec::Vec<_>>>()?;
    Ok(combine(&names, parts))
}

pub const ECMV_TRACE_LOWER: &str = "trace-emv-le-ecmv";
pub const ECMV_TRACE_UPPER: &str = "trace-ecmv-le-dmv";
pub const ECMV_PRIOR: &str = "ecmv-le-prior";
pub const ECMV_DMV: &str = "ecmv-le-dmv";
pub const PECMV_DET_LOWER: &str = "det-emv-le-pecmv";
pub const PECMV_DET_UPPER: &str = "det-pecmv-le-dmv";
pub const PECMV_PRIOR: &str = "pecmv-le-prior";
pub const PECMV_DMV: &str = "pecmv-le-dmv";
pub const X_FEASIBLE: &str = "cross-estimates-feasible";
pub const SADDLE_INEQ: &str = "saddle-inequality";
pub const COVS_PSD: &str = "updated-covariances-psd";

/// Trace and determinant orderings of ECMV and PECMV between EMV and DMV.
pub fn ordering_suite(set: &[PairInstance], opts: &VerifyOptions) -> Result<VerifyReport> {
    let names = [
        (ECMV_TRACE_LOWER, 1e-8),
        (ECMV_TRACE_UPPER, 1e-8),
        (ECMV_PRIOR, 1e-8),
        (ECMV_DMV, 1e-8),
        (PECMV_DET_LOWER, 1e-8),
        (PECMV_DET_UPPER, 1e-8),
        (PECMV_PRIOR, 1e-8),
        (PECMV_DMV, 1e-8),
        (X_FEASIBLE, 1e-12),
        (SADDLE_INEQ, opts.cfg.saddle.gap_rtol),
        (COVS_PSD, 1e-9),
    ];
    let parts = set
        .par_iter()
        .enumerate()
        .map(|(idx, inst)| -> Result<std::vec::Vec<PropertyCheck>> {
            let mut c: std::vec::Vec<PropertyCheck> = names.iter().map(|(n, t)| PropertyCheck::new(*n, *t)).collect();
            let lin = linearize(&inst.bel_i, &inst.bel_j, &inst.meas, Side::Observer)?;
            let p = &lin.problem;
            let dmv = dmv_result(&lin, opts)?;
            let ecmv = ecmv_fuse(&lin, &opts.cfg)?;
            let pecmv = pecmv_fuse(&lin, &opts.cfg)?;
            let (p_dmv, p_ecmv, p_pecmv) = (cov(&dmv), cov(&ecmv), cov(&pecmv));
            let tr_i = p.p_own.trace();
            let (det_dmv, det_pecmv) = (linalg::sym_det(p_dmv), linalg::sym_det(p_pecmv));
            let mut rng = instances::rng_for(opts.seed ^ (0x7431 + idx as u64));
            for _ in 0..opts.hidden_samples {
                let x = instances::random_cross(&p.p_own, &p.p_other, &mut rng);
                let (_, p_emv) = p.emv(&x)?;
                c[0].record(rel(p_ecmv.trace() - p_emv.trace(), tr_i));
                c[4].record(rel(det_pecmv - linalg::sym_det(&p_emv), det_pecmv));
                c[9].record(rel(
                    ecmv.objective - p.cov_for_gain(&ecmv.gain, &x).trace(),
                    tr_i,
                ));
            }
            c[1].record(rel(p_dmv.trace() - p_ecmv.trace(), tr_i));
            c[2].record(psd_slack(&(&p.p_own - p_ecmv)));
            c[3].record(psd_slack(&(p_dmv - p_ecmv)));
            c[5].record(rel(det_dmv - det_pecmv, det_dmv));
            c[6].record(psd_slack(&(&p.p_own - p_pecmv)));
            c[7].record(psd_slack(&(p_dmv - p_pecmv)));
            for r in [&ecmv, &pecmv] {
                let x = r.x_star.as_ref().expect("cross estimate");
                let j = p.joint_cov(x);
                c[8].record(rel(linalg::min_eigenvalue(&j), j.trace()));
            }
            for m in [p_dmv, p_ecmv, p_pecmv] {
                c[10].record(rel(linalg::min_eigenvalue(m), m.trace()));
            }
            Ok(c)
        })
        .collect::<Result<std::vec::Vec<_>>>()?;
    Ok(combine(&names, parts))
}

pub const BLOCK_BOUND: &str = "block-diagonal-bound";
pub const COHERENCE: &str = "dmv-gain-covariance-coherence";
pub const UNBIASED: &str = "zero-innovation-keeps-mean";
pub const OMEGA_GRID: &str = "omega-search-beats-grid";
pub const EMV_ORACLE: &str = "emv-matches-joint-oracle";

/// Structural identities: the block-diagonal bound, DMV formula coherence,
/// zero-innovation invariance, ω-search quality and EMV against the joint EKF.
pub fn structure_suite(set: &[PairInstance], opts: &VerifyOptions) -> Result<VerifyReport> {
    let names = [
        (BLOCK_BOUND, 1e-8),
        (COHERENCE, 1e-9),
        (UNBIASED, 1e-12),
        (OMEGA_GRID, opts.cfg.omega_tol),
        (EMV_ORACLE, 1e-9),
    ];
    let parts = set
        .par_iter()
        .enumerate()
        .map(|(idx, inst)| -> Result<std::vec::Vec<PropertyCheck>> {
            let mut c: std::vec::Vec<PropertyCheck> = names.iter().map(|(n, t)| PropertyCheck::new(*n, *t)).collect();
            let lin = linearize(&inst.bel_i, &inst.bel_j, &inst.meas, Side::Observer)?;
            let p = &lin.problem;
            let mut rng = instances::rng_for(opts.seed ^ (0x9e37 + idx as u64));
            let x = instances::random_cross(&p.p_own, &p.p_other, &mut rng);
            let p_j = p.joint_cov(&x);
            for k in 1..20 {
                let w = k as f64 / 20.0;
                let bound = linalg::block_diag(&(&p.p_own / w), &(&p.p_other / (1.0 - w)));
                c[0].record(rel(linalg::min_eigenvalue(&(bound - &p_j)), p_j.trace()));
            }
            for _ in 0..4 {
                let w: f64 = rng.random_range(0.05..0.95);
                let k = dmv_gain(p, w, opts.cfg.gamma_mode, opts.cfg.omega_eps).expect("interior gain");
                let direct = dmv_bound_cov(p, &k, w, opts.cfg.gamma_mode);
                let inverse = dmv_covariance(p, w, opts.cfg.gamma_mode).expect("interior covariance");
                c[1].record(-rel(linalg::max_abs(&(direct - &inverse)), linalg::max_abs(&inverse)));
            }
            let still = Linearized::new(p.clone(), Vec::zeros(p.r.nrows()), lin.own.clone());
            let fused = [
                emv::naive_fuse(&still)?,
                dmv_fuse(&still, &opts.cfg)?,
                pecmv_fuse(&still, &opts.cfg)?,
            ];
            for f in &fused {
                c[2].record(-(&f.belief.mean - &lin.own.mean).amax());
            }
            let found = dmv_fuse(&lin, &opts.cfg)?.objective;
            let grid_best = (0..=1000)
                .map(|k| dmv_objective(p, k as f64 / 1000.0, &opts.cfg))
                .fold(f64::INFINITY, f64::min);
            c[3].record(grid_best - found);

            let joint = crate::types::JointBelief::new(&inst.bel_i, &inst.bel_j, Some(x.clone()))?;
            let oracle = emv::joint_oracle_update(&joint, &inst.meas)?;
            let single = emv::emv_update(&inst.bel_i, &inst.bel_j, &x, &inst.meas)?;
            c[4].record(-rel(
                linalg::max_abs(&(&oracle.p_i - cov(&single))),
                linalg::max_abs(&oracle.p_i),
            ));
            c[4].record(-(&oracle.mean_i - &single.belief.mean).amax());
            Ok(c)
        })
        .collect::<Result<std::vec::Vec<_>>>()?;
    Ok(combine(&names, parts))
}

pub const SCALAR_DMV: &str = "scalar-dmv-vs-grid";
pub const SCALAR_PECMV: &str = "scalar-pecmv-vs-grid";
pub const SCALAR_ECMV: &str = "scalar-ecmv-vs-grid";

const GRID: usize = 10_000;

/// Minimum of the DMV criterion over a uniform ω grid with both endpoints.
pub fn dmv_grid_oracle(p: &PairProblem, cfg: &FusionConfig) -> f64 {
    (0..GRID)
        .map(|k| dmv_objective(p, k as f64 / (GRID - 1) as f64, cfg))
        .fold(f64::INFINITY, f64::min)
}

/// Largest EMV covariance of a scalar problem over a uniform grid of
/// correlation coefficients in `[−(1−δ), 1−δ]`.
pub fn pecmv_grid_oracle(p: &PairProblem, delta: f64) -> f64 {
    let scale = (p.p_own[(0, 0)] * p.p_other[(0, 0)]).sqrt();
    (0..GRID)
        .filter_map(|k| {
            let rho = (1.0 - delta) * (2.0 * k as f64 / (GRID - 1) as f64 - 1.0);
            p.emv(&Mat::from_element(1, 1, rho * scale)).ok().map(|(_, c)| c[(0, 0)])
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `min_K max_X Tr P(K, X)` for a scalar problem on a `(K, X)` grid centred
/// on `k_center`, refined once around the best coarse cell.
pub fn ecmv_grid_oracle(p: &PairProblem, delta: f64, k_center: f64, k_halfwidth: f64) -> f64 {
    let scale = (p.p_own[(0, 0)] * p.p_other[(0, 0)]).sqrt();
    let (pi, pj, hi, hj, r) = (p.p_own[(0, 0)], p.p_other[(0, 0)], p.h_own[(0, 0)], p.h_other[(0, 0)], p.r[(0, 0)]);
    let xs: std::vec::Vec<f64> = (0..=100).map(|k| (1.0 - delta) * (k as f64 / 50.0 - 1.0) * scale).collect();
    // scalar form of `cov_for_gain`
    let worst = |kk: f64| {
        let (a1, a2) = (1.0 - kk * hi, -kk * hj);
        let base = a1 * a1 * pi + a2 * a2 * pj + kk * kk * r;
        xs.iter().map(|x| base + 2.0 * a1 * a2 * x).fold(f64::NEG_INFINITY, f64::max)
    };
    let scan = |lo: f64, hi: f64| {
        (0..GRID)
            .map(|k| {
                let kk = lo + (hi - lo) * k as f64 / (GRID - 1) as f64;
                (kk, worst(kk))
            })
            .fold((lo, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    };
    let (k0, _) = scan(k_center - k_halfwidth, k_center + k_halfwidth);
    let cell = 2.0 * k_halfwidth / (GRID - 1) as f64;
    scan(k0 - cell, k0 + cell).1
}

/// Scalar problems checked against dense grid oracles.
pub fn scalar_oracle_suite(n: usize, seed: u64, cfg: &FusionConfig) -> Result<VerifyReport> {
    let names = [(SCALAR_DMV, 1e-3), (SCALAR_PECMV, 1e-6), (SCALAR_ECMV, 1e-3)];
    let mut rng = instances::rng_for(seed);
    let problems: std::vec::Vec<PairProblem> = (0..n).map(|_| instances::random_scalar_problem(&mut rng)).collect();
    let parts = problems
        .par_iter()
        .map(|p| -> Result<std::vec::Vec<PropertyCheck>> {
            let mut c: std::vec::Vec<PropertyCheck> = names.iter().map(|(n, t)| PropertyCheck::new(*n, *t)).collect();
            let objective = |w: f64| dmv_objective(p, w, cfg);
            let found = omega_search(&ScalarSearchSpec {
                objective: &objective,
                tol: cfg.omega_tol,
                max_iters: cfg.omega_max_iters,
            });
            c[0].record(dmv_grid_oracle(p, cfg) - found.value);

            let best = logdet_max(p, cfg.psd_margin, &cfg.ascent)?;
            let grid = pecmv_grid_oracle(p, cfg.psd_margin);
            c[1].record(rel(best.value - grid, grid));

            let sp = saddle_solve(p, cfg.psd_margin, &cfg.saddle)?;
            let k = sp.k_star[(0, 0)];
            let grid = ecmv_grid_oracle(p, cfg.psd_margin, k, 1.0 + k.abs());
            c[2].record(-(sp.value - grid).abs());
            Ok(c)
        })
        .collect::<Result<std::vec::Vec<_>>>()?;
    Ok(combine(&names, parts))
}

/// Every sweep, as run by `cooploc verify`.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let set = instances::instance_set(opts.instances, opts.seed);
    let mut report = dmv_suite(&set, opts)?;
    report.extend(ordering_suite(&set, opts)?);
    report.extend(structure_suite(&set, opts)?);
    report.extend(scalar_oracle_suite(opts.instances.min(50), opts.seed, &opts.cfg)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecmv_oracle_matches_matrix_form() {
        let mut rng = instances::rng_for(4);
        for _ in 0..10 {
            let p = instances::random_scalar_problem(&mut rng);
            let k = -0.4;
            let scale = (p.p_own[(0, 0)] * p.p_other[(0, 0)]).sqrt();
            let direct = (0..=100)
                .map(|j| {
                    let x = Mat::from_element(1, 1, (1.0 - 1e-6) * (j as f64 / 50.0 - 1.0) * scale);
                    p.cov_for_gain(&Mat::from_element(1, 1, k), &x)[(0, 0)]
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let oracle = ecmv_grid_oracle(&p, 1e-6, k, 1e-12);
            assert!((oracle - direct).abs() <= 1e-9 * direct.abs().max(1.0), "{oracle} vs {direct}");
        }
    }

    #[test]
    fn record_tracks_worst_and_failures() {
        let mut c = PropertyCheck::new("x", 1e-8);
        c.record(0.5);
        c.record(-1e-9);
        assert!(c.passed());
        c.record(-1e-3);
        c.record(f64::NAN);
        assert_eq!(c.failures, 2);
        assert!(c.worst_slack.is_nan());
    }

    #[test]
    fn empty_sweep_passes() {
        let report = run_verify(&VerifyOptions {
            instances: 0,
            ..Default::default()
        })
        .unwrap();
        assert!(report.all_passed());
        assert!(report.properties.iter().all(|p| p.checks == 0));
    }

    #[test]
    fn small_sweep_passes_and_sabotage_is_caught() {
        let opts = VerifyOptions {
            instances: 9,
            hidden_samples: 5,
            ..Default::default()
        };
        let report = run_verify(&opts).unwrap();
        if let Some(p) = report.failed().next() {
            panic!("{p}");
        }
        let bad = dmv_suite(
            &instances::instance_set(9, 1),
            &VerifyOptions {
                sabotage: Some(Sabotage::NaiveAsDmv),
                ..opts
            },
        )
        .unwrap();
        assert!(!bad.get(DMV_BOUNDS_TRUTH).unwrap().passed());
    }
}
