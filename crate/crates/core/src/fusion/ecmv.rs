//! Estimated-cross-covariance update: the gain minimizes the worst-case trace
//! over every cross block compatible with the two marginals.

use crate::error::Result;
use crate::solvers::saddle::saddle_solve;
use crate::types::{Belief, FusionMethod, FusionResult, RelativeMeasurement};

use super::config::FusionConfig;
use super::pair::{linearize, Linearized, Side};

pub fn ecmv_fuse(lin: &Linearized, cfg: &FusionConfig) -> Result<FusionResult> {
    let p = &lin.problem;
    let sp = saddle_solve(p, cfg.psd_margin, &cfg.saddle)?;
    let cov = p.cov_for_gain(&sp.k_star, &sp.x_star);
    Ok(FusionResult {
        belief: lin.updated_belief(&sp.k_star, cov),
        gain: sp.k_star,
        method: FusionMethod::Ecmv,
        omega_star: None,
        x_star: Some(sp.x_star),
        objective: sp.value,
        solver_iters: sp.iters,
    })
}

pub fn ecmv_update(bel_i: &Belief, bel_j: &Belief, meas: &RelativeMeasurement, cfg: &FusionConfig) -> Result<FusionResult> {
    ecmv_fuse(&linearize(bel_i, bel_j, meas, Side::Observer)?, cfg)
}
