//! Practical ECMV: the cross block is the one that maximizes the determinant
//! of the EMV-updated covariance, and the gain is the EMV gain at that block.

use crate::error::Result;
use crate::solvers::logdet::logdet_max;
use crate::types::{Belief, FusionMethod, FusionResult, RelativeMeasurement};

use super::config::FusionConfig;
use super::pair::{linearize, Linearized, Side};

pub fn pecmv_fuse(lin: &Linearized, cfg: &FusionConfig) -> Result<FusionResult> {
    let p = &lin.problem;
    let best = logdet_max(p, cfg.psd_margin, &cfg.ascent)?;
    let (k, cov) = p.emv(&best.x_star)?;
    Ok(FusionResult {
        belief: lin.updated_belief(&k, cov),
        gain: k,
        method: FusionMethod::Pecmv,
        omega_star: None,
        x_star: Some(best.x_star),
        objective: best.value,
        solver_iters: best.iters,
    })
}

pub fn pecmv_update(bel_i: &Belief, bel_j: &Belief, meas: &RelativeMeasurement, cfg: &FusionConfig) -> Result<FusionResult> {
    pecmv_fuse(&linearize(bel_i, bel_j, meas, Side::Observer)?, cfg)
}
