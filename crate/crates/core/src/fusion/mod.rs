//! Relative-measurement belief updates.

pub mod config;
pub mod dmv;
pub mod ecmv;
pub mod emv;
pub mod models;
pub mod pair;
pub mod pecmv;

pub use config::{AscentConfig, DmvObjective, FusionConfig, GammaMode, GradientMode, SaddleConfig};
pub use dmv::{dmv_fuse, dmv_gain, dmv_update};
pub use ecmv::{ecmv_fuse, ecmv_update};
pub use emv::{emv_gain, emv_update, joint_oracle_update, naive_update};
pub use models::{innovation, RelativeModel};
pub use pair::{linearize, Linearized, PairProblem, Side};
pub use pecmv::{pecmv_fuse, pecmv_update};

use crate::error::{Error, Result};
use crate::types::{Belief, FusionMethod, FusionResult, RelativeMeasurement};

/// Update of an already linearized pair with a method that does not need the
/// cross-covariance.
pub fn fuse(lin: &Linearized, method: FusionMethod, cfg: &FusionConfig) -> Result<FusionResult> {
    match method {
        FusionMethod::Naive => emv::naive_fuse(lin),
        FusionMethod::Dmv => dmv_fuse(lin, cfg),
        FusionMethod::Ecmv => ecmv_fuse(lin, cfg),
        FusionMethod::Pecmv => pecmv_fuse(lin, cfg),
        FusionMethod::Emv => Err(Error::Dimension(
            "EMV needs the cross-covariance; use emv_update".into(),
        )),
    }
}

/// Updates the belief of the agent on `side` of `meas`; `bel_i` is always the
/// observer and `bel_j` the target.
pub fn update(
    method: FusionMethod,
    side: Side,
    bel_i: &Belief,
    bel_j: &Belief,
    meas: &RelativeMeasurement,
    cfg: &FusionConfig,
) -> Result<FusionResult> {
    fuse(&linearize(bel_i, bel_j, meas, side)?, method, cfg)
}

/// Folds `update` over `partners`, each step starting from the belief the
/// previous one produced. `own` plays `side` in every measurement.
///
/// The result carries the last gain and objective, the sum of solver
/// iterations and, for DMV, the last ω*.
pub fn sequential_update_for(
    side: Side,
    own: &Belief,
    partners: &[(Belief, RelativeMeasurement)],
    method: FusionMethod,
    cfg: &FusionConfig,
) -> Result<FusionResult> {
    let mut current = own.clone();
    let mut iters = 0;
    let mut last: Option<FusionResult> = None;
    for (partner, meas) in partners {
        let out = match side {
            Side::Observer => update(method, side, &current, partner, meas, cfg)?,
            Side::Target => update(method, side, partner, &current, meas, cfg)?,
        };
        iters += out.solver_iters;
        current = out.belief.clone();
        last = Some(out);
    }
    let mut out = last.ok_or_else(|| Error::Dimension("sequential update with no measurements".into()))?;
    out.solver_iters = iters;
    Ok(out)
}

/// Observer-side [`sequential_update_for`].
pub fn sequential_update(
    bel_i: &Belief,
    partners: &[(Belief, RelativeMeasurement)],
    method: FusionMethod,
    cfg: &FusionConfig,
) -> Result<FusionResult> {
    sequential_update_for(Side::Observer, bel_i, partners, method, cfg)
}
