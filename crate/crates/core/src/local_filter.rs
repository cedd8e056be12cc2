//! Per-agent EKF: dead-reckoning prediction and landmark range correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vec};
use crate::motion::{propagate_state, propagation_jacobians, NoiseModel, UnicycleInput};
use crate::types::{Belief, CovarianceMatrix, Pose2D};

/// Default additive process noise per step.
pub const DEFAULT_Q: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessNoise {
    pub q_x: CovarianceMatrix,
}

impl ProcessNoise {
    pub fn isotropic(q: f64) -> Self {
        Self {
            q_x: CovarianceMatrix::trusted(Mat::identity(3, 3) * q),
        }
    }
}

impl Default for ProcessNoise {
    fn default() -> Self {
        Self::isotropic(DEFAULT_Q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

pub fn predict_belief(bel: &Belief, u: &UnicycleInput, nm: &NoiseModel, q: &ProcessNoise) -> Belief {
    let pose = bel.pose();
    let (f_x, f_u) = propagation_jacobians(&pose, u);
    let (sv, sw) = nm.input_std(u);
    let sigma_u = Mat::from_diagonal(&Vec::from_vec(vec![sv * sv, sw * sw]));
    let cov = &f_x * bel.cov.matrix() * f_x.transpose()
        + &f_u * sigma_u * f_u.transpose()
        + q.q_x.matrix();
    Belief {
        mean: propagate_state(&pose, u).to_vector(),
        cov: CovarianceMatrix::trusted(cov),
        agent_id: bel.agent_id,
        stamp: bel.stamp + 1,
    }
}

/// Range to a landmark and its 1×3 Jacobian.
pub fn range_measurement_model(x: &Pose2D, lm: &Landmark) -> Result<(f64, Mat)> {
    let (dx, dy) = (x.x - lm.x, x.y - lm.y);
    let h = dx.hypot(dy);
    if h < 1e-6 {
        return Err(Error::DegenerateGeometry { distance: h });
    }
    Ok((h, Mat::from_row_slice(1, 3, &[dx / h, dy / h, 0.0])))
}

/// Scalar EKF update with a landmark range, Joseph-form covariance.
pub fn abs_correct_belief(bel: &Belief, z: f64, lm: &Landmark, r_std: f64) -> Result<Belief> {
    debug_assert!(r_std > 0.0);
    let (h, jac) = range_measurement_model(&bel.pose(), lm)?;
    let p = bel.cov.matrix();
    let r = r_std * r_std;
    let s = (&jac * p * jac.transpose())[(0, 0)] + r;
    let k = p * jac.transpose() / s;
    let mut mean = &bel.mean + &k * (z - h);
    mean[2] = crate::types::wrap_angle(mean[2]);
    let a = Mat::identity(3, 3) - &k * &jac;
    let cov = &a * p * a.transpose() + &k * k.transpose() * r;
    Ok(Belief {
        mean,
        cov: CovarianceMatrix::trusted(cov),
        agent_id: bel.agent_id,
        stamp: bel.stamp,
    })
}
