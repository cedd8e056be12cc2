//! Updates that use an explicit cross-covariance: EMV, the Naive update
//! (cross block forced to zero) and the joint-EKF oracle.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vec};
use crate::types::{wrap_angle, Belief, FusionMethod, FusionResult, JacobianPair, JointBelief, RelativeMeasurement};

use super::models::RelativeModel;
use super::pair::{linearize, Linearized, Side, MAX_INNOVATION_CONDITION};

/// Minimum-variance gain for one member of the pair when `P_ij` is known.
///
/// Evaluated on the stacked joint covariance reordered so that the updating
/// agent comes first.
pub fn emv_gain(joint: &JointBelief, jac: &JacobianPair, r: &Mat, for_agent: Side) -> Result<Mat> {
    let p_ij = joint
        .p_ij
        .as_ref()
        .ok_or_else(|| Error::Dimension("EMV gain needs a known cross-covariance".into()))?;
    let (p_l, p_k, x, h_l, h_k) = match for_agent {
        Side::Observer => (&joint.p_i, &joint.p_j, p_ij.clone(), &jac.h_ii, &jac.h_ij),
        Side::Target => (&joint.p_j, &joint.p_i, p_ij.transpose(), &jac.h_ij, &jac.h_ii),
    };
    let n_l = p_l.nrows();
    let p_joint = linalg::joint(p_l, &x, p_k);
    let h = linalg::hstack(h_l, h_k);
    let s = linalg::symmetrize(&(&h * &p_joint * h.transpose() + r));
    let condition = linalg::sym_condition(&s);
    if !(condition <= MAX_INNOVATION_CONDITION) {
        return Err(Error::SingularInnovationCov { condition });
    }
    let s_inv = linalg::spd_inverse(&s).ok_or(Error::SingularInnovationCov { condition })?;
    let full = &p_joint * h.transpose() * s_inv;
    Ok(full.rows(0, n_l).into_owned())
}

/// EMV update of the linearized pair with cross block `x` (own × other).
pub fn emv_fuse(lin: &Linearized, x: &Mat) -> Result<FusionResult> {
    let (k, cov) = lin.problem.emv(x)?;
    Ok(FusionResult {
        objective: cov.trace(),
        belief: lin.updated_belief(&k, cov),
        gain: k,
        method: FusionMethod::Emv,
        omega_star: None,
        x_star: None,
        solver_iters: 0,
    })
}

/// Update that treats the partner's estimate as uncorrelated.
pub fn naive_fuse(lin: &Linearized) -> Result<FusionResult> {
    let mut out = emv_fuse(lin, &lin.problem.zero_cross())?;
    out.method = FusionMethod::Naive;
    Ok(out)
}

/// Observer-side EMV update with the known cross block `p_ij` (n_i × n_j).
pub fn emv_update(bel_i: &Belief, bel_j: &Belief, p_ij: &Mat, meas: &RelativeMeasurement) -> Result<FusionResult> {
    emv_update_for(Side::Observer, bel_i, bel_j, p_ij, meas)
}

pub fn emv_update_for(
    side: Side,
    bel_i: &Belief,
    bel_j: &Belief,
    p_ij: &Mat,
    meas: &RelativeMeasurement,
) -> Result<FusionResult> {
    let lin = linearize(bel_i, bel_j, meas, side)?;
    let x = match side {
        Side::Observer => p_ij.clone(),
        Side::Target => p_ij.transpose(),
    };
    emv_fuse(&lin, &x)
}

pub fn naive_update(bel_i: &Belief, bel_j: &Belief, meas: &RelativeMeasurement) -> Result<FusionResult> {
    naive_fuse(&linearize(bel_i, bel_j, meas, Side::Observer)?)
}

/// Result of a stacked EKF update.
#[derive(Debug, Clone)]
pub struct JointUpdate {
    pub mean: Vec,
    pub cov: Mat,
    pub gain: Mat,
}

/// EKF update of a stacked state with measurement matrix `h` (Joseph form).
pub fn joint_ekf_update(mean: &Vec, cov: &Mat, h: &Mat, r: &Mat, innovation: &Vec) -> Result<JointUpdate> {
    let s = linalg::symmetrize(&(h * cov * h.transpose() + r));
    let condition = linalg::sym_condition(&s);
    if !(condition <= MAX_INNOVATION_CONDITION) {
        return Err(Error::SingularInnovationCov { condition });
    }
    let s_inv = linalg::spd_inverse(&s).ok_or(Error::SingularInnovationCov { condition })?;
    let k = cov * h.transpose() * s_inv;
    let a = Mat::identity(cov.nrows(), cov.nrows()) - &k * h;
    let cov_new = linalg::symmetrize(&(&a * cov * a.transpose() + &k * r * k.transpose()));
    Ok(JointUpdate {
        mean: mean + &k * innovation,
        cov: cov_new,
        gain: k,
    })
}

/// Information-form updated covariance `(P⁻¹ + Hᵀ R⁻¹ H)⁻¹`, when `P` and
/// `R` are invertible.
pub fn joint_information_cov(cov: &Mat, h: &Mat, r: &Mat) -> Option<Mat> {
    let info = linalg::spd_inverse(cov)? + h.transpose() * linalg::spd_inverse(r)? * h;
    linalg::spd_inverse(&info)
}

/// Exact joint-EKF update of both agents, including the cross block.
pub fn joint_oracle_update(joint: &JointBelief, meas: &RelativeMeasurement) -> Result<JointBelief> {
    let p_joint = joint
        .stacked_cov()
        .ok_or_else(|| Error::Dimension("joint oracle needs a known cross-covariance".into()))?;
    let model = RelativeModel::new(meas.kind);
    let xi = crate::types::Pose2D::from_vector(&joint.mean_i);
    let xj = crate::types::Pose2D::from_vector(&joint.mean_j);
    let (z_hat, jac) = model.evaluate(&xi, &xj)?;
    let nu = model.innovation(&meas.z, &z_hat);
    let up = joint_ekf_update(&joint.stacked_mean(), &p_joint, &jac.stacked(), meas.r.matrix(), &nu)?;
    let (ni, nj) = (joint.mean_i.len(), joint.mean_j.len());
    let mut mean_i = up.mean.rows(0, ni).into_owned();
    let mut mean_j = up.mean.rows(ni, nj).into_owned();
    if ni == 3 {
        mean_i[2] = wrap_angle(mean_i[2]);
    }
    if nj == 3 {
        mean_j[2] = wrap_angle(mean_j[2]);
    }
    Ok(JointBelief {
        mean_i,
        mean_j,
        p_i: up.cov.view((0, 0), (ni, ni)).into_owned(),
        p_j: up.cov.view((ni, ni), (nj, nj)).into_owned(),
        p_ij: Some(up.cov.view((0, ni), (ni, nj)).into_owned()),
    })
}
