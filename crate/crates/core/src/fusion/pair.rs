//! Two-agent update algebra seen from the agent doing the update ("own")
//! with the measurement partner as "other".
//!
//! With `H = [H_own, H_other]` and a candidate cross block `X` (own × other),
//! the updated covariance for any gain `K` is
//!
//! ```text
//! P(K, X) = A P_J(X) Aᵀ + K R Kᵀ,   A = [I − K H_own, −K H_other]
//! ```
//!
//! and the minimizing gain is `K(X) = (P_own H_ownᵀ + X H_otherᵀ) S(X)⁻¹`.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vec};
use crate::types::{wrap_angle, Belief, CovarianceMatrix, RelativeMeasurement};

use super::models::RelativeModel;

/// Innovation covariances with a larger condition number are rejected.
pub const MAX_INNOVATION_CONDITION: f64 = 1e12;

/// Which member of the measurement pair is updating its belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Observer,
    Target,
}

#[derive(Debug, Clone)]
pub struct PairProblem {
    pub p_own: Mat,
    pub p_other: Mat,
    pub h_own: Mat,
    pub h_other: Mat,
    pub r: Mat,
    sqrt_own: Mat,
    sqrt_other: Mat,
}

impl PairProblem {
    pub fn new(p_own: Mat, p_other: Mat, h_own: Mat, h_other: Mat, r: Mat) -> Result<Self> {
        let nz = r.nrows();
        if h_own.shape() != (nz, p_own.nrows()) || h_other.shape() != (nz, p_other.nrows()) {
            return Err(Error::Dimension(format!(
                "jacobians {:?}/{:?} do not match covariances {}/{} and R {}",
                h_own.shape(),
                h_other.shape(),
                p_own.nrows(),
                p_other.nrows(),
                nz
            )));
        }
        let sqrt_own = linalg::psd_sqrt(&p_own);
        let sqrt_other = linalg::psd_sqrt(&p_other);
        Ok(Self {
            p_own,
            p_other,
            h_own,
            h_other,
            r,
            sqrt_own,
            sqrt_other,
        })
    }

    pub fn n_own(&self) -> usize {
        self.p_own.nrows()
    }

    pub fn n_other(&self) -> usize {
        self.p_other.nrows()
    }

    /// PSD square roots `(A, B)` with `A Aᵀ = P_own`, `B Bᵀ = P_other`.
    pub fn factors(&self) -> (&Mat, &Mat) {
        (&self.sqrt_own, &self.sqrt_other)
    }

    /// Cross block for a contraction `C`: `X = A C Bᵀ`.
    pub fn cross_from_contraction(&self, c: &Mat) -> Mat {
        &self.sqrt_own * c * self.sqrt_other.transpose()
    }

    pub fn stacked_h(&self) -> Mat {
        linalg::hstack(&self.h_own, &self.h_other)
    }

    pub fn joint_cov(&self, x: &Mat) -> Mat {
        linalg::joint(&self.p_own, x, &self.p_other)
    }

    pub fn zero_cross(&self) -> Mat {
        Mat::zeros(self.n_own(), self.n_other())
    }

    /// `S(X) = H P_J(X) Hᵀ + R`.
    pub fn innovation_cov(&self, x: &Mat) -> Mat {
        let hx = &self.h_own * x * self.h_other.transpose();
        let s = &self.h_own * &self.p_own * self.h_own.transpose()
            + &self.h_other * &self.p_other * self.h_other.transpose()
            + &hx
            + hx.transpose()
            + &self.r;
        linalg::symmetrize(&s)
    }

    /// Minimum-variance gain for a known (or hypothesized) cross block.
    pub fn gain(&self, x: &Mat) -> Result<Mat> {
        let s = self.innovation_cov(x);
        let condition = linalg::sym_condition(&s);
        if !(condition <= MAX_INNOVATION_CONDITION) {
            return Err(Error::SingularInnovationCov { condition });
        }
        let s_inv = linalg::spd_inverse(&s).ok_or(Error::SingularInnovationCov { condition })?;
        Ok((&self.p_own * self.h_own.transpose() + x * self.h_other.transpose()) * s_inv)
    }

    /// First-order updated covariance `P(K, X)` in Joseph form.
    pub fn cov_for_gain(&self, k: &Mat, x: &Mat) -> Mat {
        let a1 = Mat::identity(self.n_own(), self.n_own()) - k * &self.h_own;
        let a2 = -(k * &self.h_other);
        let p = &a1 * &self.p_own * a1.transpose()
            + &a2 * &self.p_other * a2.transpose()
            + &a1 * x * a2.transpose()
            + &a2 * x.transpose() * a1.transpose()
            + k * &self.r * k.transpose();
        linalg::symmetrize(&p)
    }

    /// `(K(X), P(K(X), X))`.
    pub fn emv(&self, x: &Mat) -> Result<(Mat, Mat)> {
        let k = self.gain(x)?;
        let p = self.cov_for_gain(&k, x);
        Ok((k, p))
    }

    /// `(I − K H_own, −K H_other)`.
    pub fn gain_blocks(&self, k: &Mat) -> (Mat, Mat) {
        (
            Mat::identity(self.n_own(), self.n_own()) - k * &self.h_own,
            -(k * &self.h_other),
        )
    }
}

/// A pair problem together with the innovation and the updating agent's prior.
#[derive(Debug, Clone)]
pub struct Linearized {
    pub problem: PairProblem,
    pub innovation: Vec,
    pub own: Belief,
}

impl Linearized {
    pub fn new(problem: PairProblem, innovation: Vec, own: Belief) -> Self {
        Self {
            problem,
            innovation,
            own,
        }
    }

    /// Applies `K` to the prior mean and pairs it with `cov`.
    pub fn updated_belief(&self, k: &Mat, cov: Mat) -> Belief {
        let mut mean = &self.own.mean + k * &self.innovation;
        if mean.len() == 3 {
            mean[2] = wrap_angle(mean[2]);
        }
        Belief {
            mean,
            cov: CovarianceMatrix::trusted(cov),
            agent_id: self.own.agent_id,
            stamp: self.own.stamp,
        }
    }
}

/// Linearizes `meas` about the two prior beliefs for the agent on `side`.
pub fn linearize(bel_i: &Belief, bel_j: &Belief, meas: &RelativeMeasurement, side: Side) -> Result<Linearized> {
    let model = RelativeModel::new(meas.kind);
    let (z_hat, jac) = model.evaluate(&bel_i.pose(), &bel_j.pose())?;
    let innovation = model.innovation(&meas.z, &z_hat);
    let r = meas.r.matrix().clone();
    let (own, other, h_own, h_other) = match side {
        Side::Observer => (bel_i, bel_j, jac.h_ii, jac.h_ij),
        Side::Target => (bel_j, bel_i, jac.h_ij, jac.h_ii),
    };
    let problem = PairProblem::new(
        own.cov.matrix().clone(),
        other.cov.matrix().clone(),
        h_own,
        h_other,
        r,
    )?;
    Ok(Linearized::new(problem, innovation, own.clone()))
}
