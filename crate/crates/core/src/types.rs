//! Shared domain types: poses, validated covariances, beliefs and measurements.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vec};

/// Relative PSD tolerance: eigenvalues down to `-PSD_RTOL * trace` are accepted.
pub const PSD_RTOL: f64 = 1e-9;

pub type AgentId = usize;

/// Wraps an angle into the half-open interval (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = a.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    phi: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self {
            x,
            y,
            phi: wrap_angle(phi),
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn to_vector(&self) -> Vec {
        Vec::from_vec(vec![self.x, self.y, self.phi])
    }

    /// Reads the first three entries as `(x, y, phi)`.
    pub fn from_vector(v: &Vec) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl Default for Pose2D {
    fn default() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }
}

/// A symmetric positive semidefinite matrix.
#[derive(Clone, PartialEq)]
pub struct CovarianceMatrix(Mat);

impl fmt::Debug for CovarianceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CovarianceMatrix({:?})", self.0.as_slice())
    }
}

/// Symmetrizes `entries` and checks positive semidefiniteness.
pub fn make_spd(entries: Mat) -> Result<CovarianceMatrix> {
    if entries.nrows() != entries.ncols() {
        return Err(Error::NotSquare {
            rows: entries.nrows(),
            cols: entries.ncols(),
        });
    }
    let m = linalg::symmetrize(&entries);
    let trace = m.trace();
    let min_eig = linalg::min_eigenvalue(&m);
    if !min_eig.is_finite() || min_eig < -PSD_RTOL * trace.abs() {
        return Err(Error::NotPsd { min_eig, trace });
    }
    Ok(CovarianceMatrix(m))
}

impl CovarianceMatrix {
    pub fn new(entries: Mat) -> Result<Self> {
        make_spd(entries)
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        make_spd(Mat::from_diagonal(&Vec::from_column_slice(d)))
    }

    /// Symmetrizes without the PSD check. Used for results of update
    /// formulas that are PSD by construction up to rounding.
    pub(crate) fn trusted(m: Mat) -> Self {
        Self(linalg::symmetrize(&m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn det(&self) -> f64 {
        linalg::sym_det(&self.0)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.0.clone().cholesky().is_some() && linalg::min_eigenvalue(&self.0) > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    pub mean: Vec,
    pub cov: CovarianceMatrix,
    pub agent_id: AgentId,
    pub stamp: usize,
}

impl Belief {
    pub fn new(agent_id: AgentId, mean: Vec, cov: CovarianceMatrix, stamp: usize) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::Dimension(format!(
                "belief mean has {} entries but covariance is {}x{}",
                mean.len(),
                cov.dim(),
                cov.dim()
            )));
        }
        Ok(Self {
            mean,
            cov,
            agent_id,
            stamp,
        })
    }

    pub fn from_pose(agent_id: AgentId, pose: Pose2D, cov: CovarianceMatrix, stamp: usize) -> Result<Self> {
        Self::new(agent_id, pose.to_vector(), cov, stamp)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn pose(&self) -> Pose2D {
        Pose2D::from_vector(&self.mean)
    }
}

/// Two beliefs plus their cross-covariance block. `p_ij = None` means the
/// correlation is unknown, which is not the same as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBelief {
    pub mean_i: Vec,
    pub mean_j: Vec,
    pub p_i: Mat,
    pub p_j: Mat,
    pub p_ij: Option<Mat>,
}

impl JointBelief {
    pub fn new(bel_i: &Belief, bel_j: &Belief, p_ij: Option<Mat>) -> Result<Self> {
        let jb = Self {
            mean_i: bel_i.mean.clone(),
            mean_j: bel_j.mean.clone(),
            p_i: bel_i.cov.matrix().clone(),
            p_j: bel_j.cov.matrix().clone(),
            p_ij,
        };
        if let Some(x) = &jb.p_ij {
            if x.shape() != (jb.p_i.nrows(), jb.p_j.nrows()) {
                return Err(Error::Dimension("cross-covariance block shape".into()));
            }
            make_spd(jb.stacked_cov().expect("present"))?;
        }
        Ok(jb)
    }

    /// The stacked joint covariance, when the cross block is known.
    pub fn stacked_cov(&self) -> Option<Mat> {
        self.p_ij
            .as_ref()
            .map(|x| linalg::joint(&self.p_i, x, &self.p_j))
    }

    pub fn stacked_mean(&self) -> Vec {
        let mut v = Vec::zeros(self.mean_i.len() + self.mean_j.len());
        v.rows_mut(0, self.mean_i.len()).copy_from(&self.mean_i);
        v.rows_mut(self.mean_i.len(), self.mean_j.len())
            .copy_from(&self.mean_j);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementKind {
    RelativePose,
    RelativeRange,
    RelativeBearing,
}

impl MeasurementKind {
    pub fn dim(self) -> usize {
        match self {
            MeasurementKind::RelativePose => 3,
            MeasurementKind::RelativeRange | MeasurementKind::RelativeBearing => 1,
        }
    }

    /// Indices of measurement components that are angles.
    pub fn angle_components(self) -> &'static [usize] {
        match self {
            MeasurementKind::RelativePose => &[2],
            MeasurementKind::RelativeRange => &[],
            MeasurementKind::RelativeBearing => &[0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasurementKind::RelativePose => "relative-pose",
            MeasurementKind::RelativeRange => "relative-range",
            MeasurementKind::RelativeBearing => "relative-bearing",
        }
    }

    pub const ALL: [MeasurementKind; 3] = [
        MeasurementKind::RelativePose,
        MeasurementKind::RelativeRange,
        MeasurementKind::RelativeBearing,
    ];
}

impl std::str::FromStr for MeasurementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relative-pose" | "pose" => Ok(MeasurementKind::RelativePose),
            "relative-range" | "range" => Ok(MeasurementKind::RelativeRange),
            "relative-bearing" | "bearing" => Ok(MeasurementKind::RelativeBearing),
            other => Err(Error::UnknownModelKind(other.to_string())),
        }
    }
}

/// A relative measurement `z` taken by `observer` of `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeMeasurement {
    pub observer: AgentId,
    pub target: AgentId,
    pub kind: MeasurementKind,
    pub z: Vec,
    pub r: CovarianceMatrix,
    pub stamp: usize,
}

impl RelativeMeasurement {
    pub fn new(
        observer: AgentId,
        target: AgentId,
        kind: MeasurementKind,
        z: Vec,
        r: CovarianceMatrix,
        stamp: usize,
    ) -> Result<Self> {
        if z.len() != kind.dim() || r.dim() != kind.dim() {
            return Err(Error::Dimension(format!(
                "{} measurement needs {} components",
                kind.name(),
                kind.dim()
            )));
        }
        if !r.is_positive_definite() {
            return Err(Error::NotPsd {
                min_eig: linalg::min_eigenvalue(r.matrix()),
                trace: r.trace(),
            });
        }
        Ok(Self {
            observer,
            target,
            kind,
            z,
            r,
            stamp,
        })
    }
}

/// Linearized measurement blocks `H_ii` (w.r.t. the observer) and `H_ij`
/// (w.r.t. the target).
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianPair {
    pub h_ii: Mat,
    pub h_ij: Mat,
}

impl JacobianPair {
    pub fn stacked(&self) -> Mat {
        linalg::hstack(&self.h_ii, &self.h_ij)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMethod {
    Naive,
    Emv,
    Dmv,
    Ecmv,
    Pecmv,
}

impl FusionMethod {
    pub fn name(self) -> &'static str {
        match self {
            FusionMethod::Naive => "naive",
            FusionMethod::Emv => "emv",
            FusionMethod::Dmv => "dmv",
            FusionMethod::Ecmv => "ecmv",
            FusionMethod::Pecmv => "pecmv",
        }
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Updated belief plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct FusionResult {
    pub belief: Belief,
    pub gain: Mat,
    pub method: FusionMethod,
    /// Set only for DMV.
    pub omega_star: Option<f64>,
    /// Set only for ECMV and PECMV.
    pub x_star: Option<Mat>,
    pub objective: f64,
    pub solver_iters: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(6.2) - (6.2 - 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn make_spd_examples() {
        let id = make_spd(Mat::identity(3, 3)).unwrap();
        assert_eq!(id.matrix(), &Mat::identity(3, 3));

        let m = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        assert_eq!(make_spd(m.clone()).unwrap().matrix(), &m);

        let bad = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match make_spd(bad) {
            Err(Error::NotPsd { min_eig, .. }) => assert!((min_eig + 1.0).abs() < 1e-12),
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn make_spd_symmetrizes() {
        let m = Mat::from_row_slice(2, 2, &[2.0, 0.2, 0.4, 1.0]);
        let c = make_spd(m).unwrap();
        assert_eq!(c.matrix()[(0, 1)], c.matrix()[(1, 0)]);
        assert!((c.matrix()[(0, 1)] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn make_spd_rejects_non_square() {
        assert!(matches!(
            make_spd(Mat::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn pose_normalizes_heading() {
        let p = Pose2D::new(1.0, 2.0, 3.0 * PI);
        assert!((p.phi() - PI).abs() < 1e-12);
    }

    #[test]
    fn belief_dimension_checked() {
        let r = Belief::new(0, Vec::zeros(2), CovarianceMatrix::identity(3), 0);
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn measurement_requires_pd_noise() {
        let r = RelativeMeasurement::new(
            0,
            1,
            MeasurementKind::RelativeRange,
            Vec::from_element(1, 1.0),
            make_spd(Mat::zeros(1, 1)).unwrap(),
            0,
        );
        assert!(matches!(r, Err(Error::NotPsd { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn wrap_is_idempotent_and_in_range(a in -1e4f64..1e4) {
                let w = wrap_angle(a);
                prop_assert!(w > -PI && w <= PI);
                prop_assert_eq!(wrap_angle(w), w);
                let k = ((a - w) / (2.0 * PI)).round();
                prop_assert!((a - w - k * 2.0 * PI).abs() < 1e-9);
            }

            #[test]
            fn constructed_covariances_are_symmetric_psd(
                entries in proptest::collection::vec(-2.0f64..2.0, 9)
            ) {
                let a = Mat::from_row_slice(3, 3, &entries);
                let c = make_spd(&a * a.transpose()).unwrap();
                let m = c.matrix();
                prop_assert_eq!(linalg::max_abs(&(m - m.transpose())), 0.0);
                prop_assert!(linalg::min_eigenvalue(m) >= -PSD_RTOL * m.trace());
            }
        }
    }
}
