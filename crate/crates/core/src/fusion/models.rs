//! Relative measurement models between two planar poses and their Jacobians.

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vec};
use crate::types::{wrap_angle, JacobianPair, MeasurementKind, Pose2D};

/// Minimum separation for range and bearing models, meters.
pub const MIN_SEPARATION: f64 = 1e-6;

/// Evaluates `h(x_i, x_j)` and its Jacobians for a measurement taken by the
/// agent at `xi` of the agent at `xj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelativeModel {
    pub kind: MeasurementKind,
}

impl RelativeModel {
    pub fn new(kind: MeasurementKind) -> Self {
        Self { kind }
    }

    pub fn evaluate(&self, xi: &Pose2D, xj: &Pose2D) -> Result<(Vec, JacobianPair)> {
        match self.kind {
            MeasurementKind::RelativePose => Ok(relative_pose(xi, xj)),
            MeasurementKind::RelativeRange => relative_range(xi, xj),
            MeasurementKind::RelativeBearing => relative_bearing(xi, xj),
        }
    }

    pub fn innovation(&self, z: &Vec, z_hat: &Vec) -> Vec {
        innovation(z, z_hat, self.kind)
    }
}

/// Target position and heading expressed in the observer frame.
pub fn relative_pose(xi: &Pose2D, xj: &Pose2D) -> (Vec, JacobianPair) {
    let (s, c) = xi.phi().sin_cos();
    let (dx, dy) = (xj.x - xi.x, xj.y - xi.y);
    let z = Vec::from_vec(vec![
        c * dx + s * dy,
        -s * dx + c * dy,
        wrap_angle(xj.phi() - xi.phi()),
    ]);
    let h_ii = Mat::from_row_slice(
        3,
        3,
        &[
            -c, -s, -s * dx + c * dy, //
            s, -c, -c * dx - s * dy, //
            0.0, 0.0, -1.0,
        ],
    );
    let h_ij = Mat::from_row_slice(
        3,
        3,
        &[
            c, s, 0.0, //
            -s, c, 0.0, //
            0.0, 0.0, 1.0,
        ],
    );
    (z, JacobianPair { h_ii, h_ij })
}

fn separation(xi: &Pose2D, xj: &Pose2D) -> Result<(f64, f64, f64)> {
    let (dx, dy) = (xj.x - xi.x, xj.y - xi.y);
    let rho = dx.hypot(dy);
    if rho <= MIN_SEPARATION {
        return Err(Error::DegenerateGeometry { distance: rho });
    }
    Ok((dx, dy, rho))
}

pub fn relative_range(xi: &Pose2D, xj: &Pose2D) -> Result<(Vec, JacobianPair)> {
    let (dx, dy, rho) = separation(xi, xj)?;
    let (ux, uy) = (dx / rho, dy / rho);
    Ok((
        Vec::from_element(1, rho),
        JacobianPair {
            h_ii: Mat::from_row_slice(1, 3, &[-ux, -uy, 0.0]),
            h_ij: Mat::from_row_slice(1, 3, &[ux, uy, 0.0]),
        },
    ))
}

pub fn relative_bearing(xi: &Pose2D, xj: &Pose2D) -> Result<(Vec, JacobianPair)> {
    let (dx, dy, rho) = separation(xi, xj)?;
    let r2 = rho * rho;
    Ok((
        Vec::from_element(1, wrap_angle(dy.atan2(dx) - xi.phi())),
        JacobianPair {
            h_ii: Mat::from_row_slice(1, 3, &[dy / r2, -dx / r2, -1.0]),
            h_ij: Mat::from_row_slice(1, 3, &[-dy / r2, dx / r2, 0.0]),
        },
    ))
}

/// `z − ẑ` with angle components wrapped to (−π, π].
pub fn innovation(z: &Vec, z_hat: &Vec, kind: MeasurementKind) -> Vec {
    let mut nu = z - z_hat;
    for &k in kind.angle_components() {
        nu[k] = wrap_angle(nu[k]);
    }
    nu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_example() {
        let (z, jac) = relative_range(&Pose2D::new(0.0, 0.0, 0.0), &Pose2D::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(z[0], 1.0);
        assert_eq!(jac.h_ii.columns(0, 2), Mat::from_row_slice(1, 2, &[-1.0, 0.0]));
        assert_eq!(jac.h_ij.columns(0, 2), Mat::from_row_slice(1, 2, &[1.0, 0.0]));
    }

    #[test]
    fn identical_poses_give_zero_relative_pose() {
        let p = Pose2D::new(2.0, -1.0, 0.8);
        let (z, _) = relative_pose(&p, &p);
        assert_eq!(z, Vec::zeros(3));
    }

    #[test]
    fn coincident_positions_are_degenerate() {
        let a = Pose2D::new(1.0, 1.0, 0.0);
        let b = Pose2D::new(1.0, 1.0, 2.0);
        assert!(matches!(relative_range(&a, &b), Err(Error::DegenerateGeometry { .. })));
        assert!(matches!(relative_bearing(&a, &b), Err(Error::DegenerateGeometry { .. })));
        assert!(RelativeModel::new(MeasurementKind::RelativePose).evaluate(&a, &b).is_ok());
    }

    #[test]
    fn innovation_examples() {
        let z = Vec::from_element(1, 2.0);
        assert_eq!(innovation(&z, &z, MeasurementKind::RelativeRange)[0], 0.0);
        let nu = innovation(
            &Vec::from_element(1, 3.1),
            &Vec::from_element(1, -3.1),
            MeasurementKind::RelativeBearing,
        );
        assert!((nu[0] - (6.2 - 2.0 * std::f64::consts::PI)).abs() < 1e-12);
        assert!((nu[0] + 0.0832).abs() < 1e-4);
        let nu = innovation(
            &Vec::from_element(1, 2.0),
            &Vec::from_element(1, 1.5),
            MeasurementKind::RelativeRange,
        );
        assert_eq!(nu[0], 0.5);
    }
}
