//! Unicycle kinematics with Euler discretization on the pre-update heading.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::linalg::Mat;
use crate::types::Pose2D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnicycleInput {
    /// Linear velocity, m/s.
    pub v: f64,
    /// Angular velocity, rad/s.
    pub omega: f64,
    /// Step length, s. Must be positive.
    pub dt: f64,
}

impl UnicycleInput {
    pub fn new(v: f64, omega: f64, dt: f64) -> Self {
        debug_assert!(dt > 0.0, "dt must be positive");
        Self { v, omega, dt }
    }
}

/// Odometry noise as a fraction of the commanded speed, with absolute floors
/// so that standstill segments still carry some uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub v_frac: f64,
    pub omega_frac: f64,
    pub floor_v: f64,
    pub floor_omega: f64,
}

impl NoiseModel {
    pub fn new(v_frac: f64, omega_frac: f64, floor_v: f64, floor_omega: f64) -> Self {
        Self {
            v_frac,
            omega_frac,
            floor_v,
            floor_omega,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Standard deviations `(σ_v, σ_ω)` for the input `u`.
    pub fn input_std(&self, u: &UnicycleInput) -> (f64, f64) {
        (
            (self.v_frac * u.v.abs()).max(self.floor_v),
            (self.omega_frac * u.omega.abs()).max(self.floor_omega),
        )
    }
}

pub fn propagate_state(x: &Pose2D, u: &UnicycleInput) -> Pose2D {
    let phi = x.phi();
    Pose2D::new(
        x.x + u.dt * u.v * phi.cos(),
        x.y + u.dt * u.v * phi.sin(),
        phi + u.dt * u.omega,
    )
}

/// Returns `(F_x, F_u)`, the partials of [`propagate_state`] with respect to
/// the pose and to `(v, ω)`.
pub fn propagation_jacobians(x: &Pose2D, u: &UnicycleInput) -> (Mat, Mat) {
    let (s, c) = x.phi().sin_cos();
    let f_x = Mat::from_row_slice(
        3,
        3,
        &[
            1.0, 0.0, -u.dt * u.v * s, //
            0.0, 1.0, u.dt * u.v * c, //
            0.0, 0.0, 1.0,
        ],
    );
    let f_u = Mat::from_row_slice(
        3,
        2,
        &[
            u.dt * c, 0.0, //
            u.dt * s, 0.0, //
            0.0, u.dt,
        ],
    );
    (f_x, f_u)
}

/// Perturbs `(v, ω)` with zero-mean Gaussian noise drawn from `nm`.
pub fn sample_noisy_input<R: Rng + ?Sized>(u: &UnicycleInput, nm: &NoiseModel, rng: &mut R) -> UnicycleInput {
    let (sv, sw) = nm.input_std(u);
    let mut out = *u;
    if sv > 0.0 {
        out.v += Normal::new(0.0, sv).expect("finite std").sample(rng);
    }
    if sw > 0.0 {
        out.omega += Normal::new(0.0, sw).expect("finite std").sample(rng);
    }
    out
}
