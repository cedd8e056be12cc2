//! Cooperative localization with relative measurements whose inter-agent
//! cross-covariances are not tracked.
//!
//! Each agent runs a local EKF and, when it measures a teammate, fuses the
//! measurement with one of several rules: the Naive update (cross terms
//! ignored), DMV (block-diagonal bound optimized over a scalar weight), ECMV
//! (min-max over the unknown cross block) or PECMV (determinant-maximizing
//! cross-block estimate). A joint EKF over the stacked team state serves as
//! the reference.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod fusion;
pub mod instances;
pub mod linalg;
pub mod local_filter;
pub mod motion;
pub mod protocol;
pub mod sim;
pub mod solvers;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use types::{
    wrap_angle, Belief, CovarianceMatrix, FusionMethod, FusionResult, JacobianPair, JointBelief, MeasurementKind,
    Pose2D, RelativeMeasurement,
};
