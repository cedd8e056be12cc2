//! Numerical solvers behind the fusion rules.

pub(crate) mod ascent;
pub mod contraction;
pub mod logdet;
pub(crate) mod newton;
pub mod saddle;
pub mod scalar;

pub use contraction::{project_contraction, ContractionPoint};
pub use logdet::{logdet_max, LogDetMax};
pub use saddle::{saddle_gap, saddle_solve, worst_case_trace, SaddlePoint};
pub use scalar::{omega_search, ScalarMinimum, ScalarSearchSpec};
