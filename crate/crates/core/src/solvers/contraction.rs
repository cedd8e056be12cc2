//! Parameterization of feasible cross blocks as `X = A C Bᵀ` with
//! `A Aᵀ = P_own`, `B Bᵀ = P_other` and `‖C‖₂ ≤ 1 − δ`. The joint matrix
//! `[[P_own, X], [Xᵀ, P_other]]` is PSD exactly when `‖C‖₂ ≤ 1`.

use crate::linalg::{self, Mat};

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPoint {
    c: Mat,
}

impl ContractionPoint {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            c: Mat::zeros(rows, cols),
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.c
    }

    pub fn into_matrix(self) -> Mat {
        self.c
    }
}

/// Euclidean projection onto `{C : ‖C‖₂ ≤ 1 − delta}` by clamping singular
/// values.
pub fn project_contraction(c: &Mat, delta: f64) -> ContractionPoint {
    let limit = 1.0 - delta;
    if c.is_empty() || linalg::spectral_norm(c) <= limit {
        return ContractionPoint { c: c.clone() };
    }
    let (u, s, v) = linalg::svd(c);
    let s = s.map(|s| s.min(limit));
    ContractionPoint {
        c: u * Mat::from_diagonal(&s) * v.transpose(),
    }
}

/// Rescales `c` to spectral norm `norm`; the zero matrix is returned as is.
pub fn normalize_to_norm(c: &Mat, norm: f64) -> Mat {
    let s = linalg::spectral_norm(c);
    if s == 0.0 {
        c.clone()
    } else {
        c * (norm / s)
    }
}
