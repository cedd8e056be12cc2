//! Dense small-matrix helpers shared by the filters and solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Mat = DMatrix<f64>;
pub type Vec = DVector<f64>;

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Inverse of a symmetric positive definite matrix, `None` if the Cholesky
/// factorization fails.
pub fn spd_inverse(m: &Mat) -> Option<Mat> {
    let chol = symmetrize(m).cholesky()?;
    Some(symmetrize(&chol.inverse()))
}

/// `log det` of a symmetric positive definite matrix; `+inf`-safe callers
/// should treat `None` as an infeasible point.
pub fn spd_logdet(m: &Mat) -> Option<f64> {
    let chol = symmetrize(m).cholesky()?;
    let l = chol.l();
    Some(2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Symmetric PSD square root `V sqrt(max(Λ,0)) Vᵀ`.
pub fn psd_sqrt(m: &Mat) -> Mat {
    let eig = SymmetricEigen::new(symmetrize(m));
    let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * Mat::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// 2-norm condition number of a symmetric matrix.
pub fn sym_condition(m: &Mat) -> f64 {
    let eig = SymmetricEigen::new(symmetrize(m));
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), l| {
            (lo.min(l.abs()), hi.max(l.abs()))
        });
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Thin singular value decomposition `m = U diag(s) Vᵀ` by one-sided Jacobi
/// rotations. Columns of `U` belonging to zero singular values are zero.
///
/// Used instead of the library SVD, whose singular vectors lose accuracy
/// when singular values nearly coincide.
pub fn svd(m: &Mat) -> (Mat, Vec, Mat) {
    if m.nrows() < m.ncols() {
        let (u, s, v) = svd(&m.transpose());
        return (v, s, u);
    }
    let n = m.ncols();
    let mut a = m.clone();
    let mut v = Mat::identity(n, n);
    for _ in 0..64 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for r in 0..mat.nrows() {
                        let (xp, xq) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = c * xp - s * xq;
                        mat[(r, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let s = Vec::from_iterator(n, (0..n).map(|k| a.column(k).norm()));
    let mut u = Mat::zeros(m.nrows(), n);
    for k in 0..n {
        if s[k] > 0.0 {
            u.set_column(k, &(a.column(k) / s[k]));
        }
    }
    (u, s, v)
}

pub fn singular_values(m: &Mat) -> Vec {
    if m.is_empty() {
        return Vec::zeros(0);
    }
    svd(m).1
}

pub fn spectral_norm(m: &Mat) -> f64 {
    singular_values(m).iter().copied().fold(0.0, f64::max)
}

pub fn nuclear_norm(m: &Mat) -> f64 {
    singular_values(m).sum()
}

pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = Mat::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// `[[a, x], [xᵀ, b]]`.
pub fn joint(a: &Mat, x: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = Mat::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, m)).copy_from(x);
    out.view_mut((n, 0), (m, n)).copy_from(&x.transpose());
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// `[a b]` for matrices with equal row counts.
pub fn hstack(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Determinant through the eigenvalues of the symmetric part.
pub fn sym_det(m: &Mat) -> f64 {
    SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().product()
}
