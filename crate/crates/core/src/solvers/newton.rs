//! Log-barrier Newton refinement over the contraction ball
//! `{C : ‖C‖₂ < ρ}`, for concave objectives that first-order ascent
//! approaches too slowly.
//!
//! The barrier `μ log det(ρ² I − CᵀC)` is concave; at its maximizer the
//! Frank–Wolfe gap of the original problem is at most `μ · cols(C)`.

use nalgebra::Cholesky;

use crate::linalg::{self, Mat, Vec};

pub(crate) struct NewtonSettings {
    pub rho: f64,
    pub max_iters: usize,
    /// Target for `gap`.
    pub tol: f64,
}

pub(crate) struct NewtonOutcome {
    pub c: Mat,
    pub iters: usize,
}

fn vec_of(m: &Mat) -> Vec {
    Vec::from_column_slice(m.as_slice())
}

fn mat_of(v: &Vec, rows: usize, cols: usize) -> Mat {
    Mat::from_column_slice(rows, cols, v.as_slice())
}

fn barrier(c: &Mat, rho: f64) -> Option<f64> {
    let g = Mat::identity(c.ncols(), c.ncols()) * (rho * rho) - c.transpose() * c;
    linalg::spd_logdet(&g)
}

fn barrier_gradient(c: &Mat, rho: f64) -> Option<Mat> {
    let g = Mat::identity(c.ncols(), c.ncols()) * (rho * rho) - c.transpose() * c;
    linalg::spd_inverse(&g).map(|inv| c * inv * -2.0)
}

/// Hessian of the barrier, column `k` being the derivative of the gradient
/// along the `k`-th entry of `C` (column-major).
fn barrier_hessian(c: &Mat, rho: f64) -> Option<Mat> {
    let (rows, cols) = c.shape();
    let g = Mat::identity(cols, cols) * (rho * rho) - c.transpose() * c;
    let g_inv = linalg::spd_inverse(&g)?;
    let n = c.len();
    let mut hess = Mat::zeros(n, n);
    for k in 0..n {
        let mut e = Mat::zeros(rows, cols);
        e[k] = 1.0;
        let sym = e.transpose() * c + c.transpose() * &e;
        let d = &e * &g_inv * -2.0 - c * &g_inv * sym * &g_inv * 2.0;
        hess.set_column(k, &vec_of(&d));
    }
    Some(linalg::symmetrize(&hess))
}

/// Hessian of a function from its gradient by central differences.
fn fd_hessian(grad: &dyn Fn(&Mat) -> Option<Mat>, c: &Mat) -> Option<Mat> {
    let n = c.len();
    let h = 1e-5 * (1.0 + c.norm());
    let mut hess = Mat::zeros(n, n);
    let mut probe = c.clone();
    for k in 0..n {
        let orig = probe[k];
        probe[k] = orig + h;
        let up = grad(&probe)?;
        probe[k] = orig - h;
        let down = grad(&probe)?;
        probe[k] = orig;
        hess.set_column(k, &((vec_of(&up) - vec_of(&down)) / (2.0 * h)));
    }
    Some(linalg::symmetrize(&hess))
}

/// Newton direction for maximizing with gradient `g` and Hessian `hess`,
/// regularized until `−hess` factors.
fn ascent_direction(hess: &Mat, g: &Vec) -> Vec {
    let n = g.len();
    let neg = -hess;
    let scale = linalg::max_abs(&neg).max(1e-300);
    let mut lambda = 0.0;
    loop {
        let m = &neg + Mat::identity(n, n) * lambda;
        if let Some(ch) = Cholesky::new(m) {
            return ch.solve(g);
        }
        lambda = if lambda == 0.0 { 1e-12 * scale } else { lambda * 10.0 };
    }
}

/// Maximizes `f` over the open ball, starting from a strictly interior `c0`,
/// until `gap(C) ≤ tol` or the iteration budget runs out.
pub(crate) fn barrier_newton(
    f: &dyn Fn(&Mat) -> Option<f64>,
    grad: &dyn Fn(&Mat) -> Option<Mat>,
    gap: &dyn Fn(&Mat) -> f64,
    c0: Mat,
    s: &NewtonSettings,
) -> NewtonOutcome {
    let (rows, cols) = c0.shape();
    let rho = s.rho;
    let mut c = c0;
    let mut iters = 0;
    let mut mu = (gap(&c) / cols.max(1) as f64).max(s.tol * 1e-3);

    let phi = |c: &Mat, mu: f64| -> Option<f64> { Some(f(c)? + mu * barrier(c, rho)?) };
    let dphi = |c: &Mat, mu: f64| -> Option<Mat> { Some(grad(c)? + barrier_gradient(c, rho)? * mu) };

    while iters < s.max_iters {
        if gap(&c) <= s.tol {
            break;
        }
        // centering at the current μ
        let mut centered = false;
        while iters < s.max_iters {
            let (Some(g), Some(h_f), Some(h_b)) = (dphi(&c, mu), fd_hessian(grad, &c), barrier_hessian(&c, rho)) else {
                return NewtonOutcome { c, iters };
            };
            let hess = h_f + h_b * mu;
            let gv = vec_of(&g);
            let d = ascent_direction(&hess, &gv);
            let decrement = gv.dot(&d);
            iters += 1;
            // interior optima need the gradient itself below tol, not just
            // a small predicted increase
            let floor = (1e-3 * s.tol * s.tol).max(1e-15 * (1.0 + f(&c).unwrap_or(0.0).abs()));
            if !(decrement > floor) {
                centered = true;
                break;
            }
            let Some(base) = phi(&c, mu) else {
                return NewtonOutcome { c, iters };
            };
            let dm = mat_of(&d, rows, cols);
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-12 {
                let trial = &c + &dm * t;
                if linalg::spectral_norm(&trial) < rho {
                    if let Some(v) = phi(&trial, mu) {
                        if v >= base + 1e-4 * t * decrement {
                            c = trial;
                            moved = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !moved {
                centered = true;
                break;
            }
        }
        if !centered && iters >= s.max_iters {
            break;
        }
        if gap(&c) <= s.tol {
            break;
        }
        mu *= 0.1;
        if mu < 1e-18 {
            break;
        }
    }
    NewtonOutcome { c, iters }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_objective_reaches_boundary_certificate() {
        // maximize <W, C>: optimum ρ·UVᵀ, gap = 2(ρ‖W‖_* − <W, C>)
        let w = Mat::from_row_slice(2, 2, &[1.0, 0.5, -0.2, 0.3]);
        let rho = 1.0 - 1e-6;
        let f = |c: &Mat| Some(w.dot(c));
        let grad = |_: &Mat| Some(w.clone());
        let gap = |c: &Mat| 2.0 * (rho * linalg::nuclear_norm(&w) - w.dot(c));
        let out = barrier_newton(&f, &grad, &gap, Mat::zeros(2, 2), &NewtonSettings { rho, max_iters: 200, tol: 1e-9 });
        assert!(gap(&out.c) <= 1e-9, "{}", gap(&out.c));
        assert!(linalg::spectral_norm(&out.c) < rho);
    }
}
