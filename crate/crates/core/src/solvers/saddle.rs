//! Min-max of `Tr P(K, X)` over gains `K` and feasible cross blocks `X`.
//!
//! For fixed `X` the inner minimum is attained at the closed-form gain
//! `K(X)`, so the solver ascends `Tr P(K(X), X)` over the contraction ball.
//! For fixed `K`, `Tr P(K, X)` is linear in `X` and its maximum over the ball
//! is available in closed form, which gives an exact saddle-gap certificate.
//! A short projected-gradient phase is followed, when the gap is still open,
//! by log-barrier Newton steps.

use crate::error::{Error, Result};
use crate::fusion::config::{GradientMode, SaddleConfig};
use crate::fusion::pair::PairProblem;
use crate::linalg::{self, nuclear_norm, Mat};

use super::ascent::{fd_gradient, projected_ascent, AscentSettings};
use super::newton::{barrier_newton, NewtonSettings};

#[derive(Debug, Clone)]
pub struct SaddlePoint {
    pub k_star: Mat,
    pub x_star: Mat,
    pub c_star: Mat,
    /// `Tr P(K*, X*)`.
    pub value: f64,
    /// `max_X Tr P(K*, X) − Tr P(K*, X*)`.
    pub gap: f64,
    pub iters: usize,
}

pub fn trace_objective(problem: &PairProblem, c: &Mat) -> Option<f64> {
    let x = problem.cross_from_contraction(c);
    problem.emv(&x).ok().map(|(_, p)| p.trace())
}

/// `W = Aᵀ (I − K H_own)ᵀ (−K H_other) B`, so that
/// `Tr P(K, X(C)) = const + 2 ⟨W, C⟩`.
fn linear_term(problem: &PairProblem, k: &Mat) -> Mat {
    let (a1, a2) = problem.gain_blocks(k);
    let (sa, sb) = problem.factors();
    sa.transpose() * a1.transpose() * a2 * sb
}

pub fn trace_gradient(problem: &PairProblem, c: &Mat) -> Option<Mat> {
    let k = problem.gain(&problem.cross_from_contraction(c)).ok()?;
    Some(linear_term(problem, &k) * 2.0)
}

/// Largest `Tr P(K, X)` over `‖C‖₂ ≤ 1 − delta`, with a maximizing cross block.
pub fn worst_case_trace(problem: &PairProblem, k: &Mat, delta: f64) -> (f64, Mat) {
    let zero = problem.zero_cross();
    let base = problem.cov_for_gain(k, &zero).trace();
    let w = linear_term(problem, k);
    if w.is_empty() || w.norm() == 0.0 {
        return (base, zero);
    }
    let (u, _, v) = linalg::svd(&w);
    let c = u * v.transpose() * (1.0 - delta);
    (
        base + 2.0 * (1.0 - delta) * nuclear_norm(&w),
        problem.cross_from_contraction(&c),
    )
}

/// Saddle gap of gain `k` against the cross block `C`.
pub fn saddle_gap(problem: &PairProblem, k: &Mat, c: &Mat, delta: f64) -> f64 {
    let w = linear_term(problem, k);
    (2.0 * ((1.0 - delta) * nuclear_norm(&w) - w.dot(c))).max(0.0)
}

/// Projected-gradient iterations before switching to barrier Newton.
const GRADIENT_PHASE: usize = 50;

pub fn saddle_solve(problem: &PairProblem, delta: f64, cfg: &SaddleConfig) -> Result<SaddlePoint> {
    let tol = cfg.gap_rtol * problem.p_own.trace().abs().max(f64::MIN_POSITIVE);
    let f = |c: &Mat| trace_objective(problem, c);
    let grad = |c: &Mat| -> Option<Mat> {
        match cfg.gradient {
            GradientMode::FiniteDifference => Some(fd_gradient(&f, c, f(c)?)),
            GradientMode::Analytic => trace_gradient(problem, c),
        }
    };
    let gap_at = |c: &Mat| -> f64 {
        match problem.gain(&problem.cross_from_contraction(c)) {
            Ok(k) => saddle_gap(problem, &k, c, delta),
            Err(_) => f64::INFINITY,
        }
    };
    let mut done = |c: &Mat, _: f64| gap_at(c) <= tol;
    let out = projected_ascent(
        &f,
        &|c: &Mat, _: f64| grad(c).unwrap_or_else(|| Mat::zeros(c.nrows(), c.ncols())),
        &mut done,
        Mat::zeros(problem.n_own(), problem.n_other()),
        &AscentSettings {
            delta,
            max_iters: cfg.max_iters.min(GRADIENT_PHASE),
            stall_tol: 0.0,
            stall_iters: 0,
        },
    );
    let (mut c, mut iters) = (out.c, out.iters);
    if gap_at(&c) > tol && iters < cfg.max_iters {
        let rho = 1.0 - delta;
        let norm = linalg::spectral_norm(&c);
        let inner = rho * (1.0 - 1e-3);
        if norm > inner {
            c *= inner / norm;
        }
        let polished = barrier_newton(
            &f,
            &grad,
            &gap_at,
            c,
            &NewtonSettings {
                rho,
                max_iters: cfg.max_iters - iters,
                tol,
            },
        );
        c = polished.c;
        iters += polished.iters;
    }
    let x_star = problem.cross_from_contraction(&c);
    let k_star = problem.gain(&x_star)?;
    let gap = saddle_gap(problem, &k_star, &c, delta);
    if gap > tol {
        return Err(Error::SaddleNotConverged { gap, iters });
    }
    Ok(SaddlePoint {
        value: problem.cov_for_gain(&k_star, &x_star).trace(),
        k_star,
        x_star,
        c_star: c,
        gap,
        iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(pi: f64, pj: f64, hi: f64, hj: f64, r: f64) -> PairProblem {
        let m = |v| Mat::from_element(1, 1, v);
        PairProblem::new(m(pi), m(pj), m(hi), m(hj), m(r)).unwrap()
    }

    #[test]
    fn scalar_s1_worst_case_at_boundary() {
        let p = scalar(1.0, 1.0, -1.0, 1.0, 1.0);
        let out = saddle_solve(&p, 1e-6, &SaddleConfig::default()).unwrap();
        assert!((out.x_star[(0, 0)] - (1.0 - 1e-6)).abs() < 1e-6);
        assert!(out.k_star[(0, 0)].abs() < 1e-5);
        assert!(out.value >= 2.0 / 3.0 && out.value <= 1.0 + 1e-12);
    }

    #[test]
    fn collapsed_feasible_set() {
        let p = scalar(1.0, 1e-12, -1.0, 1.0, 1.0);
        let out = saddle_solve(&p, 1e-6, &SaddleConfig::default()).unwrap();
        assert!(out.x_star[(0, 0)].abs() < 1e-5);
        let (k0, p0) = p.emv(&p.zero_cross()).unwrap();
        assert!((out.k_star[(0, 0)] - k0[(0, 0)]).abs() < 1e-5);
        assert!((out.value - p0.trace()).abs() < 1e-5);
    }

    #[test]
    fn worst_case_dominates_samples() {
        let p = PairProblem::new(
            Mat::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]),
            Mat::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.7]),
            Mat::from_row_slice(1, 2, &[-0.6, -0.8]),
            Mat::from_row_slice(1, 2, &[0.6, 0.8]),
            Mat::from_element(1, 1, 0.1),
        )
        .unwrap();
        let k = Mat::from_row_slice(2, 1, &[-0.4, -0.3]);
        let (worst, x_worst) = worst_case_trace(&p, &k, 0.0);
        assert!((p.cov_for_gain(&k, &x_worst).trace() - worst).abs() < 1e-12);
        for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let c = Mat::from_row_slice(2, 2, &[t, 0.0, 0.0, -t]);
            let x = p.cross_from_contraction(&c);
            assert!(p.cov_for_gain(&k, &x).trace() <= worst + 1e-12);
        }
        assert!(linalg::max_abs(&x_worst) > 0.0);
    }
}
