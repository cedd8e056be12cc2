//! Cross-block estimate that maximizes the determinant of the marginal
//! information-form update, solved directly over the contraction ball.

use crate::error::{Error, Result};
use crate::fusion::config::{AscentConfig, GradientMode};
use crate::fusion::pair::PairProblem;
use crate::linalg::{self, Mat};

use super::ascent::{fd_gradient, projected_ascent, AscentSettings};
use super::newton::{barrier_newton, NewtonSettings};

#[derive(Debug, Clone)]
pub struct LogDetMax {
    pub x_star: Mat,
    pub c_star: Mat,
    /// `det P(K(X*), X*)`.
    pub value: f64,
    pub log_value: f64,
    pub iters: usize,
}

/// `log det` of the own marginal of `(P_J(X)⁻¹ + Hᵀ R⁻¹ H)⁻¹`, which equals
/// the EMV covariance at the hypothesized cross block.
pub fn logdet_objective(problem: &PairProblem, c: &Mat) -> Option<f64> {
    let x = problem.cross_from_contraction(c);
    let (_, p) = problem.emv(&x).ok()?;
    linalg::spd_logdet(&p)
}

/// Analytic gradient of [`logdet_objective`] with respect to `C`.
pub fn logdet_gradient(problem: &PairProblem, c: &Mat) -> Option<Mat> {
    let x = problem.cross_from_contraction(c);
    let (k, p) = problem.emv(&x).ok()?;
    let p_inv = linalg::spd_inverse(&p)?;
    let (a1, a2) = problem.gain_blocks(&k);
    let g_x = a1.transpose() * p_inv * a2 * 2.0;
    let (sa, sb) = problem.factors();
    Some(sa.transpose() * g_x * sb)
}

/// Newton budget when projected ascent stops short of the certificate.
const POLISH_ITERS: usize = 200;
/// Certificate targeted by the polish, in log-det units.
const POLISH_GAP: f64 = 1e-8;
/// Certificate required when the ascent hit its iteration cap.
const ACCEPT_GAP: f64 = 1e-6;

/// Upper bound on `max f − f(C)` over the ball of radius `rho`, from
/// concavity: `rho ‖∇f‖_* − ⟨∇f, C⟩`.
pub fn logdet_gap(problem: &PairProblem, c: &Mat, rho: f64) -> f64 {
    match logdet_gradient(problem, c) {
        Some(g) => (rho * linalg::nuclear_norm(&g) - g.dot(c)).max(0.0),
        None => f64::INFINITY,
    }
}

fn require_pd(m: &Mat) -> Result<()> {
    if m.clone().cholesky().is_some() && linalg::min_eigenvalue(m) > 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateBelief)
    }
}

pub fn logdet_max(problem: &PairProblem, delta: f64, cfg: &AscentConfig) -> Result<LogDetMax> {
    require_pd(&problem.p_own)?;
    require_pd(&problem.p_other)?;
    let f = |c: &Mat| logdet_objective(problem, c);
    let grad = |c: &Mat, f0: f64| match cfg.gradient {
        GradientMode::FiniteDifference => fd_gradient(&f, c, f0),
        GradientMode::Analytic => logdet_gradient(problem, c).unwrap_or_else(|| Mat::zeros(c.nrows(), c.ncols())),
    };
    let out = projected_ascent(
        &f,
        &grad,
        &mut |_, _| false,
        Mat::zeros(problem.n_own(), problem.n_other()),
        &AscentSettings {
            delta,
            max_iters: cfg.max_iters,
            // log det differences are relative det improvements
            stall_tol: cfg.rel_tol,
            stall_iters: cfg.stall_iters,
        },
    );
    if !out.value.is_finite() {
        return Err(Error::SolverNotConverged { best: out.value, iters: out.iters });
    }
    let (mut c, mut value, mut iters) = (out.c, out.value, out.iters);
    let rho = 1.0 - delta;
    let gap = |c: &Mat| logdet_gap(problem, c, rho);
    if gap(&c) > POLISH_GAP {
        let mut start = c.clone();
        let inner = rho * (1.0 - 1e-3);
        let norm = linalg::spectral_norm(&start);
        if norm > inner {
            start *= inner / norm;
        }
        let polished = barrier_newton(
            &f,
            &|c: &Mat| logdet_gradient(problem, c),
            &gap,
            start,
            &NewtonSettings {
                rho,
                max_iters: POLISH_ITERS,
                tol: POLISH_GAP,
            },
        );
        iters += polished.iters;
        if let Some(v) = f(&polished.c).filter(|v| *v >= value) {
            c = polished.c;
            value = v;
        }
        if !out.converged && gap(&c) > ACCEPT_GAP {
            return Err(Error::SolverNotConverged { best: value.exp(), iters });
        }
    }
    Ok(LogDetMax {
        x_star: problem.cross_from_contraction(&c),
        value: value.exp(),
        log_value: value,
        c_star: c,
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
    fn scalar_s1_goes_to_positive_boundary() {
        let p = scalar(1.0, 1.0, -1.0, 1.0, 1.0);
        let out = logdet_max(&p, 1e-6, &AscentConfig::default()).unwrap();
        assert!((out.x_star[(0, 0)] - (1.0 - 1e-6)).abs() < 1e-9);
        let x = out.x_star[(0, 0)];
        let g = (2.0 - x * x) / (3.0 - 2.0 * x);
        assert!((out.value - g).abs() < 1e-12);
        assert!((out.value - 1.0).abs() < 1e-5);
    }

    #[test]
    fn flat_objective_keeps_seed() {
        let p = scalar(1.0, 2.0, -1.0, 0.0, 1.0);
        let out = logdet_max(&p, 1e-6, &AscentConfig::default()).unwrap();
        assert_eq!(out.x_star[(0, 0)], 0.0);
        assert_eq!(out.iters, 0);
    }

    #[test]
    fn singular_belief_rejected() {
        let p = scalar(1.0, 0.0, -1.0, 1.0, 1.0);
        assert!(matches!(
            logdet_max(&p, 1e-6, &AscentConfig::default()),
            Err(Error::DegenerateBelief)
        ));
    }

    #[test]
    fn analytic_gradient_matches_fd() {
        let a = Mat::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.1, 0.8, 0.3, 0.0, 0.2, 0.5]);
        let b = Mat::from_row_slice(3, 3, &[0.6, 0.0, 0.1, 0.3, 0.9, 0.0, 0.2, 0.1, 0.4]);
        let p = PairProblem::new(
            &a * a.transpose() + Mat::identity(3, 3) * 0.1,
            &b * b.transpose() + Mat::identity(3, 3) * 0.1,
            Mat::from_row_slice(1, 3, &[-0.6, -0.8, 0.0]),
            Mat::from_row_slice(1, 3, &[0.6, 0.8, 0.0]),
            Mat::from_element(1, 1, 0.04),
        )
        .unwrap();
        let c = Mat::from_row_slice(3, 3, &[0.2, -0.1, 0.0, 0.05, 0.3, 0.1, -0.2, 0.0, 0.1]);
        let f = |c: &Mat| logdet_objective(&p, c);
        let fd = fd_gradient(&f, &c, f(&c).unwrap());
        let an = logdet_gradient(&p, &c).unwrap();
        assert!(linalg::max_abs(&(fd - an)) < 1e-6);
    }
}
