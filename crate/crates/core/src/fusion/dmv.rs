//! Discorrelated minimum-variance update.
//!
//! The joint prior is replaced by `blockdiag(P_own/ω, P_other/(1−ω))`, which
//! bounds it from above for every feasible cross block, and `ω` is chosen to
//! minimize the resulting bound on the updated covariance.

use crate::error::Result;
use crate::linalg::{self, Mat};
use crate::solvers::scalar::{omega_search, ScalarSearchSpec};
use crate::types::{Belief, FusionMethod, FusionResult, RelativeMeasurement};

use super::config::{DmvObjective, FusionConfig, GammaMode};
use super::pair::{linearize, Linearized, PairProblem, Side};

fn gamma(mode: GammaMode, omega: f64) -> f64 {
    match mode {
        GammaMode::One => 1.0,
        GammaMode::OneMinusOmega => 1.0 - omega,
    }
}

/// `(1−ω) (H_o P_o H_oᵀ + (1−ω)/γ · R)⁻¹`, the information the measurement
/// contributes after the partner's share is inflated.
fn measurement_information(p: &PairProblem, omega: f64, mode: GammaMode) -> Option<Mat> {
    let m = &p.h_other * &p.p_other * p.h_other.transpose();
    let c = match mode {
        GammaMode::One => 1.0 - omega,
        GammaMode::OneMinusOmega => 1.0,
    };
    let inner = linalg::symmetrize(&(m + &p.r * c));
    linalg::spd_inverse(&inner).map(|inv| inv * (1.0 - omega))
}

/// `P̄(ω)` in information form. `None` when the bound is unbounded, which
/// happens at `ω = 0` if the measurement does not observe every own state.
pub fn dmv_covariance(p: &PairProblem, omega: f64, mode: GammaMode) -> Option<Mat> {
    if omega >= 1.0 {
        return Some(p.p_own.clone());
    }
    let own_info = linalg::spd_inverse(&p.p_own)?;
    let n_inv = measurement_information(p, omega, mode)?;
    let lambda = linalg::symmetrize(&(own_info * omega + p.h_own.transpose() * n_inv * &p.h_own));
    linalg::spd_inverse(&lambda).map(|m| linalg::symmetrize(&m))
}

fn information_gain(p: &PairProblem, omega: f64, mode: GammaMode) -> Option<Mat> {
    if omega >= 1.0 {
        return Some(Mat::zeros(p.n_own(), p.r.nrows()));
    }
    let cov = dmv_covariance(p, omega, mode)?;
    let n_inv = measurement_information(p, omega, mode)?;
    Some(cov * p.h_own.transpose() * n_inv)
}

/// `K̄(ω)`. Inside `[eps, 1 − eps]` this is the direct formula; closer to the
/// ends it switches to the information form, which has finite limits.
pub fn dmv_gain(p: &PairProblem, omega: f64, mode: GammaMode, eps: f64) -> Option<Mat> {
    if omega < eps || omega > 1.0 - eps {
        return information_gain(p, omega.clamp(0.0, 1.0), mode);
    }
    let own = &p.p_own / omega;
    let s = &p.h_own * &own * p.h_own.transpose()
        + &p.h_other * &p.p_other * p.h_other.transpose() / (1.0 - omega)
        + &p.r / gamma(mode, omega);
    let s_inv = linalg::spd_inverse(&linalg::symmetrize(&s))?;
    Some(own * p.h_own.transpose() * s_inv)
}

/// Upper bound on `P(K, X)` valid for every feasible `X`:
/// `A1 P_own A1ᵀ/ω + A2 P_other A2ᵀ/(1−ω) + K R Kᵀ/γ`.
pub fn dmv_bound_cov(p: &PairProblem, k: &Mat, omega: f64, mode: GammaMode) -> Mat {
    let (a1, a2) = p.gain_blocks(k);
    let out = &a1 * &p.p_own * a1.transpose() / omega
        + &a2 * &p.p_other * a2.transpose() / (1.0 - omega)
        + k * &p.r * k.transpose() / gamma(mode, omega);
    linalg::symmetrize(&out)
}

/// Value of the ω criterion; `+∞` where the bound is unbounded.
pub fn dmv_objective(p: &PairProblem, omega: f64, cfg: &FusionConfig) -> f64 {
    match dmv_covariance(p, omega, cfg.gamma_mode) {
        Some(cov) => match cfg.dmv_objective {
            DmvObjective::LogDet => linalg::spd_logdet(&cov).unwrap_or(f64::INFINITY),
            DmvObjective::Trace => cov.trace(),
        },
        None => f64::INFINITY,
    }
}

pub fn dmv_fuse(lin: &Linearized, cfg: &FusionConfig) -> Result<FusionResult> {
    let p = &lin.problem;
    let prior = |iters| FusionResult {
        belief: lin.own.clone(),
        gain: Mat::zeros(p.n_own(), p.r.nrows()),
        method: FusionMethod::Dmv,
        omega_star: Some(1.0),
        x_star: None,
        objective: dmv_objective(p, 1.0, cfg),
        solver_iters: iters,
    };
    if linalg::spd_inverse(&p.p_own).is_none() {
        return Ok(prior(0));
    }
    let objective = |w: f64| dmv_objective(p, w, cfg);
    let best = omega_search(&ScalarSearchSpec {
        objective: &objective,
        tol: cfg.omega_tol,
        max_iters: cfg.omega_max_iters,
    });
    let omega = best.omega;
    let (Some(cov), Some(k)) = (
        dmv_covariance(p, omega, cfg.gamma_mode),
        information_gain(p, omega, cfg.gamma_mode),
    ) else {
        return Ok(prior(best.evals));
    };
    Ok(FusionResult {
        belief: lin.updated_belief(&k, cov),
        gain: k,
        method: FusionMethod::Dmv,
        omega_star: Some(omega),
        x_star: None,
        objective: best.value,
        solver_iters: best.evals,
    })
}

pub fn dmv_update(bel_i: &Belief, bel_j: &Belief, meas: &RelativeMeasurement, cfg: &FusionConfig) -> Result<FusionResult> {
    dmv_fuse(&linearize(bel_i, bel_j, meas, Side::Observer)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(pi: f64, pj: f64, hi: f64, hj: f64, r: f64) -> PairProblem {
        let m = |v| Mat::from_element(1, 1, v);
        PairProblem::new(m(pi), m(pj), m(hi), m(hj), m(r)).unwrap()
    }

    fn fuse(p: PairProblem, cfg: &FusionConfig) -> FusionResult {
        let own = Belief::new(
            0,
            crate::linalg::Vec::zeros(p.n_own()),
            crate::types::CovarianceMatrix::new(p.p_own.clone()).unwrap(),
            0,
        )
        .unwrap();
        let innov = crate::linalg::Vec::zeros(p.r.nrows());
        dmv_fuse(&Linearized::new(p, innov, own), cfg).unwrap()
    }

    #[test]
    fn scalar_s1_keeps_prior() {
        let out = fuse(scalar(1.0, 1.0, -1.0, 1.0, 1.0), &FusionConfig::default());
        assert_eq!(out.omega_star, Some(1.0));
        assert_eq!(out.gain[(0, 0)], 0.0);
        assert_eq!(out.belief.cov.matrix()[(0, 0)], 1.0);
    }

    #[test]
    fn scalar_s2_boundary_at_zero() {
        let out = fuse(scalar(1.0, 0.01, -1.0, 1.0, 0.01), &FusionConfig::default());
        assert_eq!(out.omega_star, Some(0.0));
        assert!((out.belief.cov.matrix()[(0, 0)] - 0.02).abs() < 1e-12);
        assert!((out.gain[(0, 0)] + 1.0).abs() < 1e-12);
        let p = scalar(1.0, 0.01, -1.0, 1.0, 0.01);
        let k = dmv_gain(&p, 1e-6, GammaMode::One, 1e-9).unwrap();
        assert!((k[(0, 0)] + 1.0).abs() < 1e-4);
        let bound = p.cov_for_gain(&out.gain, &p.zero_cross());
        assert!((bound[(0, 0)] - 0.02).abs() < 1e-12);
    }

    #[test]
    fn gain_vanishes_at_one() {
        let p = scalar(1.0, 0.5, -1.0, 1.0, 0.2);
        assert_eq!(dmv_gain(&p, 1.0, GammaMode::One, 1e-6).unwrap()[(0, 0)], 0.0);
        let near = dmv_gain(&p, 1.0 - 1e-7, GammaMode::One, 1e-9).unwrap()[(0, 0)];
        assert!(near.abs() < 1e-5);
    }

    #[test]
    fn inverse_form_matches_bound_at_gain() {
        let p = PairProblem::new(
            Mat::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.1, 0.4, 0.05, 0.0, 0.05, 0.1]),
            Mat::from_row_slice(3, 3, &[0.3, -0.05, 0.0, -0.05, 0.6, 0.0, 0.0, 0.0, 0.2]),
            Mat::from_row_slice(1, 3, &[-0.6, -0.8, 0.0]),
            Mat::from_row_slice(1, 3, &[0.6, 0.8, 0.0]),
            Mat::from_element(1, 1, 0.04),
        )
        .unwrap();
        for mode in [GammaMode::One, GammaMode::OneMinusOmega] {
            for w in [0.05, 0.3, 0.7, 0.95] {
                let k = dmv_gain(&p, w, mode, 1e-6).unwrap();
                let bound = dmv_bound_cov(&p, &k, w, mode);
                let inv = dmv_covariance(&p, w, mode).unwrap();
                assert!(linalg::max_abs(&(bound - &inv)) < 1e-9 * linalg::max_abs(&inv));
                let k_info = information_gain(&p, w, mode).unwrap();
                assert!(linalg::max_abs(&(k - k_info)) < 1e-9);
            }
        }
        assert!(dmv_covariance(&p, 0.0, GammaMode::One).is_none());
    }
}
