//! The DMV weight ω on scalar problems: the objective profile and the
//! optimum chosen by the bracketed search.
//!
//! cargo run --release --example dmv_omega_search

use cooploc::fusion::dmv::{dmv_gain, dmv_objective};
use cooploc::fusion::{dmv_fuse, FusionConfig, GammaMode, Linearized, PairProblem};
use cooploc::linalg::{Mat, Vec};
use cooploc::{Belief, CovarianceMatrix};

fn scalar(pi: f64, pj: f64, r: f64) -> PairProblem {
    let m = |v| Mat::from_element(1, 1, v);
    PairProblem::new(m(pi), m(pj), m(-1.0), m(1.0), m(r)).expect("1x1")
}

fn main() -> cooploc::Result<()> {
    for (label, pi, pj, r) in [("equal", 1.0, 1.0, 1.0), ("informative partner", 1.0, 0.01, 0.01)] {
        let p = scalar(pi, pj, r);
        for mode in [GammaMode::One, GammaMode::OneMinusOmega] {
            let cfg = FusionConfig::default().with_gamma(mode);
            let own = Belief::new(0, Vec::zeros(1), CovarianceMatrix::new(p.p_own.clone())?, 0)?;
            let best = dmv_fuse(&Linearized::new(p.clone(), Vec::zeros(1), own), &cfg)?;
            println!("{label}, {mode:?}: omega* = {:.4}, P+ = {:.5}", best.omega_star.unwrap_or(f64::NAN), best.belief.cov.matrix()[(0, 0)]);
            for k in 0..=10 {
                let w = k as f64 / 10.0;
                let gain = dmv_gain(&p, w, mode, cfg.omega_eps).map(|g| g[(0, 0)]).unwrap_or(f64::NAN);
                println!("  omega {w:.1}  log P {:>9.5}  K {:>8.5}", dmv_objective(&p, w, &cfg), gain);
            }
        }
    }
    Ok(())
}
