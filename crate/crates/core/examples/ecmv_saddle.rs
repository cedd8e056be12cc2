//! The ECMV min-max: the saddle point, its duality gap, and the worst-case
//! trace of a few competing gains.
//!
//! cargo run --release --example ecmv_saddle

use cooploc::fusion::{linearize, FusionConfig, Side};
use cooploc::instances::instance_set;
use cooploc::solvers::{saddle_solve, worst_case_trace};

fn main() -> cooploc::Result<()> {
    let cfg = FusionConfig::default();
    for inst in instance_set(3, 21) {
        let lin = linearize(&inst.bel_i, &inst.bel_j, &inst.meas, Side::Observer)?;
        let p = &lin.problem;
        let sp = saddle_solve(p, cfg.psd_margin, &cfg.saddle)?;
        println!(
            "{}: value {:.6}  gap {:.2e}  iters {}",
            inst.meas.kind.name(),
            sp.value,
            sp.gap,
            sp.iters
        );
        let naive_gain = p.gain(&p.zero_cross())?;
        for (label, k) in [("K*", sp.k_star.clone()), ("naive K", naive_gain.clone()), ("0.5 K*", &sp.k_star * 0.5)] {
            let (worst, _) = worst_case_trace(p, &k, cfg.psd_margin);
            println!("  worst-case trace with {label:<8} {worst:.6}");
        }
    }
    Ok(())
}
