//! Every relative update rule on one random relative-pose instance, next to
//! the joint EKF that knows the hidden cross-covariance.
//!
//! cargo run --release --example fusion_methods

use cooploc::fusion::{emv_update, joint_oracle_update, update, FusionConfig, Side};
use cooploc::instances::{random_cross, random_instance, rng_for};
use cooploc::{FusionMethod, JointBelief, MeasurementKind};

fn main() -> cooploc::Result<()> {
    let mut rng = rng_for(42);
    let inst = random_instance(MeasurementKind::RelativePose, &mut rng);
    let hidden = random_cross(inst.bel_i.cov.matrix(), inst.bel_j.cov.matrix(), &mut rng);
    let cfg = FusionConfig::default();

    println!("prior      trace {:.6}  det {:.3e}", inst.bel_i.cov.trace(), inst.bel_i.cov.det());
    for method in [FusionMethod::Naive, FusionMethod::Dmv, FusionMethod::Ecmv, FusionMethod::Pecmv] {
        let out = update(method, Side::Observer, &inst.bel_i, &inst.bel_j, &inst.meas, &cfg)?;
        let extra = match (out.omega_star, &out.x_star) {
            (Some(w), _) => format!("omega* = {w:.4}"),
            (_, Some(x)) => format!("|X*|_F = {:.4}", x.norm()),
            _ => String::new(),
        };
        println!(
            "{:<10} trace {:.6}  det {:.3e}  iters {:>4}  {}",
            method.name(),
            out.belief.cov.trace(),
            out.belief.cov.det(),
            out.solver_iters,
            extra
        );
    }

    let emv = emv_update(&inst.bel_i, &inst.bel_j, &hidden, &inst.meas)?;
    let joint = joint_oracle_update(&JointBelief::new(&inst.bel_i, &inst.bel_j, Some(hidden))?, &inst.meas)?;
    println!("emv        trace {:.6}  (cross block known)", emv.belief.cov.trace());
    println!("joint      trace {:.6}  (observer block of the joint EKF)", joint.p_i.trace());
    Ok(())
}
