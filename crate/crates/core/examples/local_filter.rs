//! Dead reckoning of one robot with a single landmark range fix halfway.
//!
//! cargo run --example local_filter

use cooploc::instances::rng_for;
use cooploc::local_filter::{abs_correct_belief, predict_belief, range_measurement_model, Landmark, ProcessNoise};
use cooploc::motion::{propagate_state, sample_noisy_input, NoiseModel, UnicycleInput};
use cooploc::{Belief, CovarianceMatrix, Pose2D};
use rand_distr::{Distribution, Normal};

fn main() -> cooploc::Result<()> {
    let mut rng = rng_for(5);
    let noise = NoiseModel::new(0.2, 0.2, 0.01, 0.005);
    let lm = Landmark { id: 0, x: 5.0, y: 5.0 };
    let mut truth = Pose2D::new(0.0, 0.0, 0.0);
    let mut bel = Belief::from_pose(0, truth, CovarianceMatrix::from_diagonal(&[1e-4, 1e-4, 1e-4])?, 0)?;
    let u = UnicycleInput::new(0.5, 0.1, 0.5);
    for t in 1..=80 {
        truth = propagate_state(&truth, &sample_noisy_input(&u, &noise, &mut rng));
        bel = predict_belief(&bel, &u, &noise, &ProcessNoise::default());
        if t == 40 {
            let (range, _) = range_measurement_model(&truth, &lm)?;
            let z = range + Normal::new(0.0, 0.2).unwrap().sample(&mut rng);
            bel = abs_correct_belief(&bel, z, &lm, 0.2)?;
            println!("t={t}: landmark range {z:.3} m");
        }
        if t % 10 == 0 {
            let e = ((bel.mean[0] - truth.x).powi(2) + (bel.mean[1] - truth.y).powi(2)).sqrt();
            println!("t={t:>2}  position error {e:.3} m  trace P {:.4}", bel.cov.trace());
        }
    }
    Ok(())
}
