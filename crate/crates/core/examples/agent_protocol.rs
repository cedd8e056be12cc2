//! Three agents exchanging beliefs only when one measures another; prints
//! the message trace as newline-delimited JSON.
//!
//! cargo run --release --example agent_protocol

use cooploc::fusion::FusionConfig;
use cooploc::linalg::Vec;
use cooploc::motion::{NoiseModel, UnicycleInput};
use cooploc::protocol::{write_trace, AgentConfig, AgentRuntime, StepEvents, World};
use cooploc::{Belief, CovarianceMatrix, FusionMethod, MeasurementKind, Pose2D, RelativeMeasurement};

fn main() -> cooploc::Result<()> {
    let noise = NoiseModel::new(0.2, 0.2, 0.01, 0.01);
    let agents = (0..3)
        .map(|k| {
            let bel = Belief::from_pose(
                k,
                Pose2D::new(3.0 * k as f64, 0.0, 0.0),
                CovarianceMatrix::from_diagonal(&[0.01, 0.01, 0.001])?,
                0,
            )?;
            Ok(AgentRuntime::new(bel, AgentConfig::new(noise, Some(FusionMethod::Dmv), FusionConfig::default())))
        })
        .collect::<cooploc::Result<_>>()?;
    let mut world = World::new(agents);
    let u = vec![UnicycleInput::new(0.5, 0.0, 0.5); 3];
    let range = |obs: usize, tgt: usize, z: f64, t: usize| {
        RelativeMeasurement::new(obs, tgt, MeasurementKind::RelativeRange, Vec::from_element(1, z), CovarianceMatrix::from_diagonal(&[0.01]).unwrap(), t).unwrap()
    };
    for t in 1..=6 {
        let mut events = vec![StepEvents::default(); 3];
        if t % 2 == 0 {
            events[0].relative.push(range(0, 1, 3.0, t));
            events[0].relative.push(range(0, 2, 6.0, t));
        }
        if t == 5 {
            events[2].relative.push(range(2, 1, 3.0, t));
        }
        let rep = world.step(&u, &events)?;
        println!("t={t}: {} messages, {} events, {} updates", rep.messages, rep.processed_events, rep.updates.len());
    }
    println!("total messages {}", world.total_messages());
    write_trace(&world.trace, std::io::stdout().lock())?;
    for b in world.beliefs() {
        println!("agent {}: trace P = {:.5}", b.agent_id, b.cov.trace());
    }
    Ok(())
}
