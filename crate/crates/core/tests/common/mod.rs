#![allow(dead_code)]

use cooploc::fusion::RelativeModel;
use cooploc::linalg::{Mat, Vec};
use cooploc::local_filter::{range_measurement_model, Landmark};
use cooploc::motion::{propagate_state, propagation_jacobians, UnicycleInput};
use cooploc::{wrap_angle, MeasurementKind, Pose2D};
use cooploc::sim::scenario::{AgentSpec, NoiseSpec, RelativeSchedule, Segment, Steps};
use cooploc::sim::Scenario;
use rand::Rng;

pub const FD_STEP: f64 = 1e-6;

/// Central-difference Jacobian of `f` at `x`; rows listed in `angles` are
/// differenced modulo 2π.
pub fn fd_jacobian(f: &dyn Fn(&Vec) -> Vec, x: &Vec, angles: &[usize]) -> Mat {
    let m = f(x).len();
    let mut jac = Mat::zeros(m, x.len());
    for k in 0..x.len() {
        let mut up = x.clone();
        let mut down = x.clone();
        up[k] += FD_STEP;
        down[k] -= FD_STEP;
        let mut d = f(&up) - f(&down);
        for &a in angles {
            d[a] = wrap_angle(d[a]);
        }
        jac.set_column(k, &(d / (2.0 * FD_STEP)));
    }
    jac
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

pub fn random_pose<R: Rng>(rng: &mut R) -> Pose2D {
    Pose2D::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-3.1..3.1))
}

/// Pose pair at least 0.5 m apart.
pub fn random_pair<R: Rng>(rng: &mut R) -> (Pose2D, Pose2D) {
    loop {
        let (a, b) = (random_pose(rng), random_pose(rng));
        if (a.x - b.x).hypot(a.y - b.y) > 0.5 {
            return (a, b);
        }
    }
}

fn pose_of(v: &Vec) -> Pose2D {
    Pose2D::new(v[0], v[1], v[2])
}

/// Worst absolute deviation between analytic and central-difference
/// Jacobians of the motion model over `n` random states and inputs.
pub fn motion_jacobian_error<R: Rng>(n: usize, rng: &mut R) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..n {
        let x = random_pose(rng);
        let u = UnicycleInput::new(rng.random_range(-1.0..2.0), rng.random_range(-1.0..1.0), rng.random_range(0.05..1.0));
        let (f_x, f_u) = propagation_jacobians(&x, &u);
        let fx = fd_jacobian(&|v| propagate_state(&pose_of(v), &u).to_vector(), &x.to_vector(), &[2]);
        let uv = Vec::from_vec(vec![u.v, u.omega]);
        let fu = fd_jacobian(
            &|w| propagate_state(&x, &UnicycleInput::new(w[0], w[1], u.dt)).to_vector(),
            &uv,
            &[2],
        );
        worst = worst.max(max_abs(&(f_x - fx))).max(max_abs(&(f_u - fu)));
    }
    worst
}

/// Same for one relative-measurement kind, both Jacobian blocks.
pub fn relative_jacobian_error<R: Rng>(kind: MeasurementKind, n: usize, rng: &mut R) -> f64 {
    let model = RelativeModel::new(kind);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let (xi, xj) = random_pair(rng);
        let (_, jac) = model.evaluate(&xi, &xj).expect("separated");
        let hi = fd_jacobian(&|v| model.evaluate(&pose_of(v), &xj).unwrap().0, &xi.to_vector(), kind.angle_components());
        let hj = fd_jacobian(&|v| model.evaluate(&xi, &pose_of(v)).unwrap().0, &xj.to_vector(), kind.angle_components());
        worst = worst.max(max_abs(&(jac.h_ii - hi))).max(max_abs(&(jac.h_ij - hj)));
    }
    worst
}

/// Same for the landmark range.
pub fn range_jacobian_error<R: Rng>(n: usize, rng: &mut R) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..n {
        let (x, l) = random_pair(rng);
        let lm = Landmark { id: 0, x: l.x, y: l.y };
        let (_, h) = range_measurement_model(&x, &lm).unwrap();
        let fd = fd_jacobian(
            &|v| Vec::from_element(1, range_measurement_model(&pose_of(v), &lm).unwrap().0),
            &x.to_vector(),
            &[],
        );
        worst = worst.max(max_abs(&(h - fd)));
    }
    worst
}

/// `n` robots side by side on identical loops, each ranging its successor in two
/// windows.
pub fn team_scenario(n: usize) -> Scenario {
    let mut sc = Scenario::builtin();
    sc.name = format!("team-{n}");
    sc.horizon = 60;
    sc.absolute.clear();
    sc.landmarks.clear();
    sc.agents = (0..n)
        .map(|k| AgentSpec {
            id: k,
            initial_pose: [2.0 * k as f64, 0.0, 90.0],
            initial_std: [0.05, 0.05, 1.0],
            noise: NoiseSpec {
                v_frac: 0.2,
                omega_frac: 0.2,
                v_floor: 0.005,
                omega_floor_deg: 0.2,
            },
            gamma: Default::default(),
            trajectory: vec![Segment {
                duration: 30.0,
                v: 0.3,
                omega_deg: 6.0,
            }],
        })
        .collect();
    sc.relative = (0..n)
        .flat_map(|k| {
            let target = (k + 1) % n;
            [(10 + k, 12 + k), (40 + k, 41 + k)].map(|(from, to)| RelativeSchedule {
                observer: k,
                target,
                steps: Steps::Range { from, to, every: 1 },
                kind: "relative-range".into(),
                std: vec![0.1],
            })
        })
        .collect();
    sc
}

