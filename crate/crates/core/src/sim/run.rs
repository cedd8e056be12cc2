//! Ground truth, measurement synthesis and Monte Carlo execution.
//!
//! Each run draws one ground truth (true starts, noisy inputs, process noise
//! and every measurement) and replays it through all requested methods, so
//! compared methods see identical data.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fusion::emv::joint_ekf_update;
use crate::fusion::models::RelativeModel;
use crate::instances::{rng_for, sample_gaussian};
use crate::linalg::{self, Mat, Vec as DVec};
use crate::local_filter::{range_measurement_model, ProcessNoise};
use crate::motion::{propagate_state, propagation_jacobians, sample_noisy_input, UnicycleInput};
use crate::protocol::{AbsoluteEvent, AgentConfig, AgentRuntime, StepEvents, TraceRecord, World};
use crate::types::{wrap_angle, Belief, Pose2D, RelativeMeasurement};

use super::scenario::{Method, Scenario};

/// Seed of run `run` under master seed `master` (SplitMix64 finalizer).
pub fn run_seed(master: u64, run: usize) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    mix(master ^ mix(run as u64))
}

/// One run's shared data. Step `t` goes from `t − 1` to `t`; `commands[t-1]`
/// drives it and `events[t]` are the measurements taken at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// `[t][agent]` for `t = 0..=horizon`.
    pub poses: Vec<Vec<Pose2D>>,
    pub commands: Vec<Vec<UnicycleInput>>,
    /// `[t][agent]`; index 0 is empty.
    pub events: Vec<Vec<StepEvents>>,
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn generate_truth(sc: &Scenario, seed: u64) -> Result<GroundTruth> {
    let mut rng = rng_for(seed);
    let n = sc.agents.len();
    let q_std = sc.process_noise.sqrt();
    let start: Vec<Pose2D> = sc
        .agents
        .iter()
        .map(|a| Pose2D::from_vector(&(a.initial_pose().to_vector() + sample_gaussian(a.initial_cov().matrix(), &mut rng))))
        .collect();
    let mut poses = vec![start];
    let mut commands = Vec::with_capacity(sc.horizon);
    let mut events = vec![vec![StepEvents::default(); n]];
    for t in 1..=sc.horizon {
        let prev = &poses[t - 1];
        let mut now = Vec::with_capacity(n);
        let mut cmds = Vec::with_capacity(n);
        for (a, x) in sc.agents.iter().zip(prev) {
            let u = a.command(t - 1, sc.dt);
            let noisy = sample_noisy_input(&u, &a.noise.model(), &mut rng);
            let p = propagate_state(x, &noisy);
            now.push(Pose2D::new(
                p.x + q_std * normal(&mut rng),
                p.y + q_std * normal(&mut rng),
                p.phi() + q_std * normal(&mut rng),
            ));
            cmds.push(u);
        }
        let mut step_events = vec![StepEvents::default(); n];
        for e in sc.absolute.iter().filter(|e| e.steps.contains(t)) {
            let k = sc.agent_index(e.agent).expect("validated agent");
            let lm = *sc.landmark(e.landmark).expect("validated landmark");
            let (range, _) = range_measurement_model(&now[k], &lm)?;
            step_events[k].absolute.push(AbsoluteEvent {
                landmark: lm,
                z: range + e.r_std * normal(&mut rng),
                r_std: e.r_std,
            });
        }
        for e in sc.relative.iter().filter(|e| e.steps.contains(t)) {
            let (i, j) = (sc.agent_index(e.observer).expect("validated"), sc.agent_index(e.target).expect("validated"));
            let kind = e.kind()?;
            let r = e.noise()?;
            let (z_true, _) = RelativeModel::new(kind).evaluate(&now[i], &now[j])?;
            let mut z = z_true + sample_gaussian(r.matrix(), &mut rng);
            for &c in kind.angle_components() {
                z[c] = wrap_angle(z[c]);
            }
            step_events[i]
                .relative
                .push(RelativeMeasurement::new(e.observer, e.target, kind, z, r, t)?);
        }
        poses.push(now);
        commands.push(cmds);
        events.push(step_events);
    }
    Ok(GroundTruth { poses, commands, events })
}

/// Estimated pose and covariance (upper triangle, row-major).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub pose: Pose2D,
    pub cov: [f64; 6],
}

impl Estimate {
    pub fn new(pose: Pose2D, cov: &Mat) -> Self {
        Self {
            pose,
            cov: [cov[(0, 0)], cov[(0, 1)], cov[(0, 2)], cov[(1, 1)], cov[(1, 2)], cov[(2, 2)]],
        }
    }

    pub fn from_belief(b: &Belief) -> Self {
        Self::new(b.pose(), b.cov.matrix())
    }

    pub fn position_cov(&self) -> [[f64; 2]; 2] {
        [[self.cov[0], self.cov[1]], [self.cov[1], self.cov[3]]]
    }
}

/// A covariance snapshot taken right after an update.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub agent: usize,
    pub t: usize,
    /// `observer`, `target`, or `relative` for the joint filter.
    pub event: &'static str,
    pub det_cov: f64,
    pub trace_cov: f64,
}

/// One method's estimates over one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub method: Method,
    /// `[t][agent]`
    pub est: Vec<Vec<Estimate>>,
    pub events: Vec<EventRow>,
    pub messages: usize,
    pub processed_events: usize,
    pub updates: usize,
    pub solver_iters: usize,
    pub update_time: Duration,
    /// Messages exchanged by the decentralized agents.
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub truth: Vec<Vec<Pose2D>>,
    pub tracks: Vec<Track>,
}

impl RunRecord {
    pub fn track(&self, method: Method) -> Option<&Track> {
        self.tracks.iter().find(|t| t.method == method)
    }
}

/// All runs of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub scenario: String,
    pub methods: Vec<Method>,
    pub agents: Vec<usize>,
    pub horizon: usize,
    pub dt: f64,
    pub first_relative_step: Option<usize>,
    pub runs: Vec<RunRecord>,
}

fn describe_step(events: &[StepEvents]) -> String {
    let pairs: Vec<String> = events
        .iter()
        .flat_map(|e| e.relative.iter().map(|m| format!("{}->{}", m.observer, m.target)))
        .collect();
    if pairs.is_empty() {
        "local".into()
    } else {
        format!("relative {}", pairs.join(","))
    }
}

fn run_decentralized(sc: &Scenario, truth: &GroundTruth, method: Method, run: usize) -> Result<Track> {
    let cfg = sc.fusion_config();
    let agents = sc
        .agents
        .iter()
        .map(|a| {
            let bel = Belief::from_pose(a.id, a.initial_pose(), a.initial_cov(), 0)?;
            let mut c = AgentConfig::new(a.noise.model(), method.fusion(), cfg.with_gamma(a.gamma));
            c.process = ProcessNoise::isotropic(sc.process_noise);
            Ok(AgentRuntime::new(bel, c))
        })
        .collect::<Result<_>>()?;
    let mut world = World::new(agents);
    let mut track = Track {
        method,
        est: vec![world.agents.iter().map(|a| Estimate::from_belief(&a.belief)).collect()],
        events: vec![],
        messages: 0,
        processed_events: 0,
        updates: 0,
        solver_iters: 0,
        update_time: Duration::ZERO,
        trace: vec![],
    };
    for t in 1..=sc.horizon {
        let evs = &truth.events[t];
        let rep = world.step(&truth.commands[t - 1], evs).map_err(|e| Error::Update {
            run,
            t,
            event: describe_step(evs),
            source: Box::new(e),
        })?;
        for u in &rep.updates {
            track.updates += 1;
            track.solver_iters += u.solver_iters;
            track.update_time += u.elapsed;
            track.events.push(EventRow {
                agent: sc.agent_index(u.agent).expect("known agent"),
                t,
                event: match u.side {
                    crate::fusion::Side::Observer => "observer",
                    crate::fusion::Side::Target => "target",
                },
                det_cov: u.det_cov,
                trace_cov: u.trace_cov,
            });
        }
        track.messages += rep.messages;
        track.processed_events += rep.processed_events;
        track.est.push(world.agents.iter().map(|a| Estimate::from_belief(&a.belief)).collect());
    }
    track.trace = world.trace;
    Ok(track)
}

/// Centralized EKF over the stacked poses of all agents.
#[derive(Debug, Clone)]
pub struct JointFilter {
    pub mean: DVec,
    pub cov: Mat,
}

impl JointFilter {
    pub fn new(beliefs: &[Belief]) -> Self {
        let n = beliefs.len();
        let mut mean = DVec::zeros(3 * n);
        let mut cov = Mat::zeros(3 * n, 3 * n);
        for (k, b) in beliefs.iter().enumerate() {
            mean.rows_mut(3 * k, 3).copy_from(&b.mean);
            cov.view_mut((3 * k, 3 * k), (3, 3)).copy_from(b.cov.matrix());
        }
        Self { mean, cov }
    }

    pub fn pose(&self, k: usize) -> Pose2D {
        Pose2D::from_vector(&self.mean.rows(3 * k, 3).into_owned())
    }

    pub fn block(&self, k: usize) -> Mat {
        self.cov.view((3 * k, 3 * k), (3, 3)).into_owned()
    }

    pub fn predict(&mut self, sc: &Scenario, inputs: &[UnicycleInput]) {
        let n = inputs.len();
        let mut f = Mat::zeros(3 * n, 3 * n);
        let mut noise = Mat::zeros(3 * n, 3 * n);
        for (k, (u, a)) in inputs.iter().zip(&sc.agents).enumerate() {
            let x = self.pose(k);
            let (f_x, f_u) = propagation_jacobians(&x, u);
            let (sv, sw) = a.noise.model().input_std(u);
            let sigma = Mat::from_diagonal(&DVec::from_vec(vec![sv * sv, sw * sw]));
            f.view_mut((3 * k, 3 * k), (3, 3)).copy_from(&f_x);
            let q = &f_u * sigma * f_u.transpose() + Mat::identity(3, 3) * sc.process_noise;
            noise.view_mut((3 * k, 3 * k), (3, 3)).copy_from(&q);
            self.mean.rows_mut(3 * k, 3).copy_from(&propagate_state(&x, u).to_vector());
        }
        self.cov = linalg::symmetrize(&(&f * &self.cov * f.transpose() + noise));
    }

    fn apply(&mut self, h: &Mat, r: &Mat, nu: &DVec) -> Result<()> {
        let up = joint_ekf_update(&self.mean, &self.cov, h, r, nu)?;
        self.mean = up.mean;
        for k in 0..self.mean.len() / 3 {
            self.mean[3 * k + 2] = wrap_angle(self.mean[3 * k + 2]);
        }
        self.cov = up.cov;
        Ok(())
    }

    pub fn absolute_update(&mut self, k: usize, ev: &AbsoluteEvent) -> Result<()> {
        let (range, jac) = range_measurement_model(&self.pose(k), &ev.landmark)?;
        let mut h = Mat::zeros(1, self.mean.len());
        h.view_mut((0, 3 * k), (1, 3)).copy_from(&jac);
        self.apply(&h, &Mat::from_element(1, 1, ev.r_std * ev.r_std), &DVec::from_element(1, ev.z - range))
    }

    pub fn relative_update(&mut self, i: usize, j: usize, meas: &RelativeMeasurement) -> Result<()> {
        let model = RelativeModel::new(meas.kind);
        let (z_hat, jac) = model.evaluate(&self.pose(i), &self.pose(j))?;
        let mut h = Mat::zeros(meas.kind.dim(), self.mean.len());
        h.view_mut((0, 3 * i), (jac.h_ii.nrows(), 3)).copy_from(&jac.h_ii);
        h.view_mut((0, 3 * j), (jac.h_ij.nrows(), 3)).copy_from(&jac.h_ij);
        self.apply(&h, meas.r.matrix(), &model.innovation(&meas.z, &z_hat))
    }
}

fn run_joint(sc: &Scenario, truth: &GroundTruth, run: usize) -> Result<Track> {
    let beliefs = sc
        .agents
        .iter()
        .map(|a| Belief::from_pose(a.id, a.initial_pose(), a.initial_cov(), 0))
        .collect::<Result<Vec<_>>>()?;
    let mut jf = JointFilter::new(&beliefs);
    let n = sc.agents.len();
    let snapshot = |jf: &JointFilter| (0..n).map(|k| Estimate::new(jf.pose(k), &jf.block(k))).collect();
    let row = |jf: &JointFilter, k: usize, t: usize, event: &'static str| {
        let b = jf.block(k);
        EventRow {
            agent: k,
            t,
            event,
            det_cov: linalg::sym_det(&b),
            trace_cov: b.trace(),
        }
    };
    let mut track = Track {
        method: Method::Joint,
        est: vec![snapshot(&jf)],
        events: vec![],
        messages: 0,
        processed_events: 0,
        updates: 0,
        solver_iters: 0,
        update_time: Duration::ZERO,
        trace: vec![],
    };
    for t in 1..=sc.horizon {
        let evs = &truth.events[t];
        let wrap = |e: Error| Error::Update {
            run,
            t,
            event: describe_step(evs),
            source: Box::new(e),
        };
        jf.predict(sc, &truth.commands[t - 1]);
        for (k, ev) in evs.iter().enumerate() {
            for a in &ev.absolute {
                jf.absolute_update(k, a).map_err(wrap)?;
            }
        }
        let mut rel: Vec<&RelativeMeasurement> = evs.iter().flat_map(|e| &e.relative).collect();
        rel.sort_by_key(|m| (m.observer, m.target));
        for m in rel {
            let i = sc.agent_index(m.observer).expect("validated");
            let j = sc.agent_index(m.target).expect("validated");
            let start = Instant::now();
            jf.relative_update(i, j, m).map_err(wrap)?;
            track.update_time += start.elapsed();
            track.updates += 1;
            track.processed_events += 1;
            track.events.push(row(&jf, i, t, "relative"));
            track.events.push(row(&jf, j, t, "relative"));
        }
        track.est.push(snapshot(&jf));
    }
    Ok(track)
}

/// Runs `method` on one ground truth.
pub fn run_method(sc: &Scenario, truth: &GroundTruth, method: Method, run: usize) -> Result<Track> {
    match method {
        Method::Joint => run_joint(sc, truth, run),
        _ => run_decentralized(sc, truth, method, run),
    }
}

/// One Monte Carlo run of every method in `methods`.
pub fn run_one(sc: &Scenario, methods: &[Method], run: usize, master_seed: u64) -> Result<RunRecord> {
    let seed = run_seed(master_seed, run);
    let truth = generate_truth(sc, seed).map_err(|e| Error::Update {
        run,
        t: 0,
        event: "ground truth".into(),
        source: Box::new(e),
    })?;
    let tracks = methods
        .iter()
        .map(|&m| run_method(sc, &truth, m, run))
        .collect::<Result<_>>()?;
    Ok(RunRecord {
        run,
        seed,
        truth: truth.poses,
        tracks,
    })
}

/// Overrides applied on top of a scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub methods: Option<Vec<Method>>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
}

/// `runs` independent runs in parallel on the current rayon pool. Results
/// are ordered by run index whatever the scheduling.
pub fn run_monte_carlo(sc: &Scenario, opts: &RunOptions) -> Result<SimResult> {
    sc.validate()?;
    let methods = opts.methods.clone().unwrap_or_else(|| sc.methods.clone());
    let runs = opts.runs.unwrap_or(sc.monte_carlo.runs);
    let seed = opts.seed.unwrap_or(sc.monte_carlo.seed);
    if runs == 0 {
        return Err(Error::scenario("monte_carlo.runs", "must be at least 1"));
    }
    let records = (0..runs)
        .into_par_iter()
        .map(|r| run_one(sc, &methods, r, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimResult {
        scenario: sc.name.clone(),
        methods,
        agents: sc.agents.iter().map(|a| a.id).collect(),
        horizon: sc.horizon,
        dt: sc.dt,
        first_relative_step: sc.first_relative_step(),
        runs: records,
    })
}
