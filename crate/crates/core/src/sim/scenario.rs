//! Experiment descriptions, loaded from TOML. Angles are in degrees in the
//! file and in radians everywhere else.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{FusionConfig, GammaMode};
use crate::local_filter::Landmark;
use crate::motion::{NoiseModel, UnicycleInput};
use crate::types::{AgentId, CovarianceMatrix, FusionMethod, MeasurementKind, Pose2D};

/// Estimator compared in a Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Local filter only: dead reckoning plus absolute corrections.
    Dr,
    Naive,
    Dmv,
    Ecmv,
    Pecmv,
    /// Centralized EKF over the stacked state of all agents.
    Joint,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Dr, Method::Naive, Method::Dmv, Method::Ecmv, Method::Pecmv, Method::Joint];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dr => "dr",
            Method::Naive => "naive",
            Method::Dmv => "dmv",
            Method::Ecmv => "ecmv",
            Method::Pecmv => "pecmv",
            Method::Joint => "joint",
        }
    }

    /// The relative-update method used by the decentralized agents.
    pub fn fusion(self) -> Option<FusionMethod> {
        match self {
            Method::Naive => Some(FusionMethod::Naive),
            Method::Dmv => Some(FusionMethod::Dmv),
            Method::Ecmv => Some(FusionMethod::Ecmv),
            Method::Pecmv => Some(FusionMethod::Pecmv),
            Method::Dr | Method::Joint => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::scenario("methods", format!("unknown method `{s}`")))
    }
}

/// Parses a comma-separated method list such as `naive,dmv,joint`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(Method::from_str).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarlo {
    pub runs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub v_frac: f64,
    pub omega_frac: f64,
    /// m/s
    #[serde(default)]
    pub v_floor: f64,
    /// deg/s
    #[serde(default)]
    pub omega_floor_deg: f64,
}

impl NoiseSpec {
    pub fn model(&self) -> NoiseModel {
        NoiseModel::new(self.v_frac, self.omega_frac, self.v_floor, self.omega_floor_deg.to_radians())
    }
}

/// Constant-velocity piece of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    /// s
    pub duration: f64,
    /// m/s
    pub v: f64,
    /// deg/s
    #[serde(default)]
    pub omega_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: AgentId,
    /// `[x m, y m, heading deg]`
    pub initial_pose: [f64; 3],
    /// `[σx m, σy m, σφ deg]` of the initial belief; the true start is
    /// drawn from it.
    pub initial_std: [f64; 3],
    pub noise: NoiseSpec,
    #[serde(default)]
    pub gamma: GammaMode,
    pub trajectory: Vec<Segment>,
}

impl AgentSpec {
    pub fn initial_pose(&self) -> Pose2D {
        Pose2D::new(self.initial_pose[0], self.initial_pose[1], self.initial_pose[2].to_radians())
    }

    pub fn initial_cov(&self) -> CovarianceMatrix {
        let [sx, sy, sp] = self.initial_std;
        CovarianceMatrix::from_diagonal(&[sx * sx, sy * sy, sp.to_radians().powi(2)]).expect("validated std")
    }

    /// Commanded input for the step starting at time `t·dt`. The robot
    /// stands still once its script ends.
    pub fn command(&self, step: usize, dt: f64) -> UnicycleInput {
        let time = (step as f64 + 0.5) * dt;
        let mut start = 0.0;
        for seg in &self.trajectory {
            if time < start + seg.duration {
                return UnicycleInput::new(seg.v, seg.omega_deg.to_radians(), dt);
            }
            start += seg.duration;
        }
        UnicycleInput::new(0.0, 0.0, dt)
    }
}

/// Timesteps at which an event fires: an explicit list or an inclusive
/// range with a stride.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Steps {
    List(Vec<usize>),
    Range {
        from: usize,
        to: usize,
        #[serde(default = "one")]
        every: usize,
    },
}

fn one() -> usize {
    1
}

impl Steps {
    pub fn contains(&self, t: usize) -> bool {
        match self {
            Steps::List(v) => v.contains(&t),
            Steps::Range { from, to, every } => t >= *from && t <= *to && (t - from).is_multiple_of((*every).max(1)),
        }
    }

    pub fn iter(&self) -> Vec<usize> {
        match self {
            Steps::List(v) => v.clone(),
            Steps::Range { from, to, every } => (*from..=*to).step_by((*every).max(1)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsoluteSchedule {
    pub agent: AgentId,
    pub landmark: usize,
    pub steps: Steps,
    /// m
    pub r_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelativeSchedule {
    pub observer: AgentId,
    pub target: AgentId,
    pub steps: Steps,
    pub kind: String,
    /// One standard deviation per measurement component; angular
    /// components in degrees.
    pub std: Vec<f64>,
}

impl RelativeSchedule {
    pub fn kind(&self) -> Result<MeasurementKind> {
        self.kind.parse()
    }

    /// Noise covariance in SI units.
    pub fn noise(&self) -> Result<CovarianceMatrix> {
        let kind = self.kind()?;
        let var: Vec<f64> = self
            .std
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let s = if kind.angle_components().contains(&k) { s.to_radians() } else { *s };
                s * s
            })
            .collect();
        CovarianceMatrix::from_diagonal(&var)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// s
    pub dt: f64,
    /// Number of steps after the initial time.
    pub horizon: usize,
    /// Additive per-step process noise variance on every pose component.
    #[serde(default = "default_q")]
    pub process_noise: f64,
    pub monte_carlo: MonteCarlo,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub fusion: Option<FusionConfig>,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub landmarks: Vec<Landmark>,
    #[serde(default)]
    pub absolute: Vec<AbsoluteSchedule>,
    #[serde(default)]
    pub relative: Vec<RelativeSchedule>,
}

fn default_q() -> f64 {
    crate::local_filter::DEFAULT_Q
}

fn default_methods() -> Vec<Method> {
    vec![Method::Dr, Method::Naive, Method::Dmv, Method::Pecmv, Method::Joint]
}

const DEFAULT_TOML: &str = include_str!("../../scenarios/default.toml");

impl Scenario {
    /// Three robots on closed loops with nine relative-measurement windows
    /// and one absolute-range window.
    pub fn builtin() -> Self {
        Self::from_toml(DEFAULT_TOML).expect("shipped scenario is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| {
            let path = e.span().map(|s| format!("byte {}..{}", s.start, s.end)).unwrap_or_default();
            Error::scenario(path, e.message().to_string())
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn fusion_config(&self) -> FusionConfig {
        self.fusion.unwrap_or_default()
    }

    pub fn agent_index(&self, id: AgentId) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }

    pub fn landmark(&self, id: usize) -> Option<&Landmark> {
        self.landmarks.iter().find(|l| l.id == id)
    }

    /// Checks every reference and range; the error names the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |path: String, msg: &str| Err(Error::scenario(path, msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt".into(), "must be positive");
        }
        if self.horizon == 0 {
            return bad("horizon".into(), "must be at least 1");
        }
        if !(self.process_noise >= 0.0) {
            return bad("process_noise".into(), "must be non-negative");
        }
        if self.monte_carlo.runs == 0 {
            return bad("monte_carlo.runs".into(), "must be at least 1");
        }
        if self.methods.is_empty() {
            return bad("methods".into(), "must list at least one method");
        }
        if let Some(cfg) = &self.fusion {
            cfg.validate().map_err(|m| Error::scenario("fusion", m))?;
        }
        if self.agents.is_empty() {
            return bad("agents".into(), "must list at least one agent");
        }
        let mut ids = BTreeSet::new();
        for (k, a) in self.agents.iter().enumerate() {
            if !ids.insert(a.id) {
                return bad(format!("agents[{k}].id"), "duplicate agent id");
            }
            if a.initial_std.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                return bad(format!("agents[{k}].initial_std"), "entries must be positive");
            }
            if a.initial_pose.iter().any(|v| !v.is_finite()) {
                return bad(format!("agents[{k}].initial_pose"), "entries must be finite");
            }
            let n = &a.noise;
            if [n.v_frac, n.omega_frac, n.v_floor, n.omega_floor_deg].iter().any(|v| !(*v >= 0.0)) {
                return bad(format!("agents[{k}].noise"), "entries must be non-negative");
            }
            for (s, seg) in a.trajectory.iter().enumerate() {
                if !(seg.duration > 0.0) || !seg.v.is_finite() || !seg.omega_deg.is_finite() {
                    return bad(format!("agents[{k}].trajectory[{s}]"), "needs positive duration and finite speeds");
                }
            }
        }
        let mut lms = BTreeSet::new();
        for (k, l) in self.landmarks.iter().enumerate() {
            if !lms.insert(l.id) {
                return bad(format!("landmarks[{k}].id"), "duplicate landmark id");
            }
        }
        for (k, e) in self.absolute.iter().enumerate() {
            if !ids.contains(&e.agent) {
                return bad(format!("absolute[{k}].agent"), "unknown agent");
            }
            if !lms.contains(&e.landmark) {
                return bad(format!("absolute[{k}].landmark"), "unknown landmark");
            }
            if !(e.r_std > 0.0) {
                return bad(format!("absolute[{k}].r_std"), "must be positive");
            }
            self.check_steps(&e.steps, format!("absolute[{k}].steps"))?;
        }
        for (k, e) in self.relative.iter().enumerate() {
            if !ids.contains(&e.observer) {
                return bad(format!("relative[{k}].observer"), "unknown agent");
            }
            if !ids.contains(&e.target) {
                return bad(format!("relative[{k}].target"), "unknown agent");
            }
            if e.observer == e.target {
                return bad(format!("relative[{k}].target"), "must differ from the observer");
            }
            let kind = e.kind().map_err(|err| Error::scenario(format!("relative[{k}].kind"), err.to_string()))?;
            if e.std.len() != kind.dim() || e.std.iter().any(|s| !(*s > 0.0)) {
                return bad(
                    format!("relative[{k}].std"),
                    &format!("needs {} positive entries for {}", kind.dim(), kind.name()),
                );
            }
            self.check_steps(&e.steps, format!("relative[{k}].steps"))?;
        }
        Ok(())
    }

    fn check_steps(&self, steps: &Steps, path: String) -> Result<()> {
        let ok = match steps {
            Steps::List(v) => v.iter().all(|t| (1..=self.horizon).contains(t)),
            Steps::Range { from, to, .. } => *from >= 1 && from <= to && *to <= self.horizon,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::scenario(path, format!("steps must lie in 1..={}", self.horizon)))
        }
    }

    /// First step with a relative measurement.
    pub fn first_relative_step(&self) -> Option<usize> {
        self.relative.iter().flat_map(|e| e.steps.iter()).min()
    }

    /// Total number of scheduled relative measurements.
    pub fn relative_event_count(&self) -> usize {
        self.relative.iter().map(|e| e.steps.iter().len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_loads() {
        let sc = Scenario::builtin();
        assert_eq!(sc.agents.len(), 3);
        assert_eq!(sc.relative.len(), 9);
        assert_eq!(sc.absolute.len(), 1);
        let back = Scenario::from_toml(&sc.to_toml()).unwrap();
        assert_eq!(back, sc);
    }

    #[test]
    fn missing_landmark_names_key() {
        let mut sc = Scenario::builtin();
        sc.absolute[0].landmark = 99;
        match sc.validate() {
            Err(Error::Scenario { path, .. }) => assert_eq!(path, "absolute[0].landmark"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{}\nbogus = 1\n", DEFAULT_TOML);
        assert!(matches!(Scenario::from_toml(&text), Err(Error::Scenario { .. })));
    }

    #[test]
    fn partial_fusion_table_fills_defaults() {
        let text = DEFAULT_TOML.replacen("[monte_carlo]", "[fusion]\ngamma_mode = \"one-minus-omega\"\n\n[monte_carlo]", 1);
        let cfg = Scenario::from_toml(&text).unwrap().fusion_config();
        assert_eq!(cfg.gamma_mode, GammaMode::OneMinusOmega);
        assert_eq!(cfg.omega_tol, FusionConfig::default().omega_tol);
    }

    #[test]
    fn steps_forms() {
        let r = Steps::Range { from: 3, to: 9, every: 3 };
        assert_eq!(r.iter(), vec![3, 6, 9]);
        assert!(r.contains(6) && !r.contains(7));
        assert!(Steps::List(vec![2, 5]).contains(5));
    }

    #[test]
    fn noise_converts_degrees() {
        let e = RelativeSchedule {
            observer: 0,
            target: 1,
            steps: Steps::List(vec![1]),
            kind: "relative-pose".into(),
            std: vec![0.1, 0.1, 5.0],
        };
        let r = e.noise().unwrap();
        assert!((r.matrix()[(2, 2)] - 5f64.to_radians().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn commands_follow_segments() {
        let a = &Scenario::builtin().agents[0];
        let total: f64 = a.trajectory.iter().map(|s| s.duration).sum();
        let u = a.command(0, 0.5);
        assert_eq!(u.v, a.trajectory[0].v);
        let after = a.command((total / 0.5) as usize + 1, 0.5);
        assert_eq!((after.v, after.omega), (0.0, 0.0));
    }

    #[test]
    fn method_list_parses() {
        assert_eq!(parse_methods("naive, dmv,joint").unwrap(), vec![Method::Naive, Method::Dmv, Method::Joint]);
        assert!(parse_methods("magic").is_err());
    }
}
