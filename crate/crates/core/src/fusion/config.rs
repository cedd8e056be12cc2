use serde::{Deserialize, Serialize};

/// Scaling of the measurement noise inside the discorrelated bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaMode {
    /// γ = 1. Tighter, non-convex in ω.
    #[default]
    One,
    /// γ = 1 − ω. Convex in ω and more conservative.
    OneMinusOmega,
}

/// Scalar criterion minimized over ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DmvObjective {
    #[default]
    LogDet,
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    #[default]
    FiniteDifference,
    Analytic,
}

/// Projected-gradient settings for the cross-block solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AscentConfig {
    pub max_iters: usize,
    /// Relative objective improvement counted as a stall.
    pub rel_tol: f64,
    /// Consecutive stalls that end the ascent.
    pub stall_iters: usize,
    pub gradient: GradientMode,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            rel_tol: 1e-9,
            stall_iters: 3,
            gradient: GradientMode::FiniteDifference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaddleConfig {
    pub max_iters: usize,
    /// Saddle gap tolerance relative to `Tr(P_own)`.
    pub gap_rtol: f64,
    pub gradient: GradientMode,
}

impl Default for SaddleConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            gap_rtol: 1e-6,
            gradient: GradientMode::FiniteDifference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub gamma_mode: GammaMode,
    pub dmv_objective: DmvObjective,
    /// Below `omega_eps` or above `1 − omega_eps` the DMV gain is taken from
    /// its boundary-safe information form.
    pub omega_eps: f64,
    pub omega_tol: f64,
    pub omega_max_iters: usize,
    /// Singular values of the contraction are kept at or below `1 − psd_margin`.
    pub psd_margin: f64,
    pub ascent: AscentConfig,
    pub saddle: SaddleConfig,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            gamma_mode: GammaMode::One,
            dmv_objective: DmvObjective::LogDet,
            omega_eps: 1e-6,
            omega_tol: 1e-9,
            omega_max_iters: 100,
            psd_margin: 1e-6,
            ascent: AscentConfig::default(),
            saddle: SaddleConfig::default(),
        }
    }
}

impl FusionConfig {
    pub fn with_gamma(mut self, gamma_mode: GammaMode) -> Self {
        self.gamma_mode = gamma_mode;
        self
    }

    pub fn with_gradient(mut self, gradient: GradientMode) -> Self {
        self.ascent.gradient = gradient;
        self.saddle.gradient = gradient;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.omega_eps > 0.0 && self.omega_eps < 0.5) {
            return Err(format!("omega_eps {} outside (0, 0.5)", self.omega_eps));
        }
        if !(self.psd_margin > 0.0 && self.psd_margin < 1.0) {
            return Err(format!("psd_margin {} outside (0, 1)", self.psd_margin));
        }
        if !(self.omega_tol > 0.0) {
            return Err("omega_tol must be positive".into());
        }
        Ok(())
    }
}
