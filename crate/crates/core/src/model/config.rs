use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::kernel::KernelSpec;
use super::reaction::ReactionModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("key `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("initial data: {0}")]
    InitialData(String),
    #[error("{0}")]
    Invalid(String),
}

/// Initial density on `[-h0, h0]`.
#[derive(Clone)]
pub enum InitialProfile {
    /// `amp · cos(πx / (2 h0))`
    Bump { amp: f64 },
    /// `amp · (1 - (x/h0)²)`
    Parabola { amp: f64 },
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialProfile::Bump { amp } => write!(f, "Bump({amp})"),
            InitialProfile::Parabola { amp } => write!(f, "Parabola({amp})"),
            InitialProfile::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl InitialProfile {
    pub fn name(&self) -> &str {
        match self {
            InitialProfile::Bump { .. } => "bump",
            InitialProfile::Parabola { .. } => "parabola",
            InitialProfile::Custom { name, .. } => name,
        }
    }

    pub fn amplitude(&self) -> Option<f64> {
        match self {
            InitialProfile::Bump { amp } | InitialProfile::Parabola { amp } => Some(*amp),
            InitialProfile::Custom { .. } => None,
        }
    }

    /// Value at `x`; zero outside `[-h0, h0]`.
    pub fn eval(&self, x: f64, h0: f64) -> f64 {
        if x.abs() > h0 {
            return 0.0;
        }
        match self {
            InitialProfile::Bump { amp } => amp * (PI * x / (2.0 * h0)).cos(),
            InitialProfile::Parabola { amp } => {
                let s = x / h0;
                amp * (1.0 - s * s)
            }
            InitialProfile::Custom { f, .. } => f(x),
        }
    }
}

/// Time-step policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// `0.45 / (d1 + L + max|ζ|/Δy)`, re-selected periodically.
    Auto,
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub d1: f64,
    pub d2: f64,
    pub mu: f64,
    pub rho: f64,
    pub h0: f64,
    pub u0: InitialProfile,
    pub v0: InitialProfile,
    pub kernel: KernelSpec,
    pub reaction: ReactionModel,
    /// Time horizon `T`.
    pub horizon: f64,
    /// Odd node count of the reference grid.
    pub nodes: usize,
    pub dt: TimeStep,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Time weight of the v-stepper, in `[1/2, 1]`.
    pub theta: f64,
    /// Number of evenly spaced field snapshots (plus `t = 0`).
    pub snapshots: usize,
    /// Steps between re-selections of the automatic time step.
    pub recheck_every: usize,
}

impl ProblemConfig {
    /// Defaults for everything but the model itself.
    pub fn new(
        kernel: KernelSpec,
        reaction: ReactionModel,
        u0: InitialProfile,
        v0: InitialProfile,
    ) -> Self {
        ProblemConfig {
            d1: 1.0,
            d2: 1.0,
            mu: 1.0,
            rho: 1.0,
            h0: 1.0,
            u0,
            v0,
            kernel,
            reaction,
            horizon: 2.0,
            nodes: 201,
            dt: TimeStep::Auto,
            picard_tol: 1e-10,
            picard_max: 8,
            theta: 1.0,
            snapshots: 200,
            recheck_every: 20,
        }
    }

    /// Checks scalar parameter ranges.
    pub fn check_parameters(&self) -> Result<(), ConfigError> {
        let positive = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("h0", self.h0),
            ("T", self.horizon),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(bad(key, format!("must be positive, got {value}")));
            }
        }
        for (key, value) in [("mu", self.mu), ("rho", self.rho)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(bad(key, format!("must be nonnegative, got {value}")));
            }
        }
        if self.nodes < 5 || self.nodes.is_multiple_of(2) {
            return Err(bad(
                "grid.N",
                format!("must be odd and at least 5, got {}", self.nodes),
            ));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(bad(
                    "grid.dt",
                    format!("must be positive or `auto`, got {dt}"),
                ));
            }
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(bad(
                "grid.theta",
                format!("must lie in [0.5, 1], got {}", self.theta),
            ));
        }
        if self.picard_max == 0 {
            return Err(bad("picard.max", "must be at least 1".into()));
        }
        if !(self.picard_tol >= 0.0) {
            return Err(bad("picard.tol", "must be nonnegative".into()));
        }
        if self.recheck_every == 0 {
            return Err(bad("run.recheck_every", "must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks `u0(±h0) = v0(±h0) = 0`, positivity inside, and a finite Lipschitz quotient
    /// for `u0`, sampled at the grid nodes.
    pub fn check_initial_data(&self) -> Result<(), ConfigError> {
        let h0 = self.h0;
        for (name, p) in [("u0", &self.u0), ("v0", &self.v0)] {
            for x in [-h0, h0] {
                let value = p.eval(x, h0);
                if value.abs() > 1e-12 {
                    return Err(ConfigError::InitialData(format!(
                        "{name}({x}) = {value}, expected 0"
                    )));
                }
            }
            for j in 1..self.nodes - 1 {
                let x = h0 * node(j, self.nodes);
                let value = p.eval(x, h0);
                if !(value > 0.0) {
                    return Err(ConfigError::InitialData(format!(
                        "{name}({x}) = {value}, expected > 0"
                    )));
                }
            }
        }
        let dx = 2.0 * h0 / (self.nodes - 1) as f64;
        let lip = (0..self.nodes - 1)
            .map(|j| {
                let a = self.u0.eval(h0 * node(j, self.nodes), h0);
                let b = self.u0.eval(h0 * node(j + 1, self.nodes), h0);
                (b - a).abs() / dx
            })
            .fold(0.0, f64::max);
        if !lip.is_finite() {
            return Err(ConfigError::InitialData("u0 is not Lipschitz".into()));
        }
        Ok(())
    }

    /// Whether the configuration is mirror-symmetric about `x = 0`.
    pub fn is_symmetric(&self) -> bool {
        let even = |p: &InitialProfile| !matches!(p, InitialProfile::Custom { .. });
        even(&self.u0) && even(&self.v0) && self.reaction.is_autonomous()
    }
}

fn bad(key: &str, message: String) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        message,
    }
}

/// `y_j` on the reference grid, exactly antisymmetric about the center node.
pub(crate) fn node(j: usize, n: usize) -> f64 {
    let m = (n - 1) as f64;
    (2.0 * j as f64 - m) / m
}
