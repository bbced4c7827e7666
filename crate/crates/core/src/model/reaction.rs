//! Reaction terms `f1`, `f2` and their structural constants.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// `(t, x, u, v) -> rate`
pub type RateFn = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;
/// `(c1, c2) -> bound`
pub type BoxBoundFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Sampling grid for the sign checks: `USAMPLES × USAMPLES` in `(u, v)`.
pub const UV_SAMPLES: usize = 101;
/// Sampling grid for `(t, x)`.
pub const TX_SAMPLES: usize = 11;
/// Grid used to estimate Lipschitz constants of custom models.
pub const LIPSCHITZ_SAMPLES: usize = 501;
pub const LIPSCHITZ_SAFETY: f64 = 1.1;
/// Relative slack above `Θ(k)` for the strict-negativity check on `f2`.
pub const THETA_SLACK: f64 = 1e-6;

const T_RANGE: (f64, f64) = (0.0, 10.0);
const X_RANGE: (f64, f64) = (-10.0, 10.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReactionError {
    #[error("negative density input (u = {u}, v = {v})")]
    NegativeDensityInput { u: f64, v: f64 },
    #[error("{condition} violated at t={t}, x={x}, u={u}, v={v}: value {value}")]
    SignConditionViolated {
        condition: &'static str,
        t: f64,
        x: f64,
        u: f64,
        v: f64,
        value: f64,
    },
    #[error("zero line violated: {which} at t={t}, x={x}, u={u}, v={v} gives {value}")]
    ZeroLineViolated {
        which: &'static str,
        t: f64,
        x: f64,
        u: f64,
        v: f64,
        value: f64,
    },
    #[error("closed-form constant {name} mismatch: stored {stored}, expected {expected}")]
    ConstantMismatch {
        name: &'static str,
        stored: f64,
        expected: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    /// The nonlocally dispersing species `u`.
    U,
    /// The locally diffusing species `v`.
    V,
}

/// User-supplied reaction. Missing Lipschitz bounds are estimated by sampling.
#[derive(Clone)]
pub struct CustomReaction {
    pub name: String,
    pub f1: RateFn,
    pub f2: RateFn,
    pub k0: f64,
    pub r: f64,
    pub theta: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub lipschitz: Option<BoxBoundFn>,
    pub lipschitz_x: Option<BoxBoundFn>,
}

impl fmt::Debug for CustomReaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomReaction")
            .field("name", &self.name)
            .field("k0", &self.k0)
            .field("r", &self.r)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum ReactionModel {
    /// `f1 = u(a - u - bv)`, `f2 = v(1 - v - cu)`.
    Competition {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `f1 = u(a - u - bv)`, `f2 = v(1 - v + cu)`.
    PreyPredator {
        a: f64,
        b: f64,
        c: f64,
    },
    Custom(CustomReaction),
}

impl ReactionModel {
    pub fn competition(a: f64, b: f64, c: f64) -> Self {
        ReactionModel::Competition { a, b, c }
    }

    pub fn prey_predator(a: f64, b: f64, c: f64) -> Self {
        ReactionModel::PreyPredator { a, b, c }
    }

    /// A custom model with both rates identically zero.
    pub fn inert() -> Self {
        ReactionModel::Custom(CustomReaction {
            name: "inert".into(),
            f1: Arc::new(|_, _, _, _| 0.0),
            f2: Arc::new(|_, _, _, _| 0.0),
            k0: 1.0,
            r: 1.0,
            theta: Arc::new(|_| 1.0),
            lipschitz: Some(Arc::new(|_, _| 0.0)),
            lipschitz_x: Some(Arc::new(|_, _| 0.0)),
        })
    }

    pub fn kind(&self) -> &str {
        match self {
            ReactionModel::Competition { .. } => "competition",
            ReactionModel::PreyPredator { .. } => "prey_predator",
            ReactionModel::Custom(c) => &c.name,
        }
    }

    #[inline]
    pub fn f1(&self, t: f64, x: f64, u: f64, v: f64) -> f64 {
        match self {
            ReactionModel::Competition { a, b, .. } | ReactionModel::PreyPredator { a, b, .. } => {
                u * (a - u - b * v)
            }
            ReactionModel::Custom(c) => (c.f1)(t, x, u, v),
        }
    }

    #[inline]
    pub fn f2(&self, t: f64, x: f64, u: f64, v: f64) -> f64 {
        match self {
            ReactionModel::Competition { c, .. } => v * (1.0 - v - c * u),
            ReactionModel::PreyPredator { c, .. } => v * (1.0 - v + c * u),
            ReactionModel::Custom(m) => (m.f2)(t, x, u, v),
        }
    }

    /// Checked evaluation of `f1` or `f2`.
    pub fn evaluate(
        &self,
        which: Species,
        t: f64,
        x: f64,
        u: f64,
        v: f64,
    ) -> Result<f64, ReactionError> {
        if u < 0.0 || v < 0.0 {
            return Err(ReactionError::NegativeDensityInput { u, v });
        }
        Ok(match which {
            Species::U => self.f1(t, x, u, v),
            Species::V => self.f2(t, x, u, v),
        })
    }

    /// `k0`: `f1 < 0` once `u > k0`.
    pub fn k0(&self) -> f64 {
        match self {
            ReactionModel::Competition { a, .. } | ReactionModel::PreyPredator { a, .. } => *a,
            ReactionModel::Custom(c) => c.k0,
        }
    }

    /// `r`: `f1 ≤ r u` on `(0, k0]`.
    pub fn r(&self) -> f64 {
        match self {
            ReactionModel::Competition { a, .. } | ReactionModel::PreyPredator { a, .. } => *a,
            ReactionModel::Custom(c) => c.r,
        }
    }

    /// `Θ(k)`: `f2 < 0` for `0 ≤ u ≤ k` and `v > Θ(k)`.
    pub fn theta(&self, k: f64) -> f64 {
        match self {
            ReactionModel::Competition { .. } => 1.0,
            ReactionModel::PreyPredator { c, .. } => 1.0 + c * k,
            ReactionModel::Custom(m) => (m.theta)(k),
        }
    }

    /// `L(c1, c2)`: joint Lipschitz bound of `f1`, `f2` in `(u, v)` on `[0,c1]×[0,c2]`.
    pub fn lipschitz(&self, c1: f64, c2: f64) -> f64 {
        match self {
            ReactionModel::Competition { a, b, c } => {
                let l1 = (a + 2.0 * c1 + b * c2).max(b * c1);
                let l2 = (1.0 + 2.0 * c2 + c * c1).max(c * c2);
                l1.max(l2)
            }
            ReactionModel::PreyPredator { a, b, c } => {
                let l1 = (a + 2.0 * c1 + b * c2).max(b * c1);
                let l2 = (1.0 + 2.0 * c2 + c * c1).max(c * c2);
                l1.max(l2)
            }
            ReactionModel::Custom(m) => match &m.lipschitz {
                Some(l) => l(c1, c2),
                None => sampled_lipschitz(self, c1, c2),
            },
        }
    }

    /// `L*(c1, c2)`: Lipschitz bound in `x`. Zero for the built-ins (no `x` dependence).
    pub fn lipschitz_x(&self, c1: f64, c2: f64) -> f64 {
        match self {
            ReactionModel::Competition { .. } | ReactionModel::PreyPredator { .. } => 0.0,
            ReactionModel::Custom(m) => match &m.lipschitz_x {
                Some(l) => l(c1, c2),
                None => sampled_lipschitz_x(self, c1, c2),
            },
        }
    }

    /// Whether `f1`, `f2` are independent of `t` and `x`.
    pub fn is_autonomous(&self) -> bool {
        !matches!(self, ReactionModel::Custom(_))
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |k| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    })
}

fn sampled_lipschitz(m: &ReactionModel, c1: f64, c2: f64) -> f64 {
    let n = LIPSCHITZ_SAMPLES;
    let du = c1 / (n - 1) as f64;
    let dv = c2 / (n - 1) as f64;
    let mut best: f64 = 0.0;
    for i in 0..n {
        let u = i as f64 * du;
        for j in 0..n {
            let v = j as f64 * dv;
            for f in [ReactionModel::f1, ReactionModel::f2] {
                let here = f(m, 0.0, 0.0, u, v);
                if i + 1 < n {
                    best = best.max((f(m, 0.0, 0.0, u + du, v) - here).abs() / du);
                }
                if j + 1 < n {
                    best = best.max((f(m, 0.0, 0.0, u, v + dv) - here).abs() / dv);
                }
            }
        }
    }
    best * LIPSCHITZ_SAFETY
}

fn sampled_lipschitz_x(m: &ReactionModel, c1: f64, c2: f64) -> f64 {
    let xs: Vec<f64> = grid(X_RANGE.0, X_RANGE.1, 201).collect();
    let dx = xs[1] - xs[0];
    let mut best: f64 = 0.0;
    for t in grid(T_RANGE.0, T_RANGE.1, TX_SAMPLES) {
        for u in grid(0.0, c1, 21) {
            for v in grid(0.0, c2, 21) {
                for w in xs.windows(2) {
                    for f in [ReactionModel::f1, ReactionModel::f2] {
                        let d = (f(m, t, w[1], u, v) - f(m, t, w[0], u, v)).abs() / dx;
                        best = best.max(d);
                    }
                }
            }
        }
    }
    best * LIPSCHITZ_SAFETY
}

/// Outcome of [`validate_reaction`].
#[derive(Debug, Clone, Serialize)]
pub struct ReactionReport {
    pub kind: String,
    pub k0: f64,
    pub r: f64,
    pub theta_probe: f64,
    pub lipschitz: f64,
    pub lipschitz_x: f64,
    pub samples: usize,
}

/// Samples the structural hypotheses on a fixed grid.
///
/// `(u, v)` runs over a [`UV_SAMPLES`]² grid on `[0, 2 k]²` with `k = k1_probe`, and
/// `(t, x)` over a [`TX_SAMPLES`]² grid. The `f2` sign check samples `v` above
/// `Θ(k)(1 + THETA_SLACK)` instead, since the stored `Θ` is only a non-strict bound.
pub fn validate_reaction(
    m: &ReactionModel,
    k1_probe: f64,
) -> Result<ReactionReport, ReactionError> {
    let k = k1_probe;
    let k0 = m.k0();
    let r = m.r();
    let theta = m.theta(k);
    let theta_lo = theta * (1.0 + THETA_SLACK);
    let mut samples = 0usize;

    let ts: Vec<f64> = grid(T_RANGE.0, T_RANGE.1, TX_SAMPLES).collect();
    let xs: Vec<f64> = grid(X_RANGE.0, X_RANGE.1, TX_SAMPLES).collect();
    let span = 2.0 * k.max(k0);
    let us: Vec<f64> = grid(0.0, span, UV_SAMPLES).collect();
    let vs: Vec<f64> = grid(0.0, span, UV_SAMPLES).collect();
    let vs_high: Vec<f64> = grid(theta_lo, theta_lo + span.max(theta), UV_SAMPLES).collect();
    let us_low: Vec<f64> = grid(0.0, k, UV_SAMPLES).collect();

    for &t in &ts {
        for &x in &xs {
            for &s in &us {
                let f1 = m.f1(t, x, 0.0, s);
                if f1 != 0.0 {
                    return Err(ReactionError::ZeroLineViolated {
                        which: "f1(t,x,0,v)",
                        t,
                        x,
                        u: 0.0,
                        v: s,
                        value: f1,
                    });
                }
                let f2 = m.f2(t, x, s, 0.0);
                if f2 != 0.0 {
                    return Err(ReactionError::ZeroLineViolated {
                        which: "f2(t,x,u,0)",
                        t,
                        x,
                        u: s,
                        v: 0.0,
                        value: f2,
                    });
                }
            }
            for &u in &us {
                for &v in &vs {
                    samples += 1;
                    let f1 = m.f1(t, x, u, v);
                    if u > k0 && f1 >= 0.0 {
                        return Err(ReactionError::SignConditionViolated {
                            condition: "f1 < 0 for u > k0",
                            t,
                            x,
                            u,
                            v,
                            value: f1,
                        });
                    }
                    if u > 0.0 && u <= k0 && f1 > r * u * (1.0 + 1e-12) {
                        return Err(ReactionError::SignConditionViolated {
                            condition: "f1 <= r u for 0 < u <= k0",
                            t,
                            x,
                            u,
                            v,
                            value: f1,
                        });
                    }
                }
            }
            for &u in &us_low {
                for &v in &vs_high {
                    samples += 1;
                    let f2 = m.f2(t, x, u, v);
                    if f2 >= 0.0 {
                        return Err(ReactionError::SignConditionViolated {
                            condition: "f2 < 0 for u <= k, v >= theta(k)",
                            t,
                            x,
                            u,
                            v,
                            value: f2,
                        });
                    }
                }
            }
        }
    }

    match m {
        ReactionModel::Competition { a, .. } => {
            check_constant("k0", k0, *a)?;
            check_constant("r", r, *a)?;
            check_constant("theta", theta, 1.0)?;
        }
        ReactionModel::PreyPredator { a, c, .. } => {
            check_constant("k0", k0, *a)?;
            check_constant("r", r, *a)?;
            check_constant("theta", theta, 1.0 + c * k)?;
        }
        ReactionModel::Custom(_) => {}
    }

    Ok(ReactionReport {
        kind: m.kind().to_string(),
        k0,
        r,
        theta_probe: theta,
        lipschitz: m.lipschitz(k, theta.max(k)),
        lipschitz_x: m.lipschitz_x(k, theta.max(k)),
        samples,
    })
}

fn check_constant(name: &'static str, stored: f64, expected: f64) -> Result<(), ReactionError> {
    if (stored - expected).abs() > 1e-14 * expected.abs().max(1.0) {
        return Err(ReactionError::ConstantMismatch {
            name,
            stored,
            expected,
        });
    }
    Ok(())
}
