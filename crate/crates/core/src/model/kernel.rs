//! Dispersal kernels with compact support and their closed-form tail masses.

use std::fmt;
use std::sync::Arc;

use statrs::function::erf::erf;
use thiserror::Error;

/// Tolerance on the unit-mass check.
pub const MASS_TOLERANCE: f64 = 1e-10;
/// Panels used by the trapezoid mass check over `[-a, a]`.
pub const MASS_PANELS: usize = 100_000;
/// Points on the `(-eps_bar, eps_bar)` grid used to pick `delta0`.
pub const FLOOR_SAMPLES: usize = 1001;
const SYMMETRY_SAMPLES: usize = 2001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel mass is {mass} (expected 1 within {MASS_TOLERANCE:e})")]
    MassNotUnit { mass: f64 },
    #[error("kernel is not symmetric: J({x}) = {left}, J({neg}) = {right}", neg = -x)]
    NotSymmetric { x: f64, left: f64, right: f64 },
    #[error("kernel is negative at x = {x}: {value}")]
    NegativeValue { x: f64, value: f64 },
    #[error("kernel vanishes at the origin")]
    ZeroAtOrigin,
    #[error("kernel is not Lipschitz (jump at |x| = {radius}); pass --allow-nonlipschitz-kernel to admit it")]
    NotLipschitz { radius: f64 },
    #[error("invalid kernel parameter: {0}")]
    BadParameter(String),
}

/// A user-supplied density on `[-radius, radius]`. Tail mass is integrated numerically.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    pub radius: f64,
    pub lipschitz: bool,
    pub density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("name", &self.name)
            .field("radius", &self.radius)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum KernelFamily {
    /// `1/(2a)` on `[-a, a]`.
    Uniform,
    /// `(1 - |x|/a)/a` on `[-a, a]`.
    Tent,
    /// Gaussian truncated at `±a`, shifted down so it vanishes continuously there, then renormalized.
    TruncatedGaussian {
        sigma: f64,
    },
    Custom(CustomKernel),
}

impl KernelFamily {
    pub fn name(&self) -> &str {
        match self {
            KernelFamily::Uniform => "uniform",
            KernelFamily::Tent => "tent",
            KernelFamily::TruncatedGaussian { .. } => "truncated_gaussian",
            KernelFamily::Custom(c) => &c.name,
        }
    }
}

/// A symmetric, compactly supported probability density `J`.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    family: KernelFamily,
    radius: f64,
    /// Normalizing constant (truncated Gaussian only).
    norm: f64,
}

/// The lower bound `J > delta0` on `(-eps_bar, eps_bar)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KernelFloor {
    pub eps_bar: f64,
    pub delta0: f64,
}

impl KernelSpec {
    pub fn uniform(radius: f64) -> Result<Self, KernelError> {
        Self::new(KernelFamily::Uniform, radius)
    }

    pub fn tent(radius: f64) -> Result<Self, KernelError> {
        Self::new(KernelFamily::Tent, radius)
    }

    pub fn truncated_gaussian(radius: f64, sigma: f64) -> Result<Self, KernelError> {
        Self::new(KernelFamily::TruncatedGaussian { sigma }, radius)
    }

    pub fn custom(kernel: CustomKernel) -> Result<Self, KernelError> {
        let radius = kernel.radius;
        Self::new(KernelFamily::Custom(kernel), radius)
    }

    pub fn new(family: KernelFamily, radius: f64) -> Result<Self, KernelError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(KernelError::BadParameter(format!(
                "support radius must be positive, got {radius}"
            )));
        }
        let norm = match &family {
            KernelFamily::TruncatedGaussian { sigma } => {
                let sigma = *sigma;
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(KernelError::BadParameter(format!(
                        "sigma must be positive, got {sigma}"
                    )));
                }
                0.5 / gaussian_shifted_mass(radius, sigma, 0.0)
            }
            _ => 1.0,
        };
        Ok(KernelSpec {
            family,
            radius,
            norm,
        })
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    /// Support radius `a`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.family {
            KernelFamily::TruncatedGaussian { sigma } => Some(sigma),
            _ => None,
        }
    }

    /// Whether `J` is Lipschitz on the whole real line.
    pub fn is_lipschitz(&self) -> bool {
        match &self.family {
            KernelFamily::Uniform => false,
            KernelFamily::Tent | KernelFamily::TruncatedGaussian { .. } => true,
            KernelFamily::Custom(c) => c.lipschitz,
        }
    }

    /// Lipschitz constant of `J`, `None` for the step kernel.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        let a = self.radius;
        match &self.family {
            KernelFamily::Uniform => None,
            KernelFamily::Tent => Some(1.0 / (a * a)),
            KernelFamily::TruncatedGaussian { sigma } => {
                // |d/dx e^{-x^2/2s^2}| peaks at x = s (or at a if a < s).
                let x = sigma.min(a);
                Some(self.norm * x / (sigma * sigma) * (-x * x / (2.0 * sigma * sigma)).exp())
            }
            KernelFamily::Custom(_) => None,
        }
    }

    /// Evaluates `J(x)`.
    pub fn density(&self, x: f64) -> f64 {
        let a = self.radius;
        let r = x.abs();
        match &self.family {
            KernelFamily::Uniform => {
                if r <= a {
                    0.5 / a
                } else {
                    0.0
                }
            }
            KernelFamily::Tent => {
                if r <= a {
                    (1.0 - r / a) / a
                } else {
                    0.0
                }
            }
            KernelFamily::TruncatedGaussian { sigma } => {
                if r <= a {
                    let s2 = 2.0 * sigma * sigma;
                    self.norm * ((-r * r / s2).exp() - (-a * a / s2).exp())
                } else {
                    0.0
                }
            }
            KernelFamily::Custom(c) => {
                if r <= a {
                    (c.density)(x)
                } else {
                    0.0
                }
            }
        }
    }

    /// Tail mass `∫_s^∞ J(r) dr` for `s ≥ 0` (negative `s` is treated as 0).
    pub fn tail_mass(&self, s: f64) -> f64 {
        let a = self.radius;
        let s = s.max(0.0);
        if s >= a {
            return 0.0;
        }
        match &self.family {
            KernelFamily::Uniform => (a - s) / (2.0 * a),
            KernelFamily::Tent => {
                let d = a - s;
                d * d / (2.0 * a * a)
            }
            KernelFamily::TruncatedGaussian { sigma } => {
                self.norm * gaussian_shifted_mass(a, *sigma, s)
            }
            KernelFamily::Custom(c) => {
                // Composite Simpson on [s, a].
                let n = 2000;
                let h = (a - s) / n as f64;
                let mut acc = (c.density)(s) + (c.density)(a);
                for k in 1..n {
                    let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * (c.density)(s + k as f64 * h);
                }
                acc * h / 3.0
            }
        }
    }

    /// Trapezoid mass over `[-a, a]` with [`MASS_PANELS`] panels.
    pub fn trapezoid_mass(&self, panels: usize) -> f64 {
        let a = self.radius;
        let h = 2.0 * a / panels as f64;
        let mut acc = 0.5 * (self.density(-a) + self.density(a));
        for k in 1..panels {
            acc += self.density(-a + k as f64 * h);
        }
        acc * h
    }
}

/// `∫_s^a (e^{-x²/2σ²} - e^{-a²/2σ²}) dx`.
fn gaussian_shifted_mass(a: f64, sigma: f64, s: f64) -> f64 {
    let scale = sigma * std::f64::consts::SQRT_2;
    let floor = (-a * a / (2.0 * sigma * sigma)).exp();
    sigma * (std::f64::consts::PI / 2.0).sqrt() * (erf(a / scale) - erf(s / scale))
        - floor * (a - s)
}

/// Checks (J) and returns the kernel floor.
///
/// `eps_bar = min(a/2, h0/8)`; `delta0` is 0.99 times the smallest value of `J` on a
/// [`FLOOR_SAMPLES`]-point grid over `[-eps_bar, eps_bar]`. Non-Lipschitz kernels are
/// rejected unless `allow_nonlipschitz` is set.
pub fn validate_kernel(
    kernel: &KernelSpec,
    h0: f64,
    allow_nonlipschitz: bool,
) -> Result<KernelFloor, KernelError> {
    let a = kernel.radius();
    if kernel.density(0.0) <= 0.0 {
        return Err(KernelError::ZeroAtOrigin);
    }
    for k in 0..SYMMETRY_SAMPLES {
        let x = a * 1.1 * k as f64 / (SYMMETRY_SAMPLES - 1) as f64;
        let left = kernel.density(x);
        let right = kernel.density(-x);
        if left < 0.0 {
            return Err(KernelError::NegativeValue { x, value: left });
        }
        if right < 0.0 {
            return Err(KernelError::NegativeValue {
                x: -x,
                value: right,
            });
        }
        if left != right {
            return Err(KernelError::NotSymmetric { x, left, right });
        }
    }
    let mass = kernel.trapezoid_mass(MASS_PANELS);
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(KernelError::MassNotUnit { mass });
    }
    if !allow_nonlipschitz && !kernel.is_lipschitz() {
        return Err(KernelError::NotLipschitz { radius: a });
    }
    Ok(kernel_floor(kernel, h0))
}

pub fn kernel_floor(kernel: &KernelSpec, h0: f64) -> KernelFloor {
    let eps_bar = (0.5 * kernel.radius()).min(h0 / 8.0);
    let min = (0..FLOOR_SAMPLES)
        .map(|k| {
            let x = -eps_bar + 2.0 * eps_bar * k as f64 / (FLOOR_SAMPLES - 1) as f64;
            kernel.density(x)
        })
        .fold(f64::INFINITY, f64::min);
    KernelFloor {
        eps_bar,
        delta0: 0.99 * min,
    }
}
