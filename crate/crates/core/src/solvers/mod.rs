//! Single-equation steppers on the reference grid. The nonlocal `u`-equation is
//! stepped explicitly and the transformed `v`-equation by a θ-scheme; the quadrature
//! and one-sided differences here are shared with the front laws.

mod explicit_u;
mod gradient;
mod implicit_v;
mod nonlocal;

use serde::Serialize;
use thiserror::Error;

use crate::transform::TransformError;

pub(crate) use explicit_u::explicit_update;
pub use explicit_u::{cfl_limit, step_u_explicit, step_u_with, ExplicitParams};
pub use gradient::{boundary_gradient, Side};
pub use implicit_v::{solve_tridiagonal, step_v_implicit, ImplicitParams};
pub use nonlocal::{kernel_row, nonlocal_operator, nonlocal_with_row};

/// Values in `[-CLAMP_THRESHOLD, 0)` are round-off and are set to zero.
pub const CLAMP_THRESHOLD: f64 = 1e-13;
/// Values below `-ABORT_THRESHOLD` mean the scheme failed.
pub const ABORT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolated { dt: f64, limit: f64 },
    #[error("{field} went negative at node {node}: {value:e}")]
    NegativeOvershoot {
        field: &'static str,
        node: usize,
        value: f64,
    },
    #[error("tridiagonal system singular at row {row}")]
    SingularSystem { row: usize },
    #[error("Picard iteration diverged at t = {t}: residuals {residuals:?}")]
    PicardDiverged { t: f64, residuals: Vec<f64> },
    #[error("invariant `{invariant}` breached at t = {t}: {detail}")]
    InvariantBreached {
        invariant: String,
        t: f64,
        detail: String,
    },
    #[error("time step underflow at t = {t}: dt = {dt:e}")]
    HorizonUnreachable { t: f64, dt: f64 },
}

/// Nodal values aligned with a [`crate::transform::ReferenceGrid`]; both end nodes are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FieldVector {
    values: Vec<f64>,
}

impl FieldVector {
    pub fn zeros(n: usize) -> Self {
        FieldVector {
            values: vec![0.0; n],
        }
    }

    /// Takes the values and pins both end nodes to zero.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        if let Some(first) = values.first_mut() {
            *first = 0.0;
        }
        if let Some(last) = values.last_mut() {
            *last = 0.0;
        }
        FieldVector { values }
    }

    /// Samples `f` at the reference nodes.
    pub fn from_fn(nodes: &[f64], f: impl Fn(f64) -> f64) -> Self {
        FieldVector::from_values(nodes.iter().map(|&y| f(y)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max_j |f(y_j) - f(-y_j)|`
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|j| (self.values[j] - self.values[n - 1 - j]).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for FieldVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Clamps round-off negatives and rejects real overshoots.
pub(crate) fn settle_negatives(values: &mut [f64], field: &'static str) -> Result<(), SolverError> {
    for (node, v) in values.iter_mut().enumerate() {
        if *v < -ABORT_THRESHOLD || v.is_nan() {
            return Err(SolverError::NegativeOvershoot {
                field,
                node,
                value: *v,
            });
        }
        if *v < 0.0 && *v >= -CLAMP_THRESHOLD {
            *v = 0.0;
        }
    }
    Ok(())
}
