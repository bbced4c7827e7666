use crate::model::{KernelSpec, ReactionModel};
use crate::transform::{max_abs_zeta, zeta, FrontPair, ReferenceGrid, TransformError};

use super::nonlocal::{kernel_row, nonlocal_with_row};
use super::{settle_negatives, FieldVector, SolverError};

/// Fraction of the monotonicity limit the explicit step may use.
pub const CFL_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy)]
pub struct ExplicitParams<'a> {
    pub kernel: &'a KernelSpec,
    pub d1: f64,
    /// Bound on `|f1 / u|` over the invariant box (`L` for the built-ins).
    pub rate_bound: f64,
    pub t: f64,
    pub dt: f64,
}

/// Grid motion over a step as a front pair carrying the mean speeds.
pub(crate) fn moving_fronts(fp: &FrontPair, fp_next: &FrontPair, dt: f64) -> FrontPair {
    FrontPair::new(fp.g, fp.h, (fp_next.g - fp.g) / dt, (fp_next.h - fp.h) / dt)
}

/// `0.9 / (d1 + rate_bound + max|ζ| / Δy)`
pub fn cfl_limit(
    grid: &ReferenceGrid,
    moving: &FrontPair,
    d1: f64,
    rate_bound: f64,
) -> Result<f64, TransformError> {
    Ok(CFL_FRACTION / (d1 + rate_bound + max_abs_zeta(moving)? / grid.spacing()))
}

/// One forward-Euler step of the transformed nonlocal equation
/// `w_t = d1 (J*w - w) + f1 + ζ w_y`, with the advection upwinded.
pub fn step_u_explicit(
    grid: &ReferenceGrid,
    fp: &FrontPair,
    fp_next: &FrontPair,
    w: &FieldVector,
    z: &FieldVector,
    reaction: &ReactionModel,
    params: ExplicitParams<'_>,
) -> Result<FieldVector, SolverError> {
    if !(fp.length() > 0.0) {
        return Err(TransformError::DegenerateInterval { g: fp.g, h: fp.h }.into());
    }
    let row = kernel_row(grid, fp, params.kernel);
    let conv = nonlocal_with_row(grid, fp, w.as_slice(), &row);
    let t = params.t;
    step_u_with(grid, fp, fp_next, w, &conv, params, |i, x, wi| {
        reaction.f1(t, x, wi, z[i])
    })
}

/// The explicit step with a precomputed nonlocal term `conv = J*w` and a source
/// `source(node, x, w_i)`.
pub fn step_u_with(
    grid: &ReferenceGrid,
    fp: &FrontPair,
    fp_next: &FrontPair,
    w: &FieldVector,
    conv: &[f64],
    params: ExplicitParams<'_>,
    source: impl Fn(usize, f64, f64) -> f64,
) -> Result<FieldVector, SolverError> {
    let mut next = explicit_update(grid, fp, fp_next, w, conv, params, source)?;
    settle_negatives(&mut next, "w")?;
    Ok(FieldVector::from_values(next))
}

/// Raw nodal values of the explicit step, before small negatives are settled.
pub(crate) fn explicit_update(
    grid: &ReferenceGrid,
    fp: &FrontPair,
    fp_next: &FrontPair,
    w: &FieldVector,
    conv: &[f64],
    params: ExplicitParams<'_>,
    source: impl Fn(usize, f64, f64) -> f64,
) -> Result<Vec<f64>, SolverError> {
    let n = grid.len();
    let dt = params.dt;
    let moving = moving_fronts(fp, fp_next, dt);
    let limit = cfl_limit(grid, &moving, params.d1, params.rate_bound)?;
    if dt > limit {
        return Err(SolverError::CflViolated { dt, limit });
    }
    let dy = grid.spacing();
    let w = w.as_slice();
    let mut next = vec![0.0; n];
    for i in 1..n - 1 {
        let y = grid.y(i);
        let x = fp.x_at(y);
        let c = zeta(&moving, y)?;
        let advection = if c > 0.0 {
            c * (w[i + 1] - w[i]) / dy
        } else {
            c * (w[i] - w[i - 1]) / dy
        };
        let rate = params.d1 * (conv[i] - w[i]) + source(i, x, w[i]) + advection;
        next[i] = w[i] + dt * rate;
    }
    Ok(next)
}
