use crate::model::ReactionModel;
use crate::transform::{xi, zeta, FrontPair, ReferenceGrid, TransformError};

use super::explicit_u::moving_fronts;
use super::{settle_negatives, FieldVector, SolverError};

/// Cell Péclet number above which the advection switches from central to upwind.
pub const PECLET_LIMIT: f64 = 2.0;

#[derive(Debug, Clone, Copy)]
pub struct ImplicitParams {
    pub d2: f64,
    /// Time weight in `[1/2, 1]`: 1 is backward Euler, 1/2 Crank-Nicolson.
    pub theta: f64,
    pub t: f64,
    pub dt: f64,
}

/// One θ-scheme step of `z_t = d2 ξ z_yy + ζ z_y + f2` with `z(±1) = 0`.
///
/// `ξ` and `ζ` are frozen at the θ-weighted front pair over the step; `f2` is explicit
/// at the old level.
pub fn step_v_implicit(
    grid: &ReferenceGrid,
    fp: &FrontPair,
    fp_next: &FrontPair,
    z: &FieldVector,
    w: &FieldVector,
    reaction: &ReactionModel,
    params: ImplicitParams,
) -> Result<FieldVector, SolverError> {
    let n = grid.len();
    let ImplicitParams { d2, theta, t, dt } = params;
    if !(fp.length() > 0.0) {
        return Err(TransformError::DegenerateInterval { g: fp.g, h: fp.h }.into());
    }
    let moving = moving_fronts(fp, fp_next, dt);
    let weighted = FrontPair::new(
        (1.0 - theta) * fp.g + theta * fp_next.g,
        (1.0 - theta) * fp.h + theta * fp_next.h,
        moving.gdot,
        moving.hdot,
    );
    let diffusion = d2 * xi(&weighted)?;
    let dy = grid.spacing();
    let zs = z.as_slice();

    let mut sub = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        let y = grid.y(i);
        let c = zeta(&weighted, y)?;
        let dif = diffusion / (dy * dy);
        // operator row: lo z[i-1] + mid z[i] + hi z[i+1]
        let (lo, mid, hi) = if c.abs() * dy / diffusion > PECLET_LIMIT {
            if c > 0.0 {
                (dif, -2.0 * dif - c / dy, dif + c / dy)
            } else {
                (dif - c / dy, -2.0 * dif + c / dy, dif)
            }
        } else {
            let adv = c / (2.0 * dy);
            (dif - adv, -2.0 * dif, dif + adv)
        };
        sub[i] = -theta * dt * lo;
        diag[i] = 1.0 - theta * dt * mid;
        sup[i] = -theta * dt * hi;
        let explicit = lo * zs[i - 1] + mid * zs[i] + hi * zs[i + 1];
        let x = fp.x_at(y);
        rhs[i] = zs[i] + (1.0 - theta) * dt * explicit + dt * reaction.f2(t, x, w[i], zs[i]);
    }
    // Dirichlet rows
    sup[0] = 0.0;
    sub[n - 1] = 0.0;
    let mut next = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
    next[0] = 0.0;
    next[n - 1] = 0.0;
    settle_negatives(&mut next, "z")?;
    Ok(FieldVector::from_values(next))
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, SolverError> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut pivot = diag[0];
    if pivot.abs() < tiny || !pivot.is_finite() {
        return Err(SolverError::SingularSystem { row: 0 });
    }
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot.abs() < tiny || !pivot.is_finite() {
            return Err(SolverError::SingularSystem { row: i });
        }
        c[i] = if i + 1 < n { sup[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}
