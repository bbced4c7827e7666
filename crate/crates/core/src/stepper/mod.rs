//! Time marching of the coupled system.
//!
//! Each step is a fixed-point iteration on the new front positions: the fronts are
//! guessed, both fields are advanced on the guessed domain, the front laws are evaluated
//! on the result, and the trapezoidal front update is repeated until successive guesses
//! agree. With `picard_max = 1` this is the plain forward coupling.

mod monitor;

use serde::Serialize;

use crate::bounds::{check_gamma_membership, compute_bounds, AprioriBounds, GammaReport};
use crate::model::{kernel_floor, ConfigError, KernelSpec, ProblemConfig, TimeStep};
use crate::solvers::{
    boundary_gradient, kernel_row, nonlocal_with_row, step_u_with, step_v_implicit, ExplicitParams,
    FieldVector, ImplicitParams, Side, SolverError,
};
use crate::transform::{max_abs_zeta, FrontPair, ReferenceGrid};

use monitor::InvariantMonitor;
pub use monitor::{MonitorCheck, MonitorReport, Observables, FIELD_SLACK, SYMMETRY_TOLERANCE};

/// Fraction of the monotonicity limit used by the automatic time step.
pub const AUTO_DT_FRACTION: f64 = 0.45;
/// Steps below `DT_FLOOR · T` abort the run.
pub const DT_FLOOR: f64 = 1e-12;
/// Consecutive residual increases that count as divergence.
const DIVERGENCE_STREAK: usize = 3;

/// One time level on the reference grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// Positions and the front speeds evaluated at this level.
    pub fronts: FrontPair,
    pub w: FieldVector,
    pub z: FieldVector,
    pub picard_iters: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontRecord {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub gdot: f64,
    pub hdot: f64,
    pub picard_iters: usize,
    pub residual: f64,
}

impl FrontRecord {
    fn of(s: &SimState) -> Self {
        FrontRecord {
            t: s.t,
            g: s.fronts.g,
            h: s.fronts.h,
            gdot: s.fronts.gdot,
            hdot: s.fronts.hdot,
            picard_iters: s.picard_iters,
            residual: s.residual,
        }
    }
}

/// Fields at one output time with their physical node positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub fronts: FrontPair,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// One record per accepted step, starting at `t = 0`.
    pub fronts: Vec<FrontRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Residual history of the fixed-point loop, per step.
    pub picard: Vec<Vec<f64>>,
    pub bounds: AprioriBounds,
    pub monitor: MonitorReport,
    pub gamma: GammaReport,
}

impl Trajectory {
    pub fn final_snapshot(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn final_fronts(&self) -> Option<&FrontRecord> {
        self.fronts.last()
    }
}

/// Front speeds `(g', h')` from the front laws:
/// `h' = -μ v_x(h) + ρ ∫_g^h 𝒥(h - x) u(x) dx` and the mirror law for `g`.
pub fn front_speeds(
    grid: &ReferenceGrid,
    fronts: &FrontPair,
    w: &FieldVector,
    z: &FieldVector,
    kernel: &KernelSpec,
    mu: f64,
    rho: f64,
) -> (f64, f64) {
    let len = fronts.length();
    let weights = grid.trapezoid_weights();
    let (mut right, mut left) = (0.0, 0.0);
    let reach = kernel.radius();
    for (j, (&y, &wt)) in grid.nodes().iter().zip(&weights).enumerate() {
        let wj = w[j];
        if wj == 0.0 {
            continue;
        }
        let to_right = 0.5 * len * (1.0 - y);
        let to_left = 0.5 * len * (1.0 + y);
        if to_right < reach {
            right += wt * kernel.tail_mass(to_right) * wj;
        }
        if to_left < reach {
            left += wt * kernel.tail_mass(to_left) * wj;
        }
    }
    let vx_right = boundary_gradient(z, fronts, Side::Right);
    let vx_left = boundary_gradient(z, fronts, Side::Left);
    let hdot = -mu * vx_right + rho * 0.5 * len * right;
    let gdot = -mu * vx_left - rho * 0.5 * len * left;
    (gdot, hdot)
}

/// A configured solver: grid, bounds and kernel cache for one problem instance.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: ProblemConfig,
    grid: ReferenceGrid,
    bounds: AprioriBounds,
}

impl Simulation {
    /// Uses the deterministic kernel floor without enforcing the kernel hypotheses.
    pub fn new(cfg: ProblemConfig) -> Result<Self, ConfigError> {
        cfg.check_parameters()?;
        let floor = kernel_floor(&cfg.kernel, cfg.h0);
        let bounds = compute_bounds(&cfg, floor);
        Ok(Self::with_bounds(cfg, bounds))
    }

    pub fn with_bounds(cfg: ProblemConfig, bounds: AprioriBounds) -> Self {
        let grid = ReferenceGrid::new(cfg.nodes);
        Simulation { cfg, grid, bounds }
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &ReferenceGrid {
        &self.grid
    }

    pub fn bounds(&self) -> &AprioriBounds {
        &self.bounds
    }

    pub fn initial_state(&self) -> SimState {
        let h0 = self.cfg.h0;
        let w = FieldVector::from_fn(self.grid.nodes(), |y| self.cfg.u0.eval(h0 * y, h0));
        let z = FieldVector::from_fn(self.grid.nodes(), |y| self.cfg.v0.eval(h0 * y, h0));
        let mut fronts = FrontPair::at_rest(-h0, h0);
        let (gdot, hdot) = self.speeds(&fronts, &w, &z);
        fronts.gdot = gdot;
        fronts.hdot = hdot;
        SimState {
            t: 0.0,
            fronts,
            w,
            z,
            picard_iters: 0,
            residual: 0.0,
        }
    }

    fn speeds(&self, fronts: &FrontPair, w: &FieldVector, z: &FieldVector) -> (f64, f64) {
        front_speeds(
            &self.grid,
            fronts,
            w,
            z,
            &self.cfg.kernel,
            self.cfg.mu,
            self.cfg.rho,
        )
    }

    /// `0.45 / (d1 + L + max|ζ| / Δy)` from the speeds stored in `state`.
    pub fn auto_dt(&self, state: &SimState) -> f64 {
        let zeta = max_abs_zeta(&state.fronts).unwrap_or(f64::INFINITY);
        AUTO_DT_FRACTION / (self.cfg.d1 + self.bounds.lipschitz + zeta / self.grid.spacing())
    }

    /// One coupled step of size `dt`; returns the new state and the residual history.
    pub fn advance_step(
        &self,
        state: &SimState,
        dt: f64,
    ) -> Result<(SimState, Vec<f64>), SolverError> {
        let cfg = &self.cfg;
        let old = state.fronts;
        let t = state.t;
        let row = kernel_row(&self.grid, &old, &cfg.kernel);
        let conv = nonlocal_with_row(&self.grid, &old, state.w.as_slice(), &row);
        let explicit = ExplicitParams {
            kernel: &cfg.kernel,
            d1: cfg.d1,
            rate_bound: self.bounds.lipschitz,
            t,
            dt,
        };
        let implicit = ImplicitParams {
            d2: cfg.d2,
            theta: cfg.theta,
            t,
            dt,
        };
        let reaction = &cfg.reaction;
        let z_old = &state.z;

        let mut guess = FrontPair::at_rest(old.g + dt * old.gdot, old.h + dt * old.hdot);
        let mut residuals = Vec::new();
        let mut streak = 0;
        for k in 1..=cfg.picard_max {
            let w = step_u_with(
                &self.grid,
                &old,
                &guess,
                &state.w,
                &conv,
                explicit,
                |i, x, wi| reaction.f1(t, x, wi, z_old[i]),
            )?;
            let z = step_v_implicit(
                &self.grid, &old, &guess, z_old, &state.w, reaction, implicit,
            )?;
            let (gdot, hdot) = self.speeds(&guess, &w, &z);
            let next = FrontPair::at_rest(
                old.g + 0.5 * dt * (old.gdot + gdot),
                old.h + 0.5 * dt * (old.hdot + hdot),
            );
            let residual = (next.g - guess.g).abs().max((next.h - guess.h).abs()) / dt;
            if let Some(&prev) = residuals.last() {
                streak = if residual > prev { streak + 1 } else { 0 };
            }
            residuals.push(residual);
            if streak >= DIVERGENCE_STREAK || !residual.is_finite() {
                return Err(SolverError::PicardDiverged { t, residuals });
            }
            if residual < cfg.picard_tol || k == cfg.picard_max {
                let fronts = FrontPair::new(guess.g, guess.h, gdot, hdot);
                let new_state = SimState {
                    t: t + dt,
                    fronts,
                    w,
                    z,
                    picard_iters: k,
                    residual,
                };
                return Ok((new_state, residuals));
            }
            guess = next;
        }
        unreachable!("picard_max >= 1 is checked by the config")
    }

    /// Marches to the horizon. Returns the trajectory up to the failure point alongside any
    /// error, so callers can still report it.
    pub fn run_partial(&self) -> (Trajectory, Option<SolverError>) {
        let cfg = &self.cfg;
        let horizon = cfg.horizon;
        let mut monitor = InvariantMonitor::new(cfg, &self.bounds);
        let mut state = self.initial_state();
        let mut fronts = vec![FrontRecord::of(&state)];
        let mut picard = Vec::new();
        let mut snapshots = Vec::new();
        let snapshot_times: Vec<f64> = (0..=cfg.snapshots.max(1))
            .map(|k| horizon * k as f64 / cfg.snapshots.max(1) as f64)
            .collect();
        let mut next_snapshot = 0;

        let mut error = monitor.observe(&state, &self.bounds).err();
        self.maybe_snapshot(&state, &snapshot_times, &mut next_snapshot, &mut snapshots);

        let auto = matches!(cfg.dt, TimeStep::Auto);
        let mut dt = match cfg.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Auto => self.auto_dt(&state),
        };
        let mut steps = 0usize;
        while error.is_none() && state.t < horizon {
            if auto && steps > 0 && steps.is_multiple_of(cfg.recheck_every) {
                dt = self.auto_dt(&state);
            }
            let remaining = horizon - state.t;
            // land exactly on the horizon, absorbing a sliver of round-off
            let step = if remaining <= dt * (1.0 + 1e-9) {
                remaining
            } else {
                dt
            };
            match self.advance_step(&state, step) {
                Ok((mut next, history)) => {
                    if step == remaining {
                        next.t = horizon;
                    }
                    state = next;
                    steps += 1;
                    fronts.push(FrontRecord::of(&state));
                    picard.push(history);
                    error = monitor.observe(&state, &self.bounds).err();
                    self.maybe_snapshot(
                        &state,
                        &snapshot_times,
                        &mut next_snapshot,
                        &mut snapshots,
                    );
                }
                Err(SolverError::CflViolated { limit, .. }) if auto => {
                    dt = (0.5 * dt).min(limit * AUTO_DT_FRACTION / 0.9);
                    if dt < DT_FLOOR * horizon {
                        error = Some(SolverError::HorizonUnreachable { t: state.t, dt });
                    }
                }
                Err(e) => error = Some(e),
            }
        }
        if snapshots.last().is_none_or(|s| s.t < state.t) {
            snapshots.push(self.snapshot(&state));
        }
        let window = horizon.min(self.bounds.t0);
        let gamma = check_gamma_membership(&fronts, &self.bounds, window);
        let trajectory = Trajectory {
            fronts,
            snapshots,
            picard,
            bounds: self.bounds.clone(),
            monitor: monitor.report(),
            gamma,
        };
        (trajectory, error)
    }

    pub fn run(&self) -> Result<Trajectory, SolverError> {
        match self.run_partial() {
            (traj, None) => Ok(traj),
            (_, Some(e)) => Err(e),
        }
    }

    fn maybe_snapshot(
        &self,
        state: &SimState,
        times: &[f64],
        next: &mut usize,
        out: &mut Vec<Snapshot>,
    ) {
        let slack = 1e-12 * self.cfg.horizon;
        if *next < times.len() && state.t >= times[*next] - slack {
            out.push(self.snapshot(state));
            while *next < times.len() && state.t >= times[*next] - slack {
                *next += 1;
            }
        }
    }

    fn snapshot(&self, state: &SimState) -> Snapshot {
        Snapshot {
            t: state.t,
            fronts: state.fronts,
            x: self.grid.physical_nodes(&state.fronts),
            w: state.w.as_slice().to_vec(),
            z: state.z.as_slice().to_vec(),
        }
    }
}

/// Builds a [`Simulation`] and runs it to the horizon.
pub fn run(cfg: ProblemConfig) -> Result<Trajectory, crate::Error> {
    Ok(Simulation::new(cfg)?.run()?)
}
