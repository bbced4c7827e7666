//! Fully explicit reference solver on a fixed Eulerian window in physical coordinates.
//!
//! Nodes strictly inside `(g, h)` carry the fields; everything outside is zero. Nodes
//! closer than `Δx/2` to a front take `v` by linear interpolation between the front and
//! the nearest regular node, and regular nodes next to a front use the Shortley-Weller
//! stencil with the front as a Dirichlet point.

use crate::bounds::{check_gamma_membership, compute_bounds, AprioriBounds};
use crate::model::{kernel_floor, ProblemConfig};
use crate::stepper::{FrontRecord, MonitorReport, Observables, Snapshot, Trajectory};
use crate::transform::FrontPair;

use super::ValidationError;

/// Margin on the predicted front position when sizing the window.
pub const WINDOW_MARGIN: f64 = 1.2;
/// Fraction of the explicit stability limit used by default.
pub const ORACLE_DT_FRACTION: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Half-width of the window `[-X, X]`.
    pub half_width: f64,
    pub nodes: usize,
    pub dt: f64,
}

impl OracleConfig {
    /// Window from the a-priori growth bound (or `h0 + μ k3 T` when `ρ = 0`) with a 20%
    /// margin, and the largest admissible step.
    pub fn for_problem(cfg: &ProblemConfig, bounds: &AprioriBounds, nodes: usize) -> Self {
        let predicted = match bounds.growth_bound(cfg.horizon) {
            Some(width) => width - cfg.h0,
            None => cfg.h0 + cfg.mu * bounds.k3 * cfg.horizon,
        };
        let half_width = WINDOW_MARGIN * predicted.max(cfg.h0);
        let dx = 2.0 * half_width / (nodes - 1) as f64;
        OracleConfig {
            half_width,
            nodes,
            dt: ORACLE_DT_FRACTION * stability_limit(cfg, bounds, dx),
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.nodes - 1) as f64
    }
}

/// `min(Δx² / (2 d2), 1 / (d1 + L))`
fn stability_limit(cfg: &ProblemConfig, bounds: &AprioriBounds, dx: f64) -> f64 {
    (dx * dx / (2.0 * cfg.d2)).min(1.0 / (cfg.d1 + bounds.lipschitz))
}

struct Window {
    x: Vec<f64>,
    dx: f64,
    half_width: f64,
}

impl Window {
    /// Indices of the nodes strictly inside `(g, h)`.
    fn inside(&self, g: f64, h: f64) -> std::ops::Range<usize> {
        let lo = ((g + self.half_width) / self.dx).floor() as isize + 1;
        let hi = ((h + self.half_width) / self.dx).ceil() as isize - 1;
        let m = self.x.len() as isize;
        let mut lo = lo.clamp(0, m) as usize;
        let mut hi = (hi.clamp(-1, m - 1) + 1) as usize;
        while lo > 0 && self.x[lo - 1] > g {
            lo -= 1;
        }
        while hi < self.x.len() && self.x[hi] < h {
            hi += 1;
        }
        while lo < hi && self.x[lo] <= g {
            lo += 1;
        }
        while hi > lo && self.x[hi - 1] >= h {
            hi -= 1;
        }
        lo..hi
    }

    /// Trapezoid weights over the inside nodes with partial end panels to the fronts.
    fn weights(&self, range: &std::ops::Range<usize>, g: f64, h: f64) -> Vec<f64> {
        range
            .clone()
            .map(|i| {
                let left = if i == range.start { g } else { self.x[i - 1] };
                let right = if i + 1 == range.end { h } else { self.x[i + 1] };
                0.5 * (right - left)
            })
            .collect()
    }
}

/// Runs the reference solver to `cfg.horizon`.
pub fn oracle_run(cfg: &ProblemConfig, ocfg: &OracleConfig) -> Result<Trajectory, ValidationError> {
    cfg.check_parameters()?;
    let floor = kernel_floor(&cfg.kernel, cfg.h0);
    let bounds = compute_bounds(cfg, floor);
    let nx = ocfg.nodes;
    if nx < 5 {
        return Err(ValidationError::BadOracle(format!("{nx} nodes")));
    }
    let dx = ocfg.spacing();
    let limit = ORACLE_DT_FRACTION * stability_limit(cfg, &bounds, dx);
    if !(ocfg.dt > 0.0 && ocfg.dt <= limit * (1.0 + 1e-12)) {
        return Err(ValidationError::BadOracle(format!(
            "dt {:e} outside (0, {limit:e}]",
            ocfg.dt
        )));
    }
    let m = (nx - 1) as f64;
    let window = Window {
        x: (0..nx)
            .map(|i| ocfg.half_width * (2.0 * i as f64 - m) / m)
            .collect(),
        dx,
        half_width: ocfg.half_width,
    };
    let radius = cfg.kernel.radius();
    let reach = (radius / dx).ceil() as usize + 1;
    let kernel_row: Vec<f64> = (0..nx.min(reach + 1))
        .map(|k| cfg.kernel.density(k as f64 * dx))
        .collect();

    let mut solver = Oracle {
        cfg,
        window,
        kernel_row,
        g: -cfg.h0,
        h: cfg.h0,
        u: vec![0.0; nx],
        v: vec![0.0; nx],
    };
    let h0 = cfg.h0;
    for i in solver.window.inside(-h0, h0) {
        let x = solver.window.x[i];
        solver.u[i] = cfg.u0.eval(x, h0);
        solver.v[i] = cfg.v0.eval(x, h0);
    }
    solver.fix_near_front();

    let horizon = cfg.horizon;
    let snaps = cfg.snapshots.max(1);
    let times: Vec<f64> = (0..=snaps)
        .map(|k| horizon * k as f64 / snaps as f64)
        .collect();
    let mut next_snap = 0;
    let mut snapshots = Vec::new();
    let mut fronts = Vec::new();
    let mut obs = FieldRange::default();
    let mut t = 0.0;
    loop {
        let (gdot, hdot) = solver.speeds()?;
        fronts.push(FrontRecord {
            t,
            g: solver.g,
            h: solver.h,
            gdot,
            hdot,
            picard_iters: 1,
            residual: 0.0,
        });
        obs.update(&solver.u, &solver.v);
        if next_snap < times.len() && t >= times[next_snap] - 1e-12 * horizon {
            snapshots.push(solver.snapshot(t, gdot, hdot));
            while next_snap < times.len() && t >= times[next_snap] - 1e-12 * horizon {
                next_snap += 1;
            }
        }
        if t >= horizon {
            break;
        }
        let remaining = horizon - t;
        let dt = if remaining <= ocfg.dt * (1.0 + 1e-9) {
            remaining
        } else {
            ocfg.dt
        };
        solver.step(t, dt, gdot, hdot)?;
        t = if dt == remaining { horizon } else { t + dt };
    }
    if snapshots.last().is_none_or(|s| s.t < t) {
        let last = fronts.last().expect("at least one record");
        snapshots.push(solver.snapshot(t, last.gdot, last.hdot));
    }

    let gamma = check_gamma_membership(&fronts, &bounds, horizon.min(bounds.t0));
    let last = fronts.last().expect("at least one record");
    let monitor = MonitorReport {
        checks: Vec::new(),
        observables: Observables {
            min_w: obs.min_u,
            max_w: obs.max_u,
            min_z: obs.min_v,
            max_z: obs.max_v,
            min_flux_right: f64::NAN,
            max_flux_right: f64::NAN,
            min_flux_left: f64::NAN,
            max_flux_left: f64::NAN,
            max_speed_ratio: f64::NAN,
            max_growth_ratio: f64::NAN,
            min_hdot: fronts.iter().map(|r| r.hdot).fold(f64::INFINITY, f64::min),
            max_gdot: fronts
                .iter()
                .map(|r| r.gdot)
                .fold(f64::NEG_INFINITY, f64::max),
            max_front_asymmetry: fronts.iter().map(|r| (r.g + r.h).abs()).fold(0.0, f64::max),
            max_w_asymmetry: f64::NAN,
            max_z_asymmetry: f64::NAN,
            effective_dx: dx.min(last.h - last.g),
        },
    };
    Ok(Trajectory {
        fronts,
        snapshots,
        picard: Vec::new(),
        bounds,
        monitor,
        gamma,
    })
}

#[derive(Debug)]
struct FieldRange {
    min_u: f64,
    max_u: f64,
    min_v: f64,
    max_v: f64,
}

impl Default for FieldRange {
    fn default() -> Self {
        FieldRange {
            min_u: f64::INFINITY,
            max_u: f64::NEG_INFINITY,
            min_v: f64::INFINITY,
            max_v: f64::NEG_INFINITY,
        }
    }
}

impl FieldRange {
    fn update(&mut self, u: &[f64], v: &[f64]) {
        for (&a, &b) in u.iter().zip(v) {
            self.min_u = self.min_u.min(a);
            self.max_u = self.max_u.max(a);
            self.min_v = self.min_v.min(b);
            self.max_v = self.max_v.max(b);
        }
    }
}

struct Oracle<'a> {
    cfg: &'a ProblemConfig,
    window: Window,
    /// `J(k Δx)` for `k = 0, 1, ...` up to the kernel reach.
    kernel_row: Vec<f64>,
    g: f64,
    h: f64,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl Oracle<'_> {
    fn is_regular(&self, i: usize) -> bool {
        let x = self.window.x[i];
        let half = 0.5 * self.window.dx;
        x - self.g >= half && self.h - x >= half
    }

    fn check_window(&self) -> Result<(), ValidationError> {
        let edge = self.window.half_width - self.window.dx;
        if self.h > edge || self.g < -edge {
            return Err(ValidationError::WindowExceeded {
                g: self.g,
                h: self.h,
                half_width: self.window.half_width,
            });
        }
        Ok(())
    }

    /// Regular nodes adjacent to each front; errors when the domain holds fewer than two.
    fn regular_span(&self) -> Result<(usize, usize), ValidationError> {
        let inside = self.window.inside(self.g, self.h);
        let first = inside.clone().find(|&i| self.is_regular(i));
        let last = inside.clone().rev().find(|&i| self.is_regular(i));
        match (first, last) {
            (Some(a), Some(b)) if b > a => Ok((a, b)),
            _ => Err(ValidationError::BadOracle(format!(
                "domain [{}, {}] resolves fewer than two regular nodes",
                self.g, self.h
            ))),
        }
    }

    /// Linear interpolation of `v` at nodes within `Δx/2` of a front.
    fn fix_near_front(&mut self) {
        let Ok((first, last)) = self.regular_span() else {
            return;
        };
        for i in self.window.inside(self.g, self.h) {
            if i < first {
                let x = self.window.x[i];
                self.v[i] = self.v[first] * (x - self.g) / (self.window.x[first] - self.g);
            } else if i > last {
                let x = self.window.x[i];
                self.v[i] = self.v[last] * (self.h - x) / (self.h - self.window.x[last]);
            }
        }
    }

    /// `v_x` at the fronts from the quadratic through the front and the two nearest
    /// regular nodes.
    fn front_gradients(&self) -> Result<(f64, f64), ValidationError> {
        let (first, last) = self.regular_span()?;
        let x = &self.window.x;
        let slope = |d1: f64, v1: f64, d2: f64, v2: f64| {
            (v1 * d2 * d2 - v2 * d1 * d1) / (d1 * d2 * (d2 - d1))
        };
        let right = -slope(
            self.h - x[last],
            self.v[last],
            self.h - x[last - 1],
            self.v[last - 1],
        );
        let left = slope(
            x[first] - self.g,
            self.v[first],
            x[first + 1] - self.g,
            self.v[first + 1],
        );
        Ok((left, right))
    }

    fn speeds(&self) -> Result<(f64, f64), ValidationError> {
        let (vx_left, vx_right) = self.front_gradients()?;
        let inside = self.window.inside(self.g, self.h);
        let weights = self.window.weights(&inside, self.g, self.h);
        let kernel = &self.cfg.kernel;
        let (mut right, mut left) = (0.0, 0.0);
        for (i, wt) in inside.zip(weights) {
            let x = self.window.x[i];
            right += wt * kernel.tail_mass(self.h - x) * self.u[i];
            left += wt * kernel.tail_mass(x - self.g) * self.u[i];
        }
        let (mu, rho) = (self.cfg.mu, self.cfg.rho);
        Ok((-mu * vx_left - rho * left, -mu * vx_right + rho * right))
    }

    /// `∫_g^h J(x_i - s) u(s) ds` at every inside node.
    fn convolution(&self) -> Vec<f64> {
        let inside = self.window.inside(self.g, self.h);
        let weights = self.window.weights(&inside, self.g, self.h);
        let reach = self.kernel_row.len() - 1;
        let start = inside.start;
        let mut out = vec![0.0; self.u.len()];
        for i in inside.clone() {
            let lo = i.saturating_sub(reach).max(inside.start);
            let hi = (i + reach + 1).min(inside.end);
            out[i] = (lo..hi)
                .map(|j| weights[j - start] * self.kernel_row[i.abs_diff(j)] * self.u[j])
                .sum();
        }
        out
    }

    fn step(&mut self, t: f64, dt: f64, gdot: f64, hdot: f64) -> Result<(), ValidationError> {
        let cfg = self.cfg;
        let conv = self.convolution();
        let inside = self.window.inside(self.g, self.h);
        let (first, last) = self.regular_span()?;
        let x = &self.window.x;
        let mut u = vec![0.0; self.u.len()];
        let mut v = vec![0.0; self.v.len()];
        for i in inside {
            let (ui, vi) = (self.u[i], self.v[i]);
            u[i] = ui + dt * (cfg.d1 * (conv[i] - ui) + cfg.reaction.f1(t, x[i], ui, vi));
            if i < first || i > last {
                continue;
            }
            let (a, left) = if i == first {
                (x[i] - self.g, 0.0)
            } else {
                (self.window.dx, self.v[i - 1])
            };
            let (b, right) = if i == last {
                (self.h - x[i], 0.0)
            } else {
                (self.window.dx, self.v[i + 1])
            };
            let vxx = 2.0 / (a + b) * ((right - vi) / b - (vi - left) / a);
            v[i] = vi + dt * (cfg.d2 * vxx + cfg.reaction.f2(t, x[i], ui, vi));
        }
        self.u = u;
        self.v = v;
        self.g += dt * gdot;
        self.h += dt * hdot;
        self.check_window()?;
        self.fix_near_front();
        for (i, (a, b)) in self.u.iter().zip(&self.v).enumerate() {
            if a.is_nan() || b.is_nan() {
                return Err(ValidationError::BadOracle(format!("NaN at node {i}")));
            }
        }
        Ok(())
    }

    fn snapshot(&self, t: f64, gdot: f64, hdot: f64) -> Snapshot {
        let inside = self.window.inside(self.g, self.h);
        let mut x = vec![self.g];
        let mut w = vec![0.0];
        let mut z = vec![0.0];
        for i in inside {
            x.push(self.window.x[i]);
            w.push(self.u[i]);
            z.push(self.v[i]);
        }
        x.push(self.h);
        w.push(0.0);
        z.push(0.0);
        Snapshot {
            t,
            fronts: FrontPair::new(self.g, self.h, gdot, hdot),
            x,
            w,
            z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InitialProfile, KernelSpec, ReactionModel};

    fn cfg() -> ProblemConfig {
        let mut cfg = ProblemConfig::new(
            KernelSpec::tent(1.0).unwrap(),
            ReactionModel::competition(1.0, 1.0, 1.0),
            InitialProfile::Bump { amp: 0.0 },
            InitialProfile::Bump { amp: 0.0 },
        );
        cfg.horizon = 0.05;
        cfg
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let cfg = cfg();
        let bounds = compute_bounds(&cfg, kernel_floor(&cfg.kernel, cfg.h0));
        let ocfg = OracleConfig::for_problem(&cfg, &bounds, 201);
        let traj = oracle_run(&cfg, &ocfg).unwrap();
        for r in &traj.fronts {
            assert_eq!((r.g, r.h, r.gdot, r.hdot), (-1.0, 1.0, 0.0, 0.0));
        }
        let last = traj.final_snapshot().unwrap();
        assert_eq!(last.t, 0.05);
        assert!(last.w.iter().chain(&last.z).all(|&v| v == 0.0));
    }

    #[test]
    fn window_inside_is_strict() {
        let w = Window {
            x: (0..11).map(|i| -1.0 + 0.2 * i as f64).collect(),
            dx: 0.2,
            half_width: 1.0,
        };
        let r = w.inside(-0.6, 0.6);
        assert!(w.x[r.start] > -0.6 && w.x[r.end - 1] < 0.6);
        assert_eq!(r.len(), 5);
        let wts = w.weights(&w.inside(-0.5, 0.5), -0.5, 0.5);
        assert!((wts.iter().sum::<f64>() - 0.9).abs() < 1e-14);
    }

    #[test]
    fn rejects_unstable_step() {
        let cfg = cfg();
        let bounds = compute_bounds(&cfg, kernel_floor(&cfg.kernel, cfg.h0));
        let mut ocfg = OracleConfig::for_problem(&cfg, &bounds, 201);
        ocfg.dt *= 2.0;
        assert!(matches!(
            oracle_run(&cfg, &ocfg),
            Err(ValidationError::BadOracle(_))
        ));
    }

    #[test]
    fn front_quadratic_is_exact() {
        let cfg = cfg();
        let nx = 41;
        let dx = 2.0 / (nx - 1) as f64;
        let x: Vec<f64> = (0..nx).map(|i| -1.0 + dx * i as f64).collect();
        let (g, h) = (-0.73, 0.81);
        let v = x
            .iter()
            .map(|&x| {
                if x > g && x < h {
                    (x - g) * (h - x)
                } else {
                    0.0
                }
            })
            .collect();
        let oracle = Oracle {
            cfg: &cfg,
            window: Window {
                x,
                dx,
                half_width: 1.0,
            },
            kernel_row: vec![1.0],
            g,
            h,
            u: vec![0.0; nx],
            v,
        };
        let (left, right) = oracle.front_gradients().unwrap();
        assert!((left - (h - g)).abs() < 1e-12);
        assert!((right + (h - g)).abs() < 1e-12);
    }
}
