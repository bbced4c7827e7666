//! Runtime checks of the a-priori bounds against accepted states.

use serde::Serialize;

use crate::bounds::{AprioriBounds, SPEED_SLACK};
use crate::model::ProblemConfig;
use crate::solvers::{boundary_gradient, Side, SolverError, ABORT_THRESHOLD};

use super::SimState;

/// Relative slack on `w ≤ k1` and `z ≤ k2`.
pub const FIELD_SLACK: f64 = 1e-6;
/// Relative tolerance (to `h0` / `k1`) for the symmetry checks.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorCheck {
    pub name: &'static str,
    pub enabled: bool,
    pub passed: bool,
    pub first_violation: Option<f64>,
    pub detail: Option<String>,
}

impl MonitorCheck {
    fn new(name: &'static str, enabled: bool, why_not: Option<&str>) -> Self {
        MonitorCheck {
            name,
            enabled,
            passed: true,
            first_violation: None,
            detail: why_not.map(str::to_string),
        }
    }

    fn fail(&mut self, t: f64, detail: String) {
        if self.enabled && self.passed {
            self.passed = false;
            self.first_violation = Some(t);
            self.detail = Some(detail);
        }
    }
}

/// Extremes observed over the run, whether or not a check is enabled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    pub min_w: f64,
    pub max_w: f64,
    pub min_z: f64,
    pub max_z: f64,
    /// Range of `-v_x(t, h(t))` and of `v_x(t, g(t))` over `t > 0`.
    pub min_flux_right: f64,
    pub max_flux_right: f64,
    pub min_flux_left: f64,
    pub max_flux_left: f64,
    /// `max(h', -g') / R(t)`
    pub max_speed_ratio: f64,
    /// `(h - g) / growth bound`
    pub max_growth_ratio: f64,
    pub min_hdot: f64,
    pub max_gdot: f64,
    pub max_front_asymmetry: f64,
    pub max_w_asymmetry: f64,
    pub max_z_asymmetry: f64,
    /// `(h - g) / (N - 1)` at the last accepted state.
    pub effective_dx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub checks: Vec<MonitorCheck>,
    pub observables: Observables,
}

impl MonitorReport {
    /// True when every enabled check passed.
    pub fn clean(&self) -> bool {
        self.checks.iter().all(|c| !c.enabled || c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&MonitorCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&MonitorCheck> {
        self.checks
            .iter()
            .filter(|c| c.enabled && !c.passed)
            .collect()
    }
}

const W_BOUNDS: usize = 0;
const Z_BOUNDS: usize = 1;
const FRONT_MONOTONE: usize = 2;
const SPEED_CEILING: usize = 3;
const FLUX_BOUND: usize = 4;
const GROWTH_BOUND: usize = 5;
const SYMMETRY: usize = 6;

pub(crate) struct InvariantMonitor {
    checks: Vec<MonitorCheck>,
    obs: Observables,
    k1: f64,
    k2: f64,
    k3: f64,
    h0: f64,
    last: Option<(f64, f64)>,
}

impl InvariantMonitor {
    pub fn new(cfg: &ProblemConfig, bounds: &AprioriBounds) -> Self {
        let positive = cfg.check_initial_data().is_ok();
        let moving = cfg.mu > 0.0 && cfg.rho > 0.0;
        let monotone_note = match (moving, positive) {
            (true, true) => None,
            (false, _) => Some("requires mu > 0 and rho > 0"),
            (_, false) => Some("requires positive initial data"),
        };
        let flux_note = (!positive).then_some("requires positive initial data");
        let growth_note = bounds
            .rho_zero
            .then_some("growth bound undefined for rho = 0");
        let sym_note = (!cfg.is_symmetric()).then_some("configuration is not symmetric");
        let checks = vec![
            MonitorCheck::new("w_bounds", true, None),
            MonitorCheck::new("z_bounds", true, None),
            MonitorCheck::new("front_monotone", monotone_note.is_none(), monotone_note),
            MonitorCheck::new("speed_ceiling", true, None),
            MonitorCheck::new("flux_bound", flux_note.is_none(), flux_note),
            MonitorCheck::new("growth_bound", growth_note.is_none(), growth_note),
            MonitorCheck::new("symmetry", sym_note.is_none(), sym_note),
        ];
        InvariantMonitor {
            checks,
            obs: Observables {
                min_w: f64::INFINITY,
                max_w: f64::NEG_INFINITY,
                min_z: f64::INFINITY,
                max_z: f64::NEG_INFINITY,
                min_flux_right: f64::INFINITY,
                max_flux_right: f64::NEG_INFINITY,
                min_flux_left: f64::INFINITY,
                max_flux_left: f64::NEG_INFINITY,
                max_speed_ratio: 0.0,
                max_growth_ratio: 0.0,
                min_hdot: f64::INFINITY,
                max_gdot: f64::NEG_INFINITY,
                max_front_asymmetry: 0.0,
                max_w_asymmetry: 0.0,
                max_z_asymmetry: 0.0,
                effective_dx: 0.0,
            },
            k1: bounds.k1,
            k2: bounds.k2,
            k3: bounds.k3,
            h0: cfg.h0,
            last: None,
        }
    }

    /// Records one accepted state. Field-bound breaches abort the run.
    pub fn observe(&mut self, s: &SimState, bounds: &AprioriBounds) -> Result<(), SolverError> {
        let t = s.t;
        let fp = &s.fronts;
        let o = &mut self.obs;
        let (wmin, wmax, zmin, zmax) = (s.w.min(), s.w.max(), s.z.min(), s.z.max());
        o.min_w = o.min_w.min(wmin);
        o.max_w = o.max_w.max(wmax);
        o.min_z = o.min_z.min(zmin);
        o.max_z = o.max_z.max(zmax);
        o.effective_dx = fp.length() / (s.w.len() - 1) as f64;

        let field_check = |min: f64, max: f64, cap: f64| {
            if min < -ABORT_THRESHOLD || max > cap * (1.0 + FIELD_SLACK) {
                Some(format!("range [{min:e}, {max}] outside [0, {cap}]"))
            } else {
                None
            }
        };
        if let Some(detail) = field_check(wmin, wmax, self.k1) {
            self.checks[W_BOUNDS].fail(t, detail.clone());
            return Err(SolverError::InvariantBreached {
                invariant: "0 <= w <= k1".into(),
                t,
                detail,
            });
        }
        if let Some(detail) = field_check(zmin, zmax, self.k2) {
            self.checks[Z_BOUNDS].fail(t, detail.clone());
            return Err(SolverError::InvariantBreached {
                invariant: "0 <= z <= k2".into(),
                t,
                detail,
            });
        }

        o.min_hdot = o.min_hdot.min(fp.hdot);
        o.max_gdot = o.max_gdot.max(fp.gdot);
        if let Some((g_prev, h_prev)) = self.last {
            if !(fp.h > h_prev && fp.g < g_prev && fp.hdot > 0.0 && fp.gdot < 0.0) {
                let detail = format!(
                    "g: {g_prev} -> {}, h: {h_prev} -> {}, g' = {}, h' = {}",
                    fp.g, fp.h, fp.gdot, fp.hdot
                );
                self.checks[FRONT_MONOTONE].fail(t, detail);
            }
        }
        self.last = Some((fp.g, fp.h));

        let ceiling = bounds.speed_envelope(t);
        let ratio = fp.hdot.max(-fp.gdot) / ceiling;
        o.max_speed_ratio = o.max_speed_ratio.max(ratio);
        if ratio > 1.0 + SPEED_SLACK {
            self.checks[SPEED_CEILING].fail(
                t,
                format!("speed {} exceeds R(t) = {ceiling}", fp.hdot.max(-fp.gdot)),
            );
        }

        let right = -boundary_gradient(&s.z, fp, Side::Right);
        let left = boundary_gradient(&s.z, fp, Side::Left);
        o.min_flux_right = o.min_flux_right.min(right);
        o.max_flux_right = o.max_flux_right.max(right);
        o.min_flux_left = o.min_flux_left.min(left);
        o.max_flux_left = o.max_flux_left.max(left);
        let cap = self.k3 * (1.0 + SPEED_SLACK);
        if !(right > 0.0 && right <= cap && left > 0.0 && left <= cap) {
            self.checks[FLUX_BOUND].fail(
                t,
                format!("-v_x(h) = {right}, v_x(g) = {left}, k3 = {}", self.k3),
            );
        }

        if let Some(bound) = bounds.growth_bound(t) {
            let r = fp.length() / bound;
            o.max_growth_ratio = o.max_growth_ratio.max(r);
            if r > 1.0 + SPEED_SLACK {
                self.checks[GROWTH_BOUND].fail(t, format!("h - g = {} > {bound}", fp.length()));
            }
        }

        let fa = (fp.g + fp.h).abs();
        let wa = s.w.max_asymmetry();
        let za = s.z.max_asymmetry();
        o.max_front_asymmetry = o.max_front_asymmetry.max(fa);
        o.max_w_asymmetry = o.max_w_asymmetry.max(wa);
        o.max_z_asymmetry = o.max_z_asymmetry.max(za);
        if fa > SYMMETRY_TOLERANCE * self.h0
            || wa > SYMMETRY_TOLERANCE * self.k1
            || za > SYMMETRY_TOLERANCE * self.k2
        {
            self.checks[SYMMETRY].fail(t, format!("|g+h| = {fa:e}, w: {wa:e}, z: {za:e}"));
        }
        Ok(())
    }

    pub fn report(&self) -> MonitorReport {
        MonitorReport {
            checks: self.checks.clone(),
            observables: self.obs.clone(),
        }
    }
}
