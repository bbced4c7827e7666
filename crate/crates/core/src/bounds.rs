//! A-priori constants: solution ceilings `k1, k2`, flux ceiling `k3`, speed envelope `R(t)`,
//! and the short-time window constants (`eps0, M, T0, R̄, ρc0, ρc0*`) that define the
//! admissible front set `Γ_T`. They are monitors only; the scheme never reads them except
//! `L` in the time-step bound.

use serde::Serialize;

use crate::model::{KernelFloor, ProblemConfig};
use crate::stepper::FrontRecord;

/// Slack on the speed ceilings checked against solver output.
pub const SPEED_SLACK: f64 = 0.05;
/// Absolute slack on `h(T) - g(T) ≤ M`.
pub const WIDTH_SLACK: f64 = 1e-9;
/// Panels of the trapezoid integrals of `u0` near the fronts.
const EDGE_PANELS: usize = 1000;

/// Sup norms of the initial data, sampled at the grid nodes on `[-h0, h0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialNorms {
    pub u0_sup: f64,
    pub v0_sup: f64,
    /// `‖v0'‖∞` from node difference quotients.
    pub v0_lip: f64,
    /// `L(u0)`, informational.
    pub u0_lip: f64,
}

impl InitialNorms {
    pub fn sample(cfg: &ProblemConfig) -> Self {
        let n = cfg.nodes;
        let h0 = cfg.h0;
        let xs: Vec<f64> = (0..n).map(|j| h0 * crate::model::node(j, n)).collect();
        let u: Vec<f64> = xs.iter().map(|&x| cfg.u0.eval(x, h0)).collect();
        let v: Vec<f64> = xs.iter().map(|&x| cfg.v0.eval(x, h0)).collect();
        let sup = |s: &[f64]| s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lip = |s: &[f64]| {
            s.windows(2)
                .zip(xs.windows(2))
                .map(|(f, x)| (f[1] - f[0]).abs() / (x[1] - x[0]))
                .fold(0.0f64, f64::max)
        };
        InitialNorms {
            u0_sup: sup(&u),
            v0_sup: sup(&v),
            v0_lip: lip(&v),
            u0_lip: lip(&u),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriBounds {
    pub k1: f64,
    pub k2: f64,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[serde(rename = "Lstar")]
    pub lipschitz_x: f64,
    pub k3: f64,
    pub eps0: f64,
    #[serde(rename = "M")]
    pub width_cap: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "Rbar")]
    pub rbar: f64,
    pub rho_c0: f64,
    pub rho_c0_star: f64,
    pub mu: f64,
    pub rho: f64,
    pub h0: f64,
    pub norms: InitialNorms,
    pub floor: KernelFloor,
    /// `L(J)`, informational; absent for the step kernel.
    pub kernel_lipschitz: Option<f64>,
    /// `ρ = 0`: bounds dividing by `ρ` are not computed.
    pub rho_zero: bool,
    /// `μ = 0`: the `eps0` window collapses.
    pub mu_zero: bool,
    /// `ρc0 = 0` or `ρc0* = 0`: the front-growth floor cannot be monitored.
    pub growth_floor_disabled: bool,
    pub warnings: Vec<String>,
}

/// Computes every bound from the configuration, sampling the initial norms on the grid.
pub fn compute_bounds(cfg: &ProblemConfig, floor: KernelFloor) -> AprioriBounds {
    compute_bounds_with(cfg, floor, InitialNorms::sample(cfg))
}

pub fn compute_bounds_with(
    cfg: &ProblemConfig,
    floor: KernelFloor,
    norms: InitialNorms,
) -> AprioriBounds {
    let (mu, rho, h0) = (cfg.mu, cfg.rho, cfg.h0);
    let m = &cfg.reaction;
    let k1 = norms.u0_sup.max(m.k0());
    let k2 = norms.v0_sup.max(m.theta(k1));
    let lipschitz = m.lipschitz(k1, k2);
    let lipschitz_x = m.lipschitz_x(k1, k2);
    let k3 = (1.0 / h0)
        .max((lipschitz / (2.0 * cfg.d2)).sqrt())
        .max(norms.v0_lip / k2);

    let mut warnings = Vec::new();
    let rho_zero = rho == 0.0;
    let mu_zero = mu == 0.0;
    // 8μk3/(ρk1) is +∞ when ρ = 0
    let growth_cap = if rho_zero {
        f64::INFINITY
    } else {
        8.0 * mu * k3 / (rho * k1)
    };
    let eps0 = 0.5 * floor.eps_bar.min(growth_cap);
    let width_cap = 2.0 * h0 + eps0 / 4.0;
    let speed_sum = 2.0 * mu * k3 + rho * k1 * width_cap;
    let t0 = if speed_sum > 0.0 {
        eps0 / (4.0 * speed_sum)
    } else {
        0.0
    };
    let rbar = mu * k3 + rho * k1 * width_cap;

    let decay = (-(cfg.d1 + lipschitz) * t0).exp();
    let prefactor = 0.25 * eps0 * floor.delta0 * rho * decay;
    let right = trapezoid(|x| cfg.u0.eval(x, h0), h0 - eps0 / 4.0, h0);
    let left = trapezoid(|x| cfg.u0.eval(x, h0), -h0, -h0 + eps0 / 4.0);
    let rho_c0 = prefactor * right;
    let rho_c0_star = prefactor * left;

    if rho_zero {
        warnings.push("rho = 0: rho_c0 set to 0 and growth bound not computed".into());
    }
    if mu_zero {
        warnings.push("mu = 0: eps0 window is empty".into());
    }
    let growth_floor_disabled = !(rho_c0 > 0.0 && rho_c0_star > 0.0);
    if growth_floor_disabled && !rho_zero {
        warnings.push(
            "u0 vanishes next to a front: rho_c0 = 0, front-growth-floor monitor disabled".into(),
        );
    }

    AprioriBounds {
        k1,
        k2,
        lipschitz,
        lipschitz_x,
        k3,
        eps0,
        width_cap,
        t0,
        rbar,
        rho_c0,
        rho_c0_star,
        mu,
        rho,
        h0,
        norms,
        floor,
        kernel_lipschitz: cfg.kernel.lipschitz_constant(),
        rho_zero,
        mu_zero,
        growth_floor_disabled,
        warnings,
    }
}

fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / EDGE_PANELS as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for k in 1..EDGE_PANELS {
        acc += f(a + k as f64 * h);
    }
    acc * h
}

impl AprioriBounds {
    /// Speed envelope `R(t) = μk3 + 2(h0ρk1 + μk3) e^{ρk1 t}`.
    pub fn speed_envelope(&self, t: f64) -> f64 {
        let mk3 = self.mu * self.k3;
        mk3 + 2.0 * (self.h0 * self.rho * self.k1 + mk3) * (self.rho * self.k1 * t).exp()
    }

    /// Width bound `2[h0 + μk3/(ρk1)] e^{ρk1 t}`; `None` when `ρ = 0`.
    pub fn growth_bound(&self, t: f64) -> Option<f64> {
        if self.rho_zero || self.k1 <= 0.0 {
            return None;
        }
        let rk = self.rho * self.k1;
        Some(2.0 * (self.h0 + self.mu * self.k3 / rk) * (rk * t).exp())
    }

    /// Whether `0 < ρc0, ρc0* ≤ ρh0k1 < R̄ ≤ R(t)` and `0 < eps0 < min{eps_bar, 8μk3/(ρk1)}`.
    pub fn chain_holds(&self, t: f64) -> bool {
        let cap = self.rho * self.h0 * self.k1;
        let eps_ok = self.eps0 > 0.0
            && self.eps0 < self.floor.eps_bar
            && (self.rho_zero || self.eps0 < 8.0 * self.mu * self.k3 / (self.rho * self.k1));
        self.rho_c0 > 0.0
            && self.rho_c0_star > 0.0
            && self.rho_c0 <= cap
            && self.rho_c0_star <= cap
            && cap < self.rbar
            && self.rbar <= self.speed_envelope(t)
            && eps_ok
    }
}

/// One condition of the `Γ_T` membership check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub name: String,
    pub holds: bool,
    pub first_violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaReport {
    pub window_end: f64,
    pub records_checked: usize,
    /// Set when `ρ = 0` or `μ = 0`; failures are then expected.
    pub degenerate: bool,
    pub conditions: Vec<ConditionReport>,
}

impl GammaReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Checks `ρc0 ≤ h' ≤ R̄`, `-R̄ ≤ g' ≤ -ρc0*` on `[0, window_end]` and `h - g ≤ M` at
/// `window_end`. Upper speed bounds carry [`SPEED_SLACK`], the width [`WIDTH_SLACK`].
pub fn check_gamma_membership(
    fronts: &[FrontRecord],
    bounds: &AprioriBounds,
    window_end: f64,
) -> GammaReport {
    let window: Vec<&FrontRecord> = fronts
        .iter()
        .filter(|r| r.t <= window_end * (1.0 + 1e-12))
        .collect();
    let ceiling = bounds.rbar * (1.0 + SPEED_SLACK);
    let mut conditions = Vec::new();
    let mut check = |name: &str, pred: &dyn Fn(&FrontRecord) -> bool| {
        let first = window.iter().find(|r| !pred(r)).map(|r| r.t);
        conditions.push(ConditionReport {
            name: name.into(),
            holds: first.is_none(),
            first_violation: first,
        });
    };
    check("rho_c0 <= h'", &|r| r.hdot >= bounds.rho_c0 && r.hdot > 0.0);
    check("h' <= Rbar", &|r| r.hdot <= ceiling);
    check("-Rbar <= g'", &|r| r.gdot >= -ceiling);
    check("g' <= -rho_c0*", &|r| {
        r.gdot <= -bounds.rho_c0_star && r.gdot < 0.0
    });
    let last = window.last();
    let width_ok = last.is_none_or(|r| r.h - r.g <= bounds.width_cap + WIDTH_SLACK);
    conditions.push(ConditionReport {
        name: "h(T) - g(T) <= M".into(),
        holds: width_ok,
        first_violation: if width_ok { None } else { last.map(|r| r.t) },
    });
    GammaReport {
        window_end,
        records_checked: window.len(),
        degenerate: bounds.rho_zero || bounds.mu_zero,
        conditions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InitialProfile, KernelSpec, ReactionModel};

    fn cfg() -> ProblemConfig {
        ProblemConfig::new(
            KernelSpec::tent(1.0).unwrap(),
            ReactionModel::competition(1.0, 1.0, 1.0),
            InitialProfile::Bump { amp: 0.5 },
            InitialProfile::Bump { amp: 0.5 },
        )
    }

    fn floor() -> KernelFloor {
        KernelFloor {
            eps_bar: 0.125,
            delta0: 0.86,
        }
    }

    #[test]
    fn k3_example() {
        // h0 = 1, L = 2, d2 = 1, |v0'| = 1, k2 = 1
        let mut c = cfg();
        c.reaction = ReactionModel::Custom(match ReactionModel::inert() {
            ReactionModel::Custom(mut r) => {
                r.lipschitz = Some(std::sync::Arc::new(|_, _| 2.0));
                r
            }
            _ => unreachable!(),
        });
        let norms = InitialNorms {
            u0_sup: 1.0,
            v0_sup: 1.0,
            v0_lip: 1.0,
            u0_lip: 1.0,
        };
        let b = compute_bounds_with(&c, floor(), norms);
        assert_eq!(b.k2, 1.0);
        assert_eq!(b.lipschitz, 2.0);
        assert_eq!(b.k3, 1.0);
    }

    #[test]
    fn speed_envelope_example() {
        let mut b = compute_bounds(&cfg(), floor());
        b.k1 = 1.0;
        b.k3 = 1.0;
        assert_eq!(b.speed_envelope(0.0), 5.0);
        assert!(b.speed_envelope(1.0) > b.speed_envelope(0.5));
    }

    #[test]
    fn standard_chain() {
        let b = compute_bounds(&cfg(), floor());
        assert_eq!(b.k1, 1.0);
        assert_eq!(b.k2, 1.0);
        assert_eq!(b.lipschitz, 4.0);
        assert!((b.k3 - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.eps0, 0.0625);
        assert_eq!(b.width_cap, 2.0 + 0.0625 / 4.0);
        assert!(b.chain_holds(0.0));
        assert!(b.chain_holds(b.t0));
        assert!(b.speed_envelope(0.0) >= b.rbar);
        assert!(!b.growth_floor_disabled);
    }

    #[test]
    fn compact_bump_disables_floor() {
        let mut c = cfg();
        c.u0 = InitialProfile::Custom {
            name: "inner".into(),
            f: std::sync::Arc::new(|x: f64| (0.5 - x * x).max(0.0)),
        };
        let b = compute_bounds(&c, floor());
        assert_eq!(b.rho_c0, 0.0);
        assert!(b.growth_floor_disabled);
        assert!(!b.warnings.is_empty());
    }

    #[test]
    fn rho_zero_is_flagged() {
        let mut c = cfg();
        c.rho = 0.0;
        let b = compute_bounds(&c, floor());
        assert!(b.rho_zero);
        assert_eq!(b.rho_c0, 0.0);
        assert!(b.growth_bound(1.0).is_none());
        assert_eq!(b.eps0, 0.0625);
    }

    #[test]
    fn monotone_in_data() {
        let mut c = cfg();
        let small = compute_bounds(&c, floor());
        c.u0 = InitialProfile::Bump { amp: 3.0 };
        let big = compute_bounds(&c, floor());
        assert!(big.k1 >= small.k1);
        assert!(big.lipschitz >= small.lipschitz);
        assert!(big.k3 >= small.k3);
    }

    #[test]
    fn gamma_on_stationary_fronts() {
        let mut c = cfg();
        c.mu = 0.0;
        c.rho = 0.0;
        let b = compute_bounds(&c, floor());
        let rec = |t| FrontRecord {
            t,
            g: -1.0,
            h: 1.0,
            gdot: 0.0,
            hdot: 0.0,
            picard_iters: 1,
            residual: 0.0,
        };
        let report = check_gamma_membership(&[rec(0.0), rec(0.1)], &b, 1.0);
        assert!(report.degenerate);
        assert!(!report.condition("rho_c0 <= h'").unwrap().holds);
        assert_eq!(
            report.condition("rho_c0 <= h'").unwrap().first_violation,
            Some(0.0)
        );
    }
}
