//! Observed orders from successive refinements, estimated from Richardson triples
//! `p = log2(|q1 - q2| / |q2 - q3|)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{ProblemConfig, TimeStep};
use crate::stepper::{Simulation, Snapshot};

use super::ValidationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Refinement {
    /// Halve `dt` at fixed `N`.
    Time,
    /// Halve `dt` and double the number of grid cells.
    SpaceTime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelResult {
    pub dt: f64,
    pub nodes: usize,
    pub g_final: f64,
    pub h_final: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantityOrder {
    pub quantity: String,
    /// Differences between consecutive levels.
    pub differences: Vec<f64>,
    /// One order per consecutive triple; `None` where a difference vanishes.
    pub orders: Vec<Option<f64>>,
    /// False when the differences fail to shrink, in which case the orders are unreliable.
    /// Differences that vanish at every level count as monotone.
    pub monotone: bool,
}

impl QuantityOrder {
    fn from_differences(quantity: &str, differences: Vec<f64>) -> Self {
        let orders = differences
            .windows(2)
            .map(|d| {
                let p = (d[0] / d[1]).log2();
                (d[1] > 0.0 && p.is_finite()).then_some(p)
            })
            .collect();
        let monotone = differences
            .windows(2)
            .all(|d| d[1] < d[0] || (d[0] == 0.0 && d[1] == 0.0));
        QuantityOrder {
            quantity: quantity.into(),
            differences,
            orders,
            monotone,
        }
    }

    /// Order from the finest triple.
    pub fn finest(&self) -> Option<f64> {
        self.orders.last().copied().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub refinement: Refinement,
    pub levels: Vec<LevelResult>,
    pub quantities: Vec<QuantityOrder>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn quantity(&self, name: &str) -> Option<&QuantityOrder> {
        self.quantities.iter().find(|q| q.quantity == name)
    }
}

/// Runs `cfg` at each `dt` in `steps` (one level each, coarsest first) and reports orders
/// for `h(T)`, `g(T)` and the sup-norm differences of `w(T)` and `z(T)`.
///
/// Under [`Refinement::SpaceTime`] the grid of level `k` has `2^k (N - 1) + 1` nodes and
/// fields are compared at the coarse-grid nodes.
pub fn convergence_study(
    cfg: &ProblemConfig,
    steps: &[f64],
    refinement: Refinement,
) -> Result<ConvergenceReport, ValidationError> {
    if steps.len() < 3 {
        return Err(ValidationError::TooFewLevels(steps.len()));
    }
    let runs: Vec<(LevelResult, Snapshot)> = steps
        .par_iter()
        .enumerate()
        .map(|(k, &dt)| {
            let mut level = cfg.clone();
            level.dt = TimeStep::Fixed(dt);
            if refinement == Refinement::SpaceTime {
                level.nodes = (cfg.nodes - 1) * (1 << k) + 1;
            }
            let traj = Simulation::new(level.clone())?.run()?;
            let last = traj.final_fronts().expect("nonempty trajectory");
            let result = LevelResult {
                dt,
                nodes: level.nodes,
                g_final: last.g,
                h_final: last.h,
                steps: traj.fronts.len() - 1,
            };
            let snap = traj.final_snapshot().expect("final snapshot").clone();
            Ok::<_, ValidationError>((result, snap))
        })
        .collect::<Result<_, _>>()?;

    let stride = |k: usize| match refinement {
        Refinement::Time => 1,
        Refinement::SpaceTime => 1 << k,
    };
    let field_diff = |k: usize, pick: fn(&Snapshot) -> &Vec<f64>| {
        let (a, b) = (pick(&runs[k].1), pick(&runs[k + 1].1));
        let (sa, sb) = (stride(k), stride(k + 1));
        (0..cfg.nodes)
            .map(|j| (a[j * sa] - b[j * sb]).abs())
            .fold(0.0f64, f64::max)
    };
    let pairs = 0..runs.len() - 1;
    let h = pairs
        .clone()
        .map(|k| (runs[k].0.h_final - runs[k + 1].0.h_final).abs())
        .collect();
    let g = pairs
        .clone()
        .map(|k| (runs[k].0.g_final - runs[k + 1].0.g_final).abs())
        .collect();
    let w = pairs.clone().map(|k| field_diff(k, |s| &s.w)).collect();
    let z = pairs.map(|k| field_diff(k, |s| &s.z)).collect();
    let quantities = vec![
        QuantityOrder::from_differences("h(T)", h),
        QuantityOrder::from_differences("g(T)", g),
        QuantityOrder::from_differences("w(T)", w),
        QuantityOrder::from_differences("z(T)", z),
    ];
    let warnings = quantities
        .iter()
        .filter(|q| !q.monotone)
        .map(|q| {
            format!(
                "{}: differences not decreasing, orders unreliable",
                q.quantity
            )
        })
        .collect();
    Ok(ConvergenceReport {
        refinement,
        levels: runs.into_iter().map(|(r, _)| r).collect(),
        quantities,
        warnings,
    })
}

/// `dt0, dt0/2, ..., dt0/2^(levels-1)`
pub fn halving(dt0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| dt0 / (1u64 << k) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_from_differences() {
        let q = QuantityOrder::from_differences("q", vec![0.4, 0.1, 0.025]);
        assert!(q.monotone);
        assert_eq!(q.orders, vec![Some(2.0), Some(2.0)]);
        let flat = QuantityOrder::from_differences("q", vec![0.0, 0.0]);
        assert!(flat.monotone);
        assert_eq!(flat.finest(), None);
        assert!(!QuantityOrder::from_differences("q", vec![0.1, 0.2]).monotone);
    }

    #[test]
    fn halving_levels() {
        assert_eq!(halving(0.004, 3), vec![0.004, 0.002, 0.001]);
    }
}
