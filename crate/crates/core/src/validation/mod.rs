//! Independent checks of the main solver: a physical-coordinate reference solver, a
//! comparison-principle bench for the explicit step, and refinement studies.

mod comparison;
mod convergence;
mod oracle;

use thiserror::Error;

use crate::model::ConfigError;
use crate::solvers::SolverError;
use crate::stepper::Snapshot;

pub use comparison::{comparison_test, ComparisonCase, ComparisonReport};
pub use convergence::{
    convergence_study, halving, ConvergenceReport, LevelResult, QuantityOrder, Refinement,
};
pub use oracle::{oracle_run, OracleConfig, ORACLE_DT_FRACTION, WINDOW_MARGIN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("front left the oracle window [-{half_width}, {half_width}]: g = {g}, h = {h}")]
    WindowExceeded { g: f64, h: f64, half_width: f64 },
    #[error("oracle setup: {0}")]
    BadOracle(String),
    #[error("ordering `{which}` violated at node {node}, t = {t}: {value:e}")]
    OrderingViolated {
        which: &'static str,
        node: usize,
        t: f64,
        value: f64,
    },
    #[error("a convergence study needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
}

/// Piecewise-linear interpolation of a snapshot field at `x`, zero outside the snapshot's
/// support.
pub fn interpolate(xs: &[f64], values: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 0 || x <= xs[0] || x >= xs[n - 1] {
        return 0.0;
    }
    let k = xs.partition_point(|&p| p <= x).clamp(1, n - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let s = (x - x0) / (x1 - x0);
    values[k - 1] + s * (values[k] - values[k - 1])
}

/// Sup-norm differences `(‖Δw‖, ‖Δz‖)` between two snapshots, each interpolated at the
/// other's nodes.
pub fn snapshot_difference(a: &Snapshot, b: &Snapshot) -> (f64, f64) {
    let one_way = |p: &Snapshot, q: &Snapshot| {
        p.x.iter()
            .enumerate()
            .fold((0.0f64, 0.0f64), |(dw, dz), (i, &x)| {
                (
                    dw.max((p.w[i] - interpolate(&q.x, &q.w, x)).abs()),
                    dz.max((p.z[i] - interpolate(&q.x, &q.z, x)).abs()),
                )
            })
    };
    let (w1, z1) = one_way(a, b);
    let (w2, z2) = one_way(b, a);
    (w1.max(w2), z1.max(z2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation() {
        let xs = [-1.0, 0.0, 2.0];
        let vs = [0.0, 1.0, 0.0];
        assert_eq!(interpolate(&xs, &vs, 0.0), 1.0);
        assert_eq!(interpolate(&xs, &vs, 1.0), 0.5);
        assert_eq!(interpolate(&xs, &vs, -0.5), 0.5);
        assert_eq!(interpolate(&xs, &vs, 3.0), 0.0);
    }
}
