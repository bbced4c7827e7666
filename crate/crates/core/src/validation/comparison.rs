//! Discrete comparison principle for the explicit nonlocal step.
//!
//! `ψ_t = d1 (J*ψ - ψ) + ϱ ψ` on prescribed moving fronts, stepped with the same
//! update as the main solver. Nonnegative data must stay nonnegative and ordered data
//! must stay ordered, node by node, before any round-off clamping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::KernelSpec;
use crate::solvers::{cfl_limit, explicit_update, kernel_row, nonlocal_with_row, ExplicitParams};
use crate::solvers::{FieldVector, CLAMP_THRESHOLD};
use crate::transform::{FrontPair, ReferenceGrid};

use super::ValidationError;

/// Prescribed fronts moving at constant speed with a frozen coefficient field.
#[derive(Debug, Clone)]
pub struct ComparisonCase {
    pub kernel: KernelSpec,
    pub d1: f64,
    /// Initial fronts with their constant speeds `gdot ≤ 0 ≤ hdot`.
    pub fronts: FrontPair,
    /// `ϱ` at the reference nodes.
    pub coefficient: Vec<f64>,
    /// `ψ0` at the reference nodes.
    pub lower: Vec<f64>,
    /// `ψ̃0 ≥ ψ0`, when an ordered pair is tested.
    pub upper: Option<Vec<f64>>,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub steps: usize,
    /// Smallest raw value of `ψ` over all steps.
    pub min_lower: f64,
    /// Smallest raw value of `ψ̃ - ψ`, when an ordered pair was tested.
    pub min_gap: Option<f64>,
}

impl ComparisonCase {
    pub fn nodes(&self) -> usize {
        self.lower.len()
    }

    /// A randomized case: kernel family and radius, diffusion, front speeds, a piecewise
    /// constant `ϱ ∈ [-1, 1]`, and nested nonnegative initial fields.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 * rng.gen_range(15..60) + 1;
        let radius = rng.gen_range(0.3..3.0);
        let kernel = match rng.gen_range(0..3) {
            0 => KernelSpec::uniform(radius),
            1 => KernelSpec::tent(radius),
            _ => KernelSpec::truncated_gaussian(radius, radius * rng.gen_range(0.3..1.0)),
        }
        .expect("valid kernel parameters");
        let h0 = rng.gen_range(0.2..3.0);
        let fronts = FrontPair::new(-h0, h0, -rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));

        let pieces = rng.gen_range(1..8);
        let mut breaks: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        breaks.sort_by(f64::total_cmp);
        let levels: Vec<f64> = (0..pieces).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let grid = ReferenceGrid::new(n);
        let coefficient = grid
            .nodes()
            .iter()
            .map(|&y| levels[breaks.partition_point(|&b| b < y)])
            .collect();

        let random_field = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let (lo, hi) = (rng.gen_range(-1.0..0.0), rng.gen_range(0.0..1.0));
            let mut v: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&y| {
                    if y > lo && y < hi && rng.gen_bool(0.8) {
                        rng.gen_range(0.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            v[0] = 0.0;
            v[n - 1] = 0.0;
            v
        };
        let lower = random_field(&mut rng);
        let extra = random_field(&mut rng);
        let upper = lower.iter().zip(&extra).map(|(a, b)| a + b).collect();

        let d1 = rng.gen_range(0.1..2.0);
        let mut case = ComparisonCase {
            kernel,
            d1,
            fronts,
            coefficient,
            lower,
            upper: Some(upper),
            dt: 0.0,
        };
        case.dt = rng.gen_range(0.3..0.99) * case.stable_dt();
        case
    }

    fn rate_bound(&self) -> f64 {
        self.coefficient.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// The explicit-step limit at `t = 0`, up to rounding.
    pub fn stable_dt(&self) -> f64 {
        let grid = ReferenceGrid::new(self.nodes());
        cfl_limit(&grid, &self.fronts, self.d1, self.rate_bound()).expect("nondegenerate fronts")
    }

    fn fronts_at(&self, t: f64) -> FrontPair {
        let f = &self.fronts;
        FrontPair::new(f.g + t * f.gdot, f.h + t * f.hdot, f.gdot, f.hdot)
    }
}

/// Steps the case `steps` times and checks the orderings after every step.
pub fn comparison_test(
    case: &ComparisonCase,
    steps: usize,
) -> Result<ComparisonReport, ValidationError> {
    let n = case.nodes();
    let grid = ReferenceGrid::new(n);
    let mut lower = FieldVector::from_values(case.lower.clone());
    let mut upper = case.upper.clone().map(FieldVector::from_values);
    let params = |t| ExplicitParams {
        kernel: &case.kernel,
        d1: case.d1,
        rate_bound: case.rate_bound(),
        t,
        dt: case.dt,
    };
    let advance = |psi: &FieldVector, fp: &FrontPair, next: &FrontPair, t: f64| {
        let row = kernel_row(&grid, fp, &case.kernel);
        let conv = nonlocal_with_row(&grid, fp, psi.as_slice(), &row);
        explicit_update(&grid, fp, next, psi, &conv, params(t), |i, _, p| {
            case.coefficient[i] * p
        })
    };

    let mut report = ComparisonReport {
        steps,
        min_lower: lower.min(),
        min_gap: None,
    };
    for k in 0..steps {
        let t = k as f64 * case.dt;
        let fp = case.fronts_at(t);
        let next = case.fronts_at(t + case.dt);
        let raw_lower = advance(&lower, &fp, &next, t)?;
        let t_next = t + case.dt;
        if let Some((node, &value)) = first_below(&raw_lower) {
            return Err(ValidationError::OrderingViolated {
                which: "psi >= 0",
                node,
                t: t_next,
                value,
            });
        }
        report.min_lower = report.min_lower.min(min_of(&raw_lower));
        if let Some(up) = &upper {
            let raw_upper = advance(up, &fp, &next, t)?;
            let gap: Vec<f64> = raw_upper
                .iter()
                .zip(&raw_lower)
                .map(|(a, b)| a - b)
                .collect();
            if let Some((node, &value)) = first_below(&gap) {
                return Err(ValidationError::OrderingViolated {
                    which: "psi~ - psi >= 0",
                    node,
                    t: t_next,
                    value,
                });
            }
            let m = min_of(&gap);
            report.min_gap = Some(report.min_gap.map_or(m, |g: f64| g.min(m)));
            upper = Some(FieldVector::from_values(raw_upper));
        }
        lower = FieldVector::from_values(raw_lower);
    }
    Ok(report)
}

fn first_below(values: &[f64]) -> Option<(usize, &f64)> {
    values
        .iter()
        .enumerate()
        .find(|(_, &v)| v < -CLAMP_THRESHOLD)
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}
