use crate::model::KernelSpec;
use crate::transform::{FrontPair, ReferenceGrid, TransformError};

use super::{FieldVector, SolverError};

/// `J(x_i - x_j)` depends only on `|i - j|` on a uniform grid; entry `k` is
/// `J(k (h - g) / (N - 1))`.
pub fn kernel_row(grid: &ReferenceGrid, fp: &FrontPair, kernel: &KernelSpec) -> Vec<f64> {
    let m = (grid.len() - 1) as f64;
    let len = fp.length();
    (0..grid.len())
        .map(|k| kernel.density(len * k as f64 / m))
        .collect()
}

/// `∫_g^h J(x_i - x') u(x') dx'` at every node, by the trapezoid rule on the grid.
pub fn nonlocal_operator(
    grid: &ReferenceGrid,
    fp: &FrontPair,
    w: &FieldVector,
    kernel: &KernelSpec,
) -> Result<FieldVector, SolverError> {
    if !(fp.length() > 0.0) {
        return Err(TransformError::DegenerateInterval { g: fp.g, h: fp.h }.into());
    }
    let row = kernel_row(grid, fp, kernel);
    Ok(FieldVector {
        values: nonlocal_with_row(grid, fp, w.as_slice(), &row),
    })
}

/// Same as [`nonlocal_operator`] with a precomputed [`kernel_row`].
pub fn nonlocal_with_row(grid: &ReferenceGrid, fp: &FrontPair, w: &[f64], row: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let weights = grid.trapezoid_weights();
    let half = 0.5 * fp.length();
    let reach = row.iter().rposition(|&j| j != 0.0).unwrap_or(0);
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(reach);
            let hi = (i + reach).min(n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += weights[j] * row[i.abs_diff(j)] * w[j];
            }
            half * acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_zero() {
        let grid = ReferenceGrid::new(21);
        let fp = FrontPair::at_rest(-1.0, 1.0);
        let out = nonlocal_operator(
            &grid,
            &fp,
            &FieldVector::zeros(21),
            &KernelSpec::tent(0.5).unwrap(),
        )
        .unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_field_with_interior_support() {
        let grid = ReferenceGrid::new(401);
        let fp = FrontPair::at_rest(-5.0, 5.0);
        let c = 0.7;
        let w = FieldVector::from_values(vec![c; 401]);
        let kernel = KernelSpec::tent(1.0).unwrap();
        let out = nonlocal_operator(&grid, &fp, &w, &kernel).unwrap();
        // x = 0 sits at node 200; the tent kink lands on nodes so the sum is exact
        assert!((out[200] - c).abs() < 1e-12 * c, "{}", out[200]);
        let g = KernelSpec::truncated_gaussian(1.0, 0.5).unwrap();
        let out = nonlocal_operator(&grid, &fp, &w, &g).unwrap();
        let dx: f64 = 10.0 / 400.0;
        assert!((out[200] - c).abs() < 10.0 * dx * dx * c, "{}", out[200]);
    }

    #[test]
    fn degenerate_interval_rejected() {
        let grid = ReferenceGrid::new(5);
        let fp = FrontPair::at_rest(1.0, 1.0);
        assert!(nonlocal_operator(
            &grid,
            &fp,
            &FieldVector::zeros(5),
            &KernelSpec::tent(1.0).unwrap()
        )
        .is_err());
    }
}
