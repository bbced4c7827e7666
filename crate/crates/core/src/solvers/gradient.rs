use crate::transform::FrontPair;

use super::FieldVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Physical `v_x` at a front: a second-order one-sided difference for `z_y` at `y = ±1`,
/// scaled by `2 / (h - g)`.
pub fn boundary_gradient(z: &FieldVector, fp: &FrontPair, side: Side) -> f64 {
    let n = z.len();
    assert!(n >= 5, "boundary gradient needs at least 5 nodes");
    let dy = 2.0 / (n - 1) as f64;
    let z_y = match side {
        Side::Right => (3.0 * z[n - 1] - 4.0 * z[n - 2] + z[n - 3]) / (2.0 * dy),
        Side::Left => (-3.0 * z[0] + 4.0 * z[1] - z[2]) / (2.0 * dy),
    };
    2.0 * z_y / fp.length()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::ReferenceGrid;
    use std::f64::consts::PI;

    #[test]
    fn exact_on_quadratics() {
        let grid = ReferenceGrid::new(11);
        let z = FieldVector::from_fn(grid.nodes(), |y| 1.0 - y * y);
        let fp = FrontPair::at_rest(-1.0, 1.0);
        assert!((boundary_gradient(&z, &fp, Side::Right) + 2.0).abs() < 1e-12);
        assert!((boundary_gradient(&z, &fp, Side::Left) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field() {
        let fp = FrontPair::at_rest(-3.0, 1.0);
        assert_eq!(
            boundary_gradient(&FieldVector::zeros(9), &fp, Side::Right),
            0.0
        );
    }

    #[test]
    fn sine_mode_is_second_order() {
        let fp = FrontPair::at_rest(-2.0, 2.0);
        let err = |n: usize| {
            let grid = ReferenceGrid::new(n);
            let z = FieldVector::from_fn(grid.nodes(), |y| (PI * (y + 1.0) / 2.0).sin());
            (boundary_gradient(&z, &fp, Side::Right) + PI / 4.0).abs()
        };
        let (e1, e2) = (err(41), err(81));
        assert!(e1 < 1e-2);
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }
}
