//! Affine map between the moving habitat `[g, h]` and the reference interval `[-1, 1]`.
//!
//! Under `x = ((h - g) y + h + g) / 2` the local diffusion `d v_xx` becomes `d ξ z_yy`
//! with `ξ = 4 / (h - g)²`, and the grid motion adds the advection `ζ z_y` with
//! `ζ = (h' + g' + (h' - g') y) / (h - g)`.

use serde::Serialize;
use thiserror::Error;

use crate::model::node;

/// Slack on `|y| ≤ 1` and `g ≤ x ≤ h` to absorb round-off.
const RANGE_SLACK: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("coordinate {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("degenerate interval: g = {g}, h = {h}")]
    DegenerateInterval { g: f64, h: f64 },
}

/// Front positions and speeds at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontPair {
    pub g: f64,
    pub h: f64,
    pub gdot: f64,
    pub hdot: f64,
}

impl FrontPair {
    pub fn new(g: f64, h: f64, gdot: f64, hdot: f64) -> Self {
        FrontPair { g, h, gdot, hdot }
    }

    /// Fronts at rest.
    pub fn at_rest(g: f64, h: f64) -> Self {
        FrontPair::new(g, h, 0.0, 0.0)
    }

    pub fn length(&self) -> f64 {
        self.h - self.g
    }

    fn checked_length(&self) -> Result<f64, TransformError> {
        let len = self.h - self.g;
        if len > 0.0 && len.is_finite() {
            Ok(len)
        } else {
            Err(TransformError::DegenerateInterval {
                g: self.g,
                h: self.h,
            })
        }
    }

    /// Physical position of reference coordinate `y`, skipping the range check.
    #[inline]
    pub fn x_at(&self, y: f64) -> f64 {
        0.5 * ((self.h - self.g) * y + self.h + self.g)
    }
}

pub fn phys_of_ref(fp: &FrontPair, y: f64) -> Result<f64, TransformError> {
    if !(y.abs() <= 1.0 + RANGE_SLACK) {
        return Err(TransformError::OutOfRange {
            value: y,
            lo: -1.0,
            hi: 1.0,
        });
    }
    if y == 1.0 {
        return Ok(fp.h);
    }
    if y == -1.0 {
        return Ok(fp.g);
    }
    Ok(fp.x_at(y))
}

pub fn ref_of_phys(fp: &FrontPair, x: f64) -> Result<f64, TransformError> {
    let len = fp.checked_length()?;
    let slack = RANGE_SLACK * fp.g.abs().max(fp.h.abs()).max(1.0);
    if !(x >= fp.g - slack && x <= fp.h + slack) {
        return Err(TransformError::OutOfRange {
            value: x,
            lo: fp.g,
            hi: fp.h,
        });
    }
    Ok((2.0 * x - fp.g - fp.h) / len)
}

/// `ξ = 4 / (h - g)²`
pub fn xi(fp: &FrontPair) -> Result<f64, TransformError> {
    let len = fp.checked_length()?;
    Ok(4.0 / (len * len))
}

/// `ζ(y) = (h' + g') / (h - g) + (h' - g') y / (h - g)`
pub fn zeta(fp: &FrontPair, y: f64) -> Result<f64, TransformError> {
    let len = fp.checked_length()?;
    Ok((fp.hdot + fp.gdot) / len + (fp.hdot - fp.gdot) * y / len)
}

/// `max_{|y| ≤ 1} |ζ(y)|`
pub fn max_abs_zeta(fp: &FrontPair) -> Result<f64, TransformError> {
    let len = fp.checked_length()?;
    Ok(((fp.hdot + fp.gdot).abs() + (fp.hdot - fp.gdot).abs()) / len)
}

/// Uniform grid on `[-1, 1]` with an odd number of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGrid {
    nodes: Vec<f64>,
}

impl ReferenceGrid {
    /// Panics if `n` is even or below 3.
    pub fn new(n: usize) -> Self {
        assert!(
            n >= 3 && n % 2 == 1,
            "reference grid needs an odd node count >= 3, got {n}"
        );
        ReferenceGrid {
            nodes: (0..n).map(|j| node(j, n)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn y(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    pub fn spacing(&self) -> f64 {
        2.0 / (self.nodes.len() - 1) as f64
    }

    pub fn center(&self) -> usize {
        (self.nodes.len() - 1) / 2
    }

    /// Trapezoid weights in `y` (`Δy` inside, `Δy/2` at the ends).
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dy = self.spacing();
        let n = self.len();
        (0..n)
            .map(|j| if j == 0 || j == n - 1 { 0.5 * dy } else { dy })
            .collect()
    }

    /// Physical node positions for the given fronts.
    pub fn physical_nodes(&self, fp: &FrontPair) -> Vec<f64> {
        let n = self.len();
        self.nodes
            .iter()
            .enumerate()
            .map(|(j, &y)| {
                if j == 0 {
                    fp.g
                } else if j == n - 1 {
                    fp.h
                } else {
                    fp.x_at(y)
                }
            })
            .collect()
    }
}
