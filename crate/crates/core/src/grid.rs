use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Uniform arc-length grid `s_i = s0 + i * ds`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SGrid {
    pub s0: f64,
    pub ds: f64,
    pub count: usize,
}

impl SGrid {
    pub fn new(s0: f64, ds: f64, count: usize) -> Result<Self> {
        if !(ds > 0.0) || !ds.is_finite() {
            return Err(Error::NonPositive { name: "ds", value: ds });
        }
        if count < 2 {
            return Err(Error::TooFewNodes { needed: 2, got: count });
        }
        if !s0.is_finite() {
            return Err(Error::OutOfRange { what: "s0", value: s0, limit: f64::MAX });
        }
        Ok(Self { s0, ds, count })
    }

    /// Grid with `count` nodes covering `[start, end]` inclusive.
    pub fn spanning(start: f64, end: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::TooFewNodes { needed: 2, got: count });
        }
        Self::new(start, (end - start) / (count - 1) as f64, count)
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.s0 + i as f64 * self.ds
    }

    pub fn end(&self) -> f64 {
        self.node(self.count - 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.node(i))
    }

    /// Same nodes up to a relative tolerance on the spacing.
    pub fn matches(&self, other: &SGrid) -> bool {
        self.count == other.count
            && (self.s0 - other.s0).abs() <= 1e-12 * (1.0 + self.s0.abs())
            && (self.ds - other.ds).abs() <= 1e-12 * self.ds
    }

    /// Cell index and fractional offset of `s` for linear interpolation.
    /// Points outside the grid are clamped to the end cells.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let x = (s - self.s0) / self.ds;
        let last = (self.count - 2) as f64;
        let cell = x.floor().clamp(0.0, last);
        (cell as usize, x - cell)
    }

    pub fn contains(&self, s: f64) -> bool {
        let slack = 1e-9 * self.ds;
        s >= self.s0 - slack && s <= self.end() + slack
    }
}

/// Piecewise-linear interpolation of node samples.
pub fn interpolate(grid: &SGrid, values: &[f64], s: f64) -> f64 {
    let (i, w) = grid.locate(s);
    values[i] * (1.0 - w) + values[i + 1] * w
}

/// Value and first-derivative weights of the Lagrange polynomial through
/// the unit-spaced nodes `0, 1, .., k-1`, evaluated at `x`.
pub fn lagrange_weights(k: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut val = vec![0.0; k];
    let mut der = vec![0.0; k];
    for j in 0..k {
        let xj = j as f64;
        let mut denom = 1.0;
        for m in 0..k {
            if m != j {
                denom *= xj - m as f64;
            }
        }
        let mut p = 1.0;
        for m in 0..k {
            if m != j {
                p *= x - m as f64;
            }
        }
        val[j] = p / denom;
        let mut d = 0.0;
        for skip in 0..k {
            if skip == j {
                continue;
            }
            let mut q = 1.0;
            for m in 0..k {
                if m != j && m != skip {
                    q *= x - m as f64;
                }
            }
            d += q;
        }
        der[j] = d / denom;
    }
    (val, der)
}

/// Fourth-order first derivative of node samples: five-point central
/// stencil in the interior, one-sided five-point stencils near the ends.
/// Falls back to lower order on grids with fewer than five nodes.
pub fn derivative(values: &[f64], ds: f64) -> Vec<f64> {
    let n = values.len();
    let k = n.min(5);
    (0..n)
        .map(|i| {
            let p = i.saturating_sub(k / 2).min(n - k);
            let (_, w) = lagrange_weights(k, (i - p) as f64);
            w.iter().enumerate().map(|(j, wj)| wj * values[p + j]).sum::<f64>() / ds
        })
        .collect()
}

/// Component-wise [`derivative`] of vector samples.
pub fn derivative_vec(values: &[Vec<f64>], ds: f64) -> Vec<Vec<f64>> {
    if values.is_empty() {
        return Vec::new();
    }
    let d = values[0].len();
    let cols: Vec<Vec<f64>> =
        (0..d).map(|c| derivative(&values.iter().map(|v| v[c]).collect::<Vec<_>>(), ds)).collect();
    (0..values.len()).map(|i| (0..d).map(|c| cols[c][i]).collect()).collect()
}

/// Second-order first derivative: central differences inside, one-sided
/// three-point formulas at the ends.
pub fn derivative_2nd_order(values: &[f64], ds: f64) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * ds)
            } else if i == n - 1 {
                (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * ds)
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * ds)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(SGrid::new(0.0, 0.0, 10).is_err());
        assert!(SGrid::new(0.0, 0.1, 1).is_err());
    }

    #[test]
    fn spanning_hits_both_ends() {
        let g = SGrid::spanning(-2.0, 3.0, 11).unwrap();
        assert_eq!(g.node(0), -2.0);
        assert!((g.end() - 3.0).abs() < 1e-15);
        assert!((g.ds - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_exact_for_linear_data() {
        let g = SGrid::spanning(0.0, 1.0, 5).unwrap();
        let v: alloc::vec::Vec<f64> = g.nodes().map(|s| 3.0 * s - 1.0).collect();
        for s in [0.0, 0.1, 0.33, 0.999, 1.0] {
            assert!((interpolate(&g, &v, s) - (3.0 * s - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_is_exact_on_quartics() {
        let g = SGrid::spanning(-1.0, 2.0, 13).unwrap();
        let v: Vec<f64> = g.nodes().map(|s| s.powi(4) - 2.0 * s * s + s).collect();
        let d = derivative(&v, g.ds);
        for (i, s) in g.nodes().enumerate() {
            let exact = 4.0 * s.powi(3) - 4.0 * s + 1.0;
            assert!((d[i] - exact).abs() < 1e-10, "node {i}: {} vs {exact}", d[i]);
        }
    }

    #[test]
    fn lagrange_midpoint_weights() {
        let (v, d) = lagrange_weights(4, 1.5);
        let expect_v = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
        let expect_d = [1.0 / 24.0, -27.0 / 24.0, 27.0 / 24.0, -1.0 / 24.0];
        for j in 0..4 {
            assert!((v[j] - expect_v[j]).abs() < 1e-15);
            assert!((d[j] - expect_d[j]).abs() < 1e-15);
        }
    }
}
