//! Brute-force single-mode Fourier oracle used to validate closed forms.

use num_complex::Complex64;

use super::{phase_kernel_slices, ComplexVec};
use crate::error::{check_len, domain, Result};

/// Uniform square grid `[-L, L]²` with `points` nodes per axis,
/// endpoints included. Values are stored with the real coordinate as the
/// major index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2 {
    pub half_width: f64,
    pub points: usize,
}

impl Grid2 {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0) || points < 2 {
            return Err(domain("grid needs positive half-width and at least 2 points per axis"));
        }
        Ok(Self { half_width, points })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.step()
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.coord(i), self.coord(j))
    }

    /// Evaluates `f` at every node.
    pub fn tabulate<T>(&self, mut f: impl FnMut(Complex64) -> T) -> Vec<T> {
        let m = self.points;
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                out.push(f(self.node(i, j)));
            }
        }
        out
    }

    /// Trapezoid weight of node `(i, j)`, including the cell area.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let edge = |k: usize| if k == 0 || k == self.points - 1 { 0.5 } else { 1.0 };
        let h = self.step();
        edge(i) * edge(j) * h * h
    }

    /// Trapezoid integral of tabulated real values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let m = self.points;
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += self.weight(i, j) * values[i * m + j];
            }
        }
        s
    }
}

/// Result of [`fourier_oracle_1mode`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    pub value: Complex64,
    /// Largest `|f|` on the grid boundary.
    pub boundary_max: f64,
    /// `false` when `boundary_max ≥ 1e-12`, i.e. the grid truncates `f`.
    pub coverage_ok: bool,
}

/// `(1/π²) ∬ f(β) e^{β†α − α†β} d²β` by the trapezoid rule.
pub fn fourier_oracle_1mode(values: &[Complex64], grid: &Grid2, target: &ComplexVec) -> Result<OracleResult> {
    check_len(1, target.len())?;
    let m = grid.points;
    check_len(m * m, values.len())?;
    let alpha = target.as_slice();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut boundary_max: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let f = values[i * m + j];
            if i == 0 || j == 0 || i == m - 1 || j == m - 1 {
                boundary_max = boundary_max.max(f.norm());
            }
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            let k = phase_kernel_slices(&[grid.node(i, j)], alpha);
            acc += f * k * grid.weight(i, j);
        }
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok(OracleResult { value: acc / pi2, boundary_max, coverage_ok: boundary_max < 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_at_origin() {
        let sigma: f64 = 0.3;
        let grid = Grid2::new(3.0, 129).unwrap();
        let vals = grid.tabulate(|b| Complex64::new((-b.norm_sqr() / (2.0 * sigma * sigma)).exp(), 0.0));
        let r = fourier_oracle_1mode(&vals, &grid, &ComplexVec::zeros(1)).unwrap();
        assert!(r.coverage_ok);
        assert!((r.value.re - 2.0 * sigma * sigma / PI).abs() < 1e-12);
        assert!((2.0 * sigma * sigma / PI - 0.0573).abs() < 1e-4);
        assert!(r.value.im.abs() < 1e-14);
    }

    #[test]
    fn zero_function() {
        let grid = Grid2::new(2.0, 16).unwrap();
        let vals = vec![Complex64::new(0.0, 0.0); 256];
        let r = fourier_oracle_1mode(&vals, &grid, &ComplexVec::scalar(Complex64::new(0.4, -1.0))).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn flags_truncation() {
        let grid = Grid2::new(1.0, 32).unwrap();
        let vals = grid.tabulate(|b| Complex64::new((-b.norm_sqr()).exp(), 0.0));
        let r = fourier_oracle_1mode(&vals, &grid, &ComplexVec::zeros(1)).unwrap();
        assert!(!r.coverage_ok);
    }
}
