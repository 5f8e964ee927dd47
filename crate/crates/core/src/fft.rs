//! Real-field transforms on a [`TorusGrid`], in 1D or 2D (row-major).

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::TorusGrid;

/// Forward and inverse plans for one grid. Cheap to clone and `Send + Sync`.
#[derive(Clone)]
pub struct Transform {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

impl Transform {
    pub fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self { grid: *grid, forward: planner.plan_fft_forward(grid.n()), inverse: planner.plan_fft_inverse(grid.n()) }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.grid.len());
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.run(&mut data, &self.forward);
        data
    }

    /// Inverse transform including the `1/N^dim` factor; returns the real part.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        assert_eq!(spectrum.len(), self.grid.len());
        self.run(&mut spectrum, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        spectrum.iter().map(|c| c.re * scale).collect()
    }

    /// Multiplies each Fourier coefficient by `symbol(idx)`.
    pub fn apply(&self, values: &[f64], symbol: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (idx, c) in spec.iter_mut().enumerate() {
            *c *= symbol(idx);
        }
        self.inverse(spec)
    }

    /// Multiplies by a complex symbol; the caller keeps it Hermitian.
    pub fn apply_complex(&self, values: &[f64], symbol: impl Fn(usize) -> Complex64) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (idx, c) in spec.iter_mut().enumerate() {
            *c *= symbol(idx);
        }
        self.inverse(spec)
    }

    /// Spectral partial derivative along `axis`; the Nyquist mode is zeroed.
    pub fn derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let g = self.grid;
        let half = g.n() / 2;
        self.apply_complex(values, |idx| {
            let i = g.unflatten(idx)[axis];
            if i == half {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, g.frequency(i))
            }
        })
    }

    /// Spectral gradient, one vector per axis.
    pub fn gradient(&self, values: &[f64]) -> Vec<Vec<f64>> {
        (0..self.grid.dim()).map(|d| self.derivative(values, d)).collect()
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        if self.grid.dim() == 1 {
            plan.process(data);
            return;
        }
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                column[i] = data[i * n + j];
            }
            plan.process(&mut column);
            for i in 0..n {
                data[i * n + j] = column[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let g = TorusGrid::new(2, 16, 3.0).unwrap();
        let t = Transform::new(&g);
        let v: Vec<f64> = (0..g.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let back = t.inverse(t.forward(&v));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let g = TorusGrid::periodic_1d(32).unwrap();
        let t = Transform::new(&g);
        let v: Vec<f64> = (0..32).map(|j| (3.0 * g.coord(j)).sin()).collect();
        let d = t.derivative(&v, 0);
        for j in 0..32 {
            assert!((d[j] - 3.0 * (3.0 * g.coord(j)).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn second_axis_derivative() {
        let g = TorusGrid::new(2, 16, std::f64::consts::TAU).unwrap();
        let t = Transform::new(&g);
        let v: Vec<f64> = (0..g.len()).map(|i| (2.0 * g.point(i)[1]).cos()).collect();
        let d = t.derivative(&v, 1);
        let d0 = t.derivative(&v, 0);
        for i in 0..g.len() {
            assert!((d[i] + 2.0 * (2.0 * g.point(i)[1]).sin()).abs() < 1e-12);
            assert!(d0[i].abs() < 1e-12);
        }
    }
}
