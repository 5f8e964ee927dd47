//! Periodic spatial grids and the graded grid in the extension variable.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::FractionalParams;

/// Uniform periodic grid on `[-L/2, L/2)^dim` with `n` points per axis.
///
/// Node `j` sits at `-L/2 + j h`, so the origin is node `n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    length: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(invalid(format!("points per axis must be a power of two >= 8, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid(format!("period must be positive, got {length}")));
        }
        Ok(Self { dim, n, length })
    }

    /// One-dimensional grid of period `2π`.
    pub fn periodic_1d(n: usize) -> Result<Self> {
        Self::new(1, n, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Total number of nodes, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    /// Index of the node at the origin along one axis.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    /// Axis indices of a flat (row-major) node index.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.n, idx % self.n],
        }
    }

    pub fn flatten(&self, ij: [usize; 2]) -> usize {
        match self.dim {
            1 => ij[0],
            _ => ij[0] * self.n + ij[1],
        }
    }

    /// Coordinates of a node; unused components are zero.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.unflatten(idx);
        match self.dim {
            1 => [self.coord(i), 0.0],
            _ => [self.coord(i), self.coord(j)],
        }
    }

    /// Signed integer wavenumber of FFT bin `i`: `0..=n/2` then negative.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Angular frequency `2πk/L` of FFT bin `i`.
    pub fn frequency(&self, i: usize) -> f64 {
        2.0 * PI * self.wavenumber(i) as f64 / self.length
    }

    /// `|ξ|` for a flat spectral index.
    pub fn frequency_norm(&self, idx: usize) -> f64 {
        let [i, j] = self.unflatten(idx);
        match self.dim {
            1 => self.frequency(i).abs(),
            _ => self.frequency(i).hypot(self.frequency(j)),
        }
    }

    /// Lowest non-zero angular frequency `2π/L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest resolved angular frequency along an axis, `πn/L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Periodic displacement `x - x'` folded into `[-L/2, L/2)`.
    pub fn wrap(&self, d: f64) -> f64 {
        let l = self.length;
        d - l * ((d + 0.5 * l) / l).floor()
    }
}

/// Nodes `y_j = Y (j/M)^gamma`, `j = 0..=M`, clustered at `y = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedYGrid {
    height: f64,
    m: usize,
    gamma: f64,
    nodes: Vec<f64>,
}

impl GradedYGrid {
    pub fn new(height: f64, m: usize, gamma: f64) -> Result<Self> {
        if !(height.is_finite() && height > 0.0) {
            return Err(invalid(format!("truncation height must be positive, got {height}")));
        }
        if m < 4 {
            return Err(invalid(format!("need at least 4 y-intervals, got {m}")));
        }
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(invalid(format!("grading exponent must be >= 1, got {gamma}")));
        }
        let mut nodes: Vec<f64> = (0..=m).map(|j| height * (j as f64 / m as f64).powf(gamma)).collect();
        nodes[m] = height;
        Ok(Self { height, m, gamma, nodes })
    }

    /// Default grading `2/(1-a)` for the given exponents.
    pub fn default_gamma(params: &FractionalParams) -> f64 {
        2.0 / params.profile_exponent()
    }

    pub fn for_params(height: f64, m: usize, params: &FractionalParams) -> Result<Self> {
        Self::new(height, m, Self::default_gamma(params))
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// Number of intervals `M`; there are `M + 1` nodes.
    pub fn intervals(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Shorthand for [`GradedYGrid::new`].
pub fn make_graded_grid(height: f64, m: usize, gamma: f64) -> Result<GradedYGrid> {
    GradedYGrid::new(height, m, gamma)
}
