//! Exact Fourier multipliers on the torus: `(-Δ)^s`, `-Δ` and the
//! fractional heat propagator, plus the sampled heat profile.
//!
//! Multipliers depend on `|ξ|` only, with `ξ = 2πk/L`. The Nyquist bin is
//! read as `+N/2`, so every symbol is even and real fields stay real.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::fft::Transform;
use crate::field::ScalarField;
use crate::grid::TorusGrid;
use crate::params::FractionalParams;

/// Symbol values below this count as numerically zero.
pub const RESOLUTION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierOp {
    grid: TorusGrid,
    symbol: Vec<f64>,
}

impl MultiplierOp {
    pub fn from_radial(grid: &TorusGrid, m: impl Fn(f64) -> f64) -> Self {
        let symbol = (0..grid.len()).map(|idx| m(grid.frequency_norm(idx))).collect();
        Self { grid: *grid, symbol }
    }

    /// `|ξ|^{2s}`.
    pub fn frac_laplacian(grid: &TorusGrid, p: &FractionalParams) -> Self {
        let two_s = 2.0 * p.s();
        Self::from_radial(grid, |r| r.powf(two_s))
    }

    /// `|ξ|²`, the symbol of `-Δ`.
    pub fn laplacian(grid: &TorusGrid) -> Self {
        Self::from_radial(grid, |r| r * r)
    }

    /// `exp(-t(|ξ|^{2s} + eps|ξ|²))`.
    pub fn heat(grid: &TorusGrid, p: &FractionalParams, t: f64, eps: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid(format!("time must be non-negative, got {t}")));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(invalid(format!("viscosity must be non-negative, got {eps}")));
        }
        let two_s = 2.0 * p.s();
        Ok(Self::from_radial(grid, |r| (-t * (r.powf(two_s) + eps * r * r)).exp()))
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        self.apply_with(&Transform::new(&self.grid), f)
    }

    /// Same as [`apply`](Self::apply) with caller-owned plans.
    pub fn apply_with(&self, t: &Transform, f: &ScalarField) -> Result<ScalarField> {
        if f.grid() != &self.grid {
            return Err(invalid("field and multiplier live on different grids"));
        }
        ensure_finite(f.values(), "input field")?;
        ScalarField::new(self.grid, t.apply(f.values(), |i| self.symbol[i]))
    }

    /// Rows `k,symbol` (1D) or `k1,k2,symbol` (2D) in FFT order.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let g = &self.grid;
        writeln!(w, "{}", if g.dim() == 1 { "k,symbol" } else { "k1,k2,symbol" })?;
        for (idx, m) in self.symbol.iter().enumerate() {
            let [i, j] = g.unflatten(idx);
            if g.dim() == 1 {
                writeln!(w, "{},{}", g.wavenumber(i), m)?;
            } else {
                writeln!(w, "{},{},{}", g.wavenumber(i), g.wavenumber(j), m)?;
            }
        }
        Ok(())
    }
}

pub fn frac_laplacian(f: &ScalarField, p: &FractionalParams) -> Result<ScalarField> {
    MultiplierOp::frac_laplacian(f.grid(), p).apply(f)
}

pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    Ok(MultiplierOp::laplacian(f.grid()).apply(f)?.scaled(-1.0))
}

pub fn heat_propagate(f: &ScalarField, t: f64, p: &FractionalParams, eps: f64) -> Result<ScalarField> {
    MultiplierOp::heat(f.grid(), p, t, eps)?.apply(f)
}

/// Sampled `H(x, 0)`, the inverse transform of `exp(-|ξ|^{2s})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatProfile {
    pub params: FractionalParams,
    pub profile: ScalarField,
    /// `h^n Σ H`, equal to 1 up to round-off.
    pub mass: f64,
    /// Symbol value at the axis Nyquist frequency.
    pub nyquist_symbol: f64,
}

impl HeatProfile {
    /// Profile values at the nodes `x ≥ 0` of the first axis through the origin.
    pub fn radial_samples(&self) -> Vec<(f64, f64)> {
        let g = self.profile.grid();
        let o = g.origin_index();
        (o..g.n())
            .map(|i| {
                let idx = g.flatten([i, if g.dim() == 2 { o } else { 0 }]);
                (g.coord(i), self.profile.values()[idx])
            })
            .collect()
    }
}

/// Periodized fractional heat kernel `h(t, ·)` sampled at the nodes.
pub fn heat_kernel(p: &FractionalParams, grid: &TorusGrid, t: f64) -> Result<ScalarField> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("time must be positive, got {t}")));
    }
    let tail = (-t * grid.nyquist().powf(2.0 * p.s())).exp();
    if tail >= RESOLUTION_FLOOR {
        return Err(Error::Resolution(format!(
            "symbol at the Nyquist frequency is {tail:e}, needs < {RESOLUTION_FLOOR:e}"
        )));
    }
    let tr = Transform::new(grid);
    let two_s = 2.0 * p.s();
    let n = grid.n();
    let scale = (n as f64 / grid.length()).powi(grid.dim() as i32);
    // Nodes start at -L/2, which shifts every mode by (-1)^k.
    let sign = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut spec = vec![rustfft::num_complex::Complex64::new(0.0, 0.0); grid.len()];
    for (idx, c) in spec.iter_mut().enumerate() {
        let [i, j] = grid.unflatten(idx);
        let flip = if grid.dim() == 2 { sign(i) * sign(j) } else { sign(i) };
        c.re = scale * flip * (-t * grid.frequency_norm(idx).powf(two_s)).exp();
    }
    ScalarField::new(*grid, tr.inverse(spec))
}

pub fn heat_profile(p: &FractionalParams, grid: &TorusGrid) -> Result<HeatProfile> {
    let profile = heat_kernel(p, grid, 1.0)?;
    let cell = grid.spacing().powi(grid.dim() as i32);
    let mass = cell * profile.values().iter().sum::<f64>();
    let nyquist_symbol = (-grid.nyquist().powf(2.0 * p.s())).exp();
    Ok(HeatProfile { params: *p, profile, mass, nyquist_symbol })
}

/// Sup-norm gap between `h(t2, ·)` and the rescaling of `h(t1, ·)` predicted
/// by `h(t, x) = t^{-n/2s} H(t^{-1/2s} x)`, relative to `max h(t2, ·)`.
pub fn selfsimilar_check(p: &FractionalParams, t1: f64, t2: f64, grid: &TorusGrid) -> Result<f64> {
    if !(t1 > 0.0 && t2 >= t1 && t2.is_finite()) {
        return Err(invalid(format!("need 0 < t1 <= t2, got t1 = {t1}, t2 = {t2}")));
    }
    let width = t2.powf(0.5 / p.s());
    if width > grid.length() / 16.0 {
        return Err(Error::Domain(format!("kernel width {width} exceeds L/16 = {}", grid.length() / 16.0)));
    }
    let h1 = heat_kernel(p, grid, t1)?;
    let h2 = heat_kernel(p, grid, t2)?;
    let ratio = t1 / t2;
    let rho = ratio.powf(0.5 / p.s());
    let amp = ratio.powf(grid.dim() as f64 * 0.5 / p.s());
    let peak = h2.max();
    let mut worst = 0.0f64;
    for idx in 0..grid.len() {
        let x = grid.point(idx);
        let predicted = amp * interpolate_cubic(&h1, [rho * x[0], rho * x[1]]);
        worst = worst.max((predicted - h2.values()[idx]).abs());
    }
    Ok(worst / peak)
}

/// Periodic tensor-product cubic Lagrange interpolation.
pub fn interpolate_cubic(f: &ScalarField, x: [f64; 2]) -> f64 {
    let g = f.grid();
    let n = g.n() as i64;
    let h = g.spacing();
    let stencil = |xi: f64| -> (i64, [f64; 4]) {
        let u = (xi + 0.5 * g.length()) / h;
        let base = u.floor();
        let t = u - base;
        let w = [
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        ];
        (base as i64 - 1, w)
    };
    let (i0, wi) = stencil(x[0]);
    if g.dim() == 1 {
        return (0..4).map(|a| wi[a] * f.values()[(i0 + a as i64).rem_euclid(n) as usize]).sum();
    }
    let (j0, wj) = stencil(x[1]);
    let mut acc = 0.0;
    for a in 0..4 {
        let i = (i0 + a as i64).rem_euclid(n) as usize;
        for b in 0..4 {
            let j = (j0 + b as i64).rem_euclid(n) as usize;
            acc += wi[a] * wj[b] * f.values()[g.flatten([i, j])];
        }
    }
    acc
}
