//! The weighted extension `div(y^a ∇u) = 0` on torus × `(0, Y)`.
//!
//! The horizontal operator is diagonal in Fourier space, so the solver works
//! one mode at a time: each mode `κ` yields a real profile `φ_κ(y_j)` with
//! `φ_κ(0) = 1` from a tridiagonal solve, and `u(·, y_j)` is the inverse
//! transform of `f̂_κ φ_κ(y_j)`.
//!
//! The vertical discretization is a conservative finite-volume scheme with
//! fluxes `F_{j+1/2} = (1-a)(φ_{j+1} - φ_j) / (y_{j+1}^{1-a} - y_j^{1-a})`,
//! which reproduce `y^a φ'` exactly on `1` and `y^{1-a}`.

mod expansion;
mod oracle;
mod poisson;
mod special;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::fft::Transform;
use crate::field::{ExtendedField, ScalarField};
use crate::grid::{GradedYGrid, TorusGrid};
use crate::params::FractionalParams;

pub use expansion::{
    check_corollary_expansion, expansion_fit, expansion_fit_poisson, CorollaryReport, ExpansionBand, ExpansionFit,
};
pub use oracle::{bessel_ratio, mode_ode_oracle};
pub use poisson::{poisson_extend, poisson_symbol};
pub use special::{special_solution_residuals, SpecialResiduals, SpecialSolution};

/// Condition imposed at `y = Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopBoundary {
    /// `u = 0`; requires `Y ≥ 10 / κ_min`.
    Zero,
    /// Per-mode Robin condition matching the exact decaying profile.
    ModeDecay,
}

/// Realization of the horizontal Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizontal {
    /// Exact symbol `-|ξ|²`.
    Spectral,
    /// Second-order differences, symbol `-(4/h²) Σ sin²(ξ_d h/2)`. The full
    /// scheme is then an M-matrix and obeys a discrete maximum principle.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionOptions {
    pub top: TopBoundary,
    pub horizontal: Horizontal,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        Self { top: TopBoundary::ModeDecay, horizontal: Horizontal::Spectral }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSolution {
    pub field: ExtendedField,
    pub params: FractionalParams,
    /// Raw boundary flux `lim y^a ∂_y u ≈ (1-a)(u(·, y_1) - f) / y_1^{1-a}`.
    pub dtn: ScalarField,
    /// Largest normalized residual of the per-mode linear systems.
    pub residual: f64,
    /// `c` with `(-Δ)^s f ≈ c · dtn`.
    pub calibration: f64,
    pub options: ExtensionOptions,
}

impl ExtensionSolution {
    /// `c · dtn`, the extension's approximation of `(-Δ)^s f`.
    pub fn calibrated_dtn(&self) -> ScalarField {
        self.dtn.scaled(self.calibration)
    }

    pub fn trace(&self) -> ScalarField {
        self.field.trace()
    }

    /// Metadata written next to the binary field.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "params": self.params,
            "calibration": self.calibration,
            "residual": self.residual,
            "options": self.options,
            "y_height": self.field.ygrid().height(),
            "y_intervals": self.field.ygrid().intervals(),
            "y_gamma": self.field.ygrid().gamma(),
        })
    }
}

/// A y-grid sized for `xgrid`: `Y = 5/κ_min` (or `10/κ_min` for a zero top)
/// with the default grading.
pub fn default_ygrid(xgrid: &TorusGrid, p: &FractionalParams, m: usize, top: TopBoundary) -> Result<GradedYGrid> {
    let factor = match top {
        TopBoundary::ModeDecay => 5.0,
        TopBoundary::Zero => 10.0,
    };
    GradedYGrid::for_params(factor / xgrid.fundamental(), m, p)
}

/// `c = -κ_1^{2s} / oracle(κ_1)` at the lowest mode of the grid.
pub fn calibration_constant(xgrid: &TorusGrid, p: &FractionalParams) -> Result<f64> {
    let k1 = xgrid.fundamental();
    let oracle = mode_ode_oracle(k1, p, 20.0 / k1)?;
    Ok(-k1.powf(2.0 * p.s()) / oracle)
}

pub fn solve_extension(
    f: &ScalarField,
    p: &FractionalParams,
    ygrid: &GradedYGrid,
    top: TopBoundary,
) -> Result<ExtensionSolution> {
    solve_extension_with(f, p, ygrid, ExtensionOptions { top, ..Default::default() })
}

pub fn solve_extension_with(
    f: &ScalarField,
    p: &FractionalParams,
    ygrid: &GradedYGrid,
    options: ExtensionOptions,
) -> Result<ExtensionSolution> {
    ensure_finite(f.values(), "trace")?;
    let xgrid = *f.grid();
    if xgrid.dim() != p.dim() {
        return Err(invalid("trace dimension differs from the parameter dimension"));
    }
    if options.top == TopBoundary::Zero && ygrid.height() * xgrid.fundamental() < 10.0 - 1e-12 {
        return Err(invalid(format!("zero top boundary needs Y >= 10/κ_min = {}", 10.0 / xgrid.fundamental())));
    }
    let scheme = VerticalScheme::new(p, ygrid);
    let transform = Transform::new(&xgrid);
    let spectrum = transform.forward(f.values());

    let mut profiles: HashMap<u64, Vec<f64>> = HashMap::new();
    let mut residual = 0.0f64;
    let mut mode_profile = Vec::with_capacity(xgrid.len());
    for idx in 0..xgrid.len() {
        let k2 = horizontal_symbol(&xgrid, idx, options.horizontal);
        let key = k2.to_bits();
        if let std::collections::hash_map::Entry::Vacant(e) = profiles.entry(key) {
            let (phi, r) = scheme.profile(k2, options.top)?;
            residual = residual.max(r);
            e.insert(phi);
        }
        mode_profile.push(key);
    }

    let levels = ygrid.len();
    let mut values = Vec::with_capacity(levels * xgrid.len());
    values.extend_from_slice(f.values());
    for j in 1..levels {
        let spec = spectrum.iter().zip(&mode_profile).map(|(c, key)| c * profiles[key][j]).collect();
        values.extend(transform.inverse(spec));
    }
    let field = ExtendedField::new(xgrid, ygrid.clone(), values)?;
    let dtn = raw_dtn(&field, p);
    let calibration = calibration_constant(&xgrid, p)?;
    Ok(ExtensionSolution { field, params: *p, dtn, residual, calibration, options })
}

/// `(1-a)(u(·, y_1) - u(·, 0)) / y_1^{1-a}`, exact on `f + y^{1-a} g`.
pub fn raw_dtn(field: &ExtendedField, p: &FractionalParams) -> ScalarField {
    let b = p.profile_exponent();
    let y1 = field.ygrid().nodes()[1];
    let q = b / y1.powf(b);
    let values = field.level(1).iter().zip(field.level(0)).map(|(u1, u0)| q * (u1 - u0)).collect();
    ScalarField::new(*field.xgrid(), values).expect("level length matches grid")
}

/// `κ²` for the horizontal operator at a flat spectral index.
pub fn horizontal_symbol(grid: &TorusGrid, idx: usize, h: Horizontal) -> f64 {
    match h {
        Horizontal::Spectral => grid.frequency_norm(idx).powi(2),
        Horizontal::FiniteDifference => {
            let dx = grid.spacing();
            let [i, j] = grid.unflatten(idx);
            let axis = |k: usize| (2.0 / dx * (0.5 * grid.frequency(k) * dx).sin()).powi(2);
            axis(i) + if grid.dim() == 2 { axis(j) } else { 0.0 }
        }
    }
}

/// Geometry of the vertical finite-volume scheme.
#[derive(Debug, Clone)]
pub(crate) struct VerticalScheme {
    s: f64,
    a: f64,
    y: Vec<f64>,
    /// Flux coefficients `c_{j+1/2}`, `j = 0..M-1`.
    conductance: Vec<f64>,
    /// Cell integrals of `y^a`; the last entry covers the half cell at the top.
    weight: Vec<f64>,
}

impl VerticalScheme {
    pub(crate) fn new(p: &FractionalParams, ygrid: &GradedYGrid) -> Self {
        let a = p.a();
        let b = 1.0 - a;
        let y = ygrid.nodes().to_vec();
        let m = y.len() - 1;
        let conductance = (0..m).map(|j| b / (y[j + 1].powf(b) - y[j].powf(b))).collect();
        let prim = |t: f64| t.powf(1.0 + a) / (1.0 + a);
        let mid = |j: usize| 0.5 * (y[j] + y[j + 1]);
        let mut weight = vec![0.0; m + 1];
        for j in 1..m {
            weight[j] = prim(mid(j)) - prim(mid(j - 1));
        }
        weight[m] = prim(y[m]) - prim(mid(m - 1));
        Self { s: p.s(), a, y, conductance, weight }
    }

    pub(crate) fn nodes(&self) -> &[f64] {
        &self.y
    }

    pub(crate) fn conductance(&self) -> &[f64] {
        &self.conductance
    }

    pub(crate) fn weight(&self) -> &[f64] {
        &self.weight
    }

    /// Profile `φ(y_j)` with `φ(0) = 1` and the normalized system residual.
    pub(crate) fn profile(&self, k2: f64, top: TopBoundary) -> Result<(Vec<f64>, f64)> {
        let m = self.y.len() - 1;
        if k2 == 0.0 {
            // The bounded solution of the zero mode is constant.
            return Ok((vec![1.0; m + 1], 0.0));
        }
        let c = &self.conductance;
        let w = &self.weight;
        let unknowns = match top {
            TopBoundary::ModeDecay => m,
            TopBoundary::Zero => m - 1,
        };
        let mut lower = vec![0.0; unknowns];
        let mut diag = vec![0.0; unknowns];
        let mut upper = vec![0.0; unknowns];
        let mut rhs = vec![0.0; unknowns];
        for r in 0..unknowns {
            let j = r + 1;
            if j < m {
                lower[r] = -c[j - 1];
                diag[r] = c[j - 1] + c[j] + k2 * w[j];
                upper[r] = -c[j];
            } else {
                let kappa = k2.sqrt();
                let ymax = self.y[m];
                let robin = kappa * bessel_ratio(self.s, kappa * ymax) * ymax.powf(self.a);
                lower[r] = -c[m - 1];
                diag[r] = c[m - 1] + robin + k2 * w[m];
            }
        }
        rhs[0] = c[0];
        let sol = thomas(&lower, &diag, &upper, &rhs)?;
        let mut phi = Vec::with_capacity(m + 1);
        phi.push(1.0);
        phi.extend_from_slice(&sol);
        if top == TopBoundary::Zero {
            phi.push(0.0);
        }
        let scale = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
        let mut worst = 0.0f64;
        for r in 0..unknowns {
            let mut v = diag[r] * sol[r] - rhs[r];
            if r > 0 {
                v += lower[r] * sol[r - 1];
            }
            if r + 1 < unknowns {
                v += upper[r] * sol[r + 1];
            }
            worst = worst.max(v.abs());
        }
        Ok((phi, worst / scale))
    }
}

/// Tridiagonal solve without pivoting; the systems here are strictly
/// diagonally dominant M-matrices.
pub(crate) fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Internal("singular tridiagonal system".into()));
    }
    cp[0] = upper[0] / denom;
    dp[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * cp[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Internal("singular tridiagonal system".into()));
        }
        cp[i] = upper[i] / denom;
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests;
