//! The boundary expansion `u = f + y^{1-a} g + O(y²)` as a measurement.

use serde::{Deserialize, Serialize};

use super::{poisson_extend, ExtensionSolution};
use crate::error::{invalid, Result};
use crate::fft::Transform;
use crate::field::ScalarField;
use crate::holder::fit_exponent;
use crate::params::FractionalParams;

/// Residuals below this multiple of `1 + sup|f|` are round-off and are left
/// out of the slope fit.
const ROUNDOFF: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionBand {
    pub y_low: f64,
    pub y_high: f64,
    /// `sup |u - f - y^{1-a} g|` over the band.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub g: ScalarField,
    pub bands: Vec<ExpansionBand>,
    /// Log-log slope of residual against `y_high`, when at least three bands
    /// rise above round-off.
    pub slope: Option<f64>,
    pub r2: Option<f64>,
}

fn residual_sup(u: &[f64], f: &[f64], g: &[f64], weight: f64) -> f64 {
    u.iter().zip(f).zip(g).fold(0.0f64, |m, ((u, f), g)| m.max((u - f - weight * g).abs()))
}

fn finish(g: ScalarField, bands: Vec<ExpansionBand>, floor: f64) -> Result<ExpansionFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        bands.iter().filter(|b| b.residual > floor).map(|b| (b.y_high, b.residual)).unzip();
    let (slope, r2) = if xs.len() >= 3 {
        let fit = fit_exponent(&xs, &ys)?;
        (Some(fit.slope), Some(fit.r2))
    } else {
        (None, None)
    };
    Ok(ExpansionFit { g, bands, slope, r2 })
}

/// Reads `g` from the first level and measures the remainder on dyadic
/// bands `(Y/2^{b+3}, Y/2^{b+2}]` down to the second node.
pub fn expansion_fit(sol: &ExtensionSolution) -> Result<ExpansionFit> {
    let field = &sol.field;
    let y = field.ygrid().nodes();
    let height = field.ygrid().height();
    if y.iter().filter(|&&v| v > 0.0 && v <= 0.25 * height).count() < 6 {
        return Err(invalid("need at least 6 y-levels below Y/4"));
    }
    let b = sol.params.profile_exponent();
    let f = field.level(0);
    let g: Vec<f64> = field.level(1).iter().zip(f).map(|(u, f)| (u - f) / y[1].powf(b)).collect();
    let mut bands = Vec::new();
    let mut high = 0.25 * height;
    while high > y[2] {
        let low = 0.5 * high;
        let mut residual = None::<f64>;
        for j in 2..y.len() {
            if y[j] > low && y[j] <= high {
                let r = residual_sup(field.level(j), f, &g, y[j].powf(b));
                residual = Some(residual.unwrap_or(0.0).max(r));
            }
        }
        if let Some(residual) = residual {
            bands.push(ExpansionBand { y_low: low, y_high: high, residual });
        }
        high = low;
    }
    let floor = ROUNDOFF * (1.0 + field.trace().sup_norm());
    finish(ScalarField::new(*field.xgrid(), g)?, bands, floor)
}

/// The same measurement on the Poisson-kernel extension at heights `ys`.
pub fn expansion_fit_poisson(f: &ScalarField, p: &FractionalParams, ys: &[f64]) -> Result<ExpansionFit> {
    if ys.len() < 3 {
        return Err(invalid("need at least 3 heights"));
    }
    let b = p.profile_exponent();
    let y0 = 1e-10 * f.grid().length();
    let u0 = poisson_extend(f, p, y0)?;
    let g: Vec<f64> = u0.values().iter().zip(f.values()).map(|(u, f)| (u - f) / y0.powf(b)).collect();
    let mut bands = Vec::new();
    for &y in ys {
        let u = poisson_extend(f, p, y)?;
        let residual = residual_sup(u.values(), f.values(), &g, y.powf(b));
        bands.push(ExpansionBand { y_low: y, y_high: y, residual });
    }
    finish(ScalarField::new(*f.grid(), g)?, bands, ROUNDOFF * (1.0 + f.sup_norm()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    /// Node used as the centre.
    pub center: [f64; 2],
    /// `D = g(x0)`.
    pub d: f64,
    pub gradient: [f64; 2],
    pub radii: Vec<f64>,
    /// Smallest `C` valid on each half-ball.
    pub constants: Vec<f64>,
    pub max_constant: f64,
}

/// Smallest `C` with
/// `|u - f(x0) - ∇f(x0)·(x-x0) - D y^{1-a}| ≤ C(|x-x0|² + y² + |x-x0| y^{1-a})`
/// on half-balls of radius `R0, R0/2, ...` around the node nearest `x0`.
pub fn check_corollary_expansion(sol: &ExtensionSolution, x0: [f64; 2]) -> Result<CorollaryReport> {
    let field = &sol.field;
    let g = field.xgrid();
    let y = field.ygrid().nodes();
    let b = sol.params.profile_exponent();
    let h = g.spacing();
    let snap = |x: f64| (((x + 0.5 * g.length()) / h).round() as i64).rem_euclid(g.n() as i64) as usize;
    let ci = snap(x0[0]);
    let cj = if g.dim() == 2 { snap(x0[1]) } else { 0 };
    let center_idx = g.flatten([ci, cj]);
    let center = g.point(center_idx);

    let f = field.level(0);
    let d = (field.at(1, center_idx) - f[center_idx]) / y[1].powf(b);
    let grads = Transform::new(g).gradient(f);
    let mut gradient = [0.0; 2];
    for (k, gr) in grads.iter().enumerate() {
        gradient[k] = gr[center_idx];
    }
    let f0 = f[center_idx];

    let top = (g.length() / 8.0).min(0.25 * field.ygrid().height());
    let mut radii = Vec::new();
    let mut constants = Vec::new();
    let mut r = top;
    while r >= 4.0 * h && radii.len() < 6 {
        let mut worst = 0.0f64;
        for (j, &yj) in y.iter().enumerate() {
            if yj > r {
                break;
            }
            for idx in 0..g.len() {
                let p = g.point(idx);
                let dx = [g.wrap(p[0] - center[0]), if g.dim() == 2 { g.wrap(p[1] - center[1]) } else { 0.0 }];
                let dist = dx[0].hypot(dx[1]);
                if dist * dist + yj * yj > r * r || (j == 0 && idx == center_idx) {
                    continue;
                }
                let model = f0 + gradient[0] * dx[0] + gradient[1] * dx[1] + d * yj.powf(b);
                let num = (field.at(j, idx) - model).abs();
                let den = dist * dist + yj * yj + dist * yj.powf(b);
                worst = worst.max(num / den);
            }
        }
        radii.push(r);
        constants.push(worst);
        r *= 0.5;
    }
    let max_constant = constants.iter().copied().fold(0.0, f64::max);
    Ok(CorollaryReport { center, d, gradient, radii, constants, max_constant })
}
