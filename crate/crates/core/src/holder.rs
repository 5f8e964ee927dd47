//! Lacunary Hölder-class test functions, banded Hölder seminorms and
//! log-log exponent fits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft::Transform;
use crate::field::ScalarField;
use crate::grid::TorusGrid;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderSynthConfig {
    pub beta: f64,
    /// Lacunary base, an integer so every term is periodic.
    pub lambda: u32,
    pub terms: u32,
    pub seed: u64,
    pub amplitude: f64,
}

impl HolderSynthConfig {
    pub fn new(beta: f64, lambda: u32, terms: u32, seed: u64, amplitude: f64) -> Self {
        Self { beta, lambda, terms, seed, amplitude }
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(invalid(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if self.lambda < 2 {
            return Err(invalid(format!("lacunary base must be >= 2, got {}", self.lambda)));
        }
        if self.terms == 0 {
            return Err(invalid("need at least one term"));
        }
        if !self.amplitude.is_finite() {
            return Err(invalid("amplitude must be finite"));
        }
        Ok(())
    }
}

/// `amplitude · Σ_{j=1..J} λ^{-βj} cos(λ^j 2πx/L + θ_j)` with phases from the
/// seeded stream. In 2D the sum is taken along each axis with its own phases
/// and the two halves are averaged.
pub fn synth_holder(cfg: &HolderSynthConfig, grid: &TorusGrid) -> Result<ScalarField> {
    cfg.validate()?;
    let top = (cfg.lambda as f64).powi(cfg.terms as i32);
    if top > (grid.n() / 2) as f64 {
        return Err(Error::Resolution(format!("highest frequency {top} exceeds N/2 = {}", grid.n() / 2)));
    }
    let mut rng = Rng::seeded(cfg.seed);
    let axes = grid.dim();
    let phases: Vec<Vec<f64>> = (0..axes).map(|_| (0..cfg.terms).map(|_| rng.phase()).collect()).collect();
    let base = grid.fundamental();
    let lambda = cfg.lambda as f64;
    let weight = cfg.amplitude / axes as f64;
    let series = |x: f64, theta: &[f64]| -> f64 {
        theta
            .iter()
            .enumerate()
            .map(|(j, th)| {
                let p = lambda.powi(j as i32 + 1);
                p.powf(-cfg.beta) * (p * base * x + th).cos()
            })
            .sum()
    };
    Ok(ScalarField::from_fn(*grid, |p| weight * (0..axes).map(|d| series(p[d], &phases[d])).sum::<f64>()))
}

/// Restricts seminorm pairs to a ball; both points of a pair must lie inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Largest difference quotient `|u(x) - u(x')| / |x - x'|^exponent` over node
/// pairs with `|x - x'|` in `[scale/2, scale]`.
///
/// For `exponent > 1` the quotient is taken on the spectral gradient with
/// exponent `exponent - 1`.
pub fn holder_seminorm(field: &ScalarField, exponent: f64, scale: f64) -> Result<f64> {
    seminorm(field, exponent, scale, None)
}

/// [`holder_seminorm`] restricted to pairs inside `window`.
pub fn holder_seminorm_in(field: &ScalarField, exponent: f64, scale: f64, window: Window) -> Result<f64> {
    seminorm(field, exponent, scale, Some(window))
}

/// `sup |u(x) - u(x')|` over pairs in the band `[scale/2, scale]`.
pub fn increment_sup(field: &ScalarField, scale: f64) -> Result<f64> {
    let g = field.grid();
    check_scale(g, scale)?;
    band_sup(g, &[field.values()], 0.0, scale, None)
}

fn seminorm(field: &ScalarField, exponent: f64, scale: f64, window: Option<Window>) -> Result<f64> {
    if !(exponent > 0.0 && exponent <= 2.0) {
        return Err(invalid(format!("exponent must lie in (0, 2], got {exponent}")));
    }
    let g = field.grid();
    check_scale(g, scale)?;
    if exponent <= 1.0 {
        band_sup(g, &[field.values()], exponent, scale, window)
    } else {
        let grad = Transform::new(g).gradient(field.values());
        let parts: Vec<&[f64]> = grad.iter().map(|v| v.as_slice()).collect();
        band_sup(g, &parts, exponent - 1.0, scale, window)
    }
}

fn check_scale(g: &TorusGrid, scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale <= 0.5 * g.length() + 1e-12 * g.length()) {
        return Err(Error::InvalidScale(format!("scale {scale} outside (0, L/2]")));
    }
    Ok(())
}

fn offsets(g: &TorusGrid, scale: f64) -> Vec<([i64; 2], f64)> {
    let h = g.spacing();
    let lo = 0.5 * scale * (1.0 - 1e-12);
    let hi = scale * (1.0 + 1e-12);
    let mmax = (hi / h).floor() as i64;
    let mut out = Vec::new();
    if g.dim() == 1 {
        for m in 1..=mmax {
            let d = m as f64 * h;
            if d >= lo && d <= hi {
                out.push(([m, 0], d));
            }
        }
    } else {
        for m1 in 0..=mmax {
            for m2 in -mmax..=mmax {
                if m1 == 0 && m2 <= 0 {
                    continue;
                }
                let d = h * ((m1 * m1 + m2 * m2) as f64).sqrt();
                if d >= lo && d <= hi {
                    out.push(([m1, m2], d));
                }
            }
        }
    }
    out
}

fn in_window(g: &TorusGrid, p: [f64; 2], w: &Window) -> bool {
    let dx = g.wrap(p[0] - w.center[0]);
    let dy = if g.dim() == 2 { g.wrap(p[1] - w.center[1]) } else { 0.0 };
    dx.hypot(dy) <= w.radius
}

fn band_sup(g: &TorusGrid, parts: &[&[f64]], exponent: f64, scale: f64, window: Option<Window>) -> Result<f64> {
    let offs = offsets(g, scale);
    let n = g.n() as i64;
    let inside: Vec<bool> = match &window {
        Some(w) => (0..g.len()).map(|i| in_window(g, g.point(i), w)).collect(),
        None => vec![true; g.len()],
    };
    let mut best = 0.0f64;
    let mut pairs = 0usize;
    for &(m, d) in &offs {
        let denom = d.powf(exponent);
        for idx in 0..g.len() {
            if !inside[idx] {
                continue;
            }
            let [i, j] = g.unflatten(idx);
            let other = g.flatten([(i as i64 + m[0]).rem_euclid(n) as usize, (j as i64 + m[1]).rem_euclid(n) as usize]);
            if !inside[other] {
                continue;
            }
            pairs += 1;
            let diff = parts.iter().map(|v| (v[idx] - v[other]).powi(2)).sum::<f64>().sqrt();
            best = best.max(diff / denom);
        }
    }
    if pairs == 0 {
        return Err(Error::InvalidScale(format!("no node pairs at scale {scale}")));
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope; zero for three points on a line.
    pub slope_stderr: f64,
}

/// Least-squares line through `(ln scale, ln value)`.
pub fn fit_exponent(scales: &[f64], values: &[f64]) -> Result<ExponentFit> {
    if scales.len() != values.len() {
        return Err(invalid("scales and values differ in length"));
    }
    if scales.len() < 3 {
        return Err(invalid(format!("need at least 3 points, got {}", scales.len())));
    }
    if scales.iter().chain(values).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("scales and values must be positive and finite"));
    }
    let xs: Vec<f64> = scales.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("scales are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot <= 1e-300 { 1.0 } else { 1.0 - ss_res / ss_tot };
    let slope_stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    Ok(ExponentFit { slope, intercept, r2, slope_stderr })
}

/// Dyadic scales `top, top/2, ...` down to no less than `bottom`.
pub fn dyadic_scales(top: f64, bottom: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = top;
    while s >= bottom * (1.0 - 1e-12) {
        out.push(s);
        s *= 0.5;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn single_term_is_a_cosine() {
        let g = TorusGrid::periodic_1d(64).unwrap();
        let f = synth_holder(&HolderSynthConfig::new(1.0, 2, 1, 3, 1.0), &g).unwrap();
        let theta = crate::rng::Rng::seeded(3).phase();
        for j in 0..64 {
            let x = g.coord(j);
            assert!((f.values()[j] - 0.5 * (2.0 * x + theta).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_amplitude_and_resolution_guard() {
        let g = TorusGrid::periodic_1d(64).unwrap();
        let f = synth_holder(&HolderSynthConfig::new(0.5, 2, 5, 1, 0.0), &g).unwrap();
        assert_eq!(f.sup_norm(), 0.0);
        let err = synth_holder(&HolderSynthConfig::new(0.5, 2, 6, 1, 1.0), &g);
        assert!(matches!(err, Err(Error::Resolution(_))));
    }

    #[test]
    fn weierstrass_exponent_is_recovered() {
        let g = TorusGrid::periodic_1d(1024).unwrap();
        let f = synth_holder(&HolderSynthConfig::new(0.5, 2, 6, 7, 1.0), &g).unwrap();
        // Scales between the shortest and longest wavelengths.
        let scales = dyadic_scales(2.0 * PI / 8.0, 2.0 * PI / 64.0);
        let incr: Vec<f64> = scales.iter().map(|&s| increment_sup(&f, s).unwrap()).collect();
        let fit = fit_exponent(&scales, &incr).unwrap();
        assert!(fit.slope > 0.4 && fit.slope < 0.6, "slope {}", fit.slope);
        let semi: Vec<f64> = scales.iter().map(|&s| holder_seminorm(&f, 0.5, s).unwrap()).collect();
        let (lo, hi) = semi.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi / lo < 3.0);
    }

    #[test]
    fn linear_field_has_unit_lipschitz_quotient() {
        let g = TorusGrid::new(1, 256, 8.0).unwrap();
        let f = ScalarField::from_fn(g, |p| p[0]);
        let w = Window { center: [0.0, 0.0], radius: 2.0 };
        let q = holder_seminorm_in(&f, 1.0, 0.25, w).unwrap();
        assert!((q - 1.0).abs() < 1e-12);
        let c = ScalarField::constant(g, 4.0);
        assert_eq!(holder_seminorm(&c, 0.7, 1.0).unwrap(), 0.0);
        assert_eq!(holder_seminorm(&c, 1.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gradient_seminorm_of_quadratic_profile() {
        // u = cos x has u' = -sin x, whose Lipschitz quotient is at most 1.
        let g = TorusGrid::periodic_1d(256).unwrap();
        let f = ScalarField::from_fn(g, |p| p[0].cos());
        let q = holder_seminorm(&f, 2.0, 0.1).unwrap();
        assert!(q <= 1.0 && q > 0.99, "{q}");
    }

    #[test]
    fn empty_band_is_an_error() {
        let g = TorusGrid::periodic_1d(16).unwrap();
        let f = ScalarField::zeros(g);
        assert!(matches!(holder_seminorm(&f, 0.5, 0.1), Err(Error::InvalidScale(_))));
        assert!(matches!(holder_seminorm(&f, 0.5, 10.0), Err(Error::InvalidScale(_))));
    }

    #[test]
    fn fit_examples() {
        let s = [0.1, 0.2, 0.4, 0.8];
        let fit = fit_exponent(&s, &s.map(|x| x * x)).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12 && (fit.r2 - 1.0).abs() < 1e-12);
        let fit = fit_exponent(&s, &[3.0; 4]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!(fit_exponent(&s, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(fit_exponent(&s[..2], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = crate::rng::Rng::seeded(11);
        let scales = dyadic_scales(1.0, 1.0 / 1024.0);
        let values: Vec<f64> =
            scales.iter().map(|s| 2.5 * s.powf(1.3) * (1.0 + 0.01 * (2.0 * rng.uniform() - 1.0))).collect();
        let fit = fit_exponent(&scales, &values).unwrap();
        assert!(fit.slope > 1.25 && fit.slope < 1.35);
    }

    proptest! {
        #[test]
        fn seminorm_is_homogeneous(seed in 0u64..1000, c in -8.0f64..8.0, e in 0.1f64..2.0) {
            let g = TorusGrid::periodic_1d(64).unwrap();
            let f = synth_holder(&HolderSynthConfig::new(0.6, 2, 4, seed, 1.0), &g).unwrap();
            let a = holder_seminorm(&f, e, 0.5).unwrap();
            let b = holder_seminorm(&f.scaled(c), e, 0.5).unwrap();
            prop_assert!((b - c.abs() * a).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        #[test]
        fn synthesis_is_deterministic(seed in any::<u64>()) {
            let g = TorusGrid::new(2, 16, 3.0).unwrap();
            let cfg = HolderSynthConfig::new(0.4, 2, 3, seed, 1.3);
            let a = synth_holder(&cfg, &g).unwrap();
            let b = synth_holder(&cfg, &g).unwrap();
            prop_assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }

        #[test]
        fn exact_power_laws(p in -3.0f64..3.0, c in 0.01f64..100.0) {
            let s = [0.01, 0.1, 0.3, 1.0, 5.0];
            let fit = fit_exponent(&s, &s.map(|x| c * x.powf(p))).unwrap();
            prop_assert!((fit.slope - p).abs() < 1e-10);
            prop_assert!((fit.r2 - 1.0).abs() < 1e-10);
        }
    }
}
