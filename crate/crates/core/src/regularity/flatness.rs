//! Flatness of an extended space-time field against the ansatz
//! `A·x + D(τ) + D'(τ) y^{1-a}/(1-a)` on shrinking half-cylinders
//! `[-ρ^{2s}, 0] × B_ρ^+`, `ρ = r^k`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extension::{default_ygrid, solve_extension, TopBoundary};
use crate::fft::Transform;
use crate::field::{ExtendedField, ScalarField};
use crate::holder::{fit_exponent, ExponentFit};
use crate::params::FractionalParams;
use rustfft::num_complex::Complex64;

/// Fewer samples than this end the scale sequence.
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessConfig {
    pub r: f64,
    /// Deepest scale index; scales `k = 0..=k_max`.
    pub k_max: usize,
    /// Force `A = 0` in the ansatz.
    pub zero_slope: bool,
}

impl Default for FlatnessConfig {
    fn default() -> Self {
        Self { r: 0.5, k_max: 4, zero_slope: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessScale {
    pub k: usize,
    pub radius: f64,
    /// Clock values of the slices in the window.
    pub times: Vec<f64>,
    pub samples: usize,
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    pub d_prime: Vec<f64>,
    /// Sup of the ansatz deviation over the half-cylinder.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub params: FractionalParams,
    pub config: FlatnessConfig,
    pub scales: Vec<FlatnessScale>,
    /// Log-log fit of deviation against radius; `None` when the deviations
    /// sit at roundoff.
    pub fit: Option<ExponentFit>,
    pub warnings: Vec<String>,
}

impl FlatnessReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn deviations(&self) -> Vec<f64> {
        self.scales.iter().map(|s| s.deviation).collect()
    }

    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        writeln!(w, "k,radius,samples,deviation")?;
        for s in &self.scales {
            writeln!(w, "{},{:.12e},{},{:.12e}", s.k, s.radius, s.samples, s.deviation)?;
        }
        Ok(())
    }
}

/// Fits the ansatz at each scale around `x = 0`.
///
/// `slices` are `(τ, U)` pairs on a uniform clock, increasing, ending at
/// `τ = 0` and starting no later than `τ = -1`. `A` and `D` come from least
/// squares on the trace; `D'` is the second-order derivative of `D` in `τ`.
pub fn flatness_profile(
    slices: &[(f64, ExtendedField)],
    p: &FractionalParams,
    cfg: &FlatnessConfig,
) -> Result<FlatnessReport> {
    if !(cfg.r > 0.0 && cfg.r <= 0.5) {
        return Err(invalid(format!("r must lie in (0, 1/2], got {}", cfg.r)));
    }
    if cfg.k_max < 3 {
        return Err(invalid("need at least scales k = 0..3"));
    }
    if slices.len() < 3 {
        return Err(invalid("need at least three time slices"));
    }
    let times: Vec<f64> = slices.iter().map(|(t, _)| *t).collect();
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300)) || dt <= 0.0 {
        return Err(invalid("slice times must be increasing and uniform"));
    }
    // The clock rate is computed, so allow a small shortfall at τ = -1.
    if times[times.len() - 1].abs() > 1e-9 || times[0] > -1.0 + 1e-6 {
        return Err(Error::Domain(format!(
            "slices must cover [-1, 0], got [{}, {}]",
            times[0],
            times[times.len() - 1]
        )));
    }
    let xgrid = *slices[0].1.xgrid();
    let a = p.a();
    let b = 1.0 - a;
    let mut scales = Vec::new();
    let mut warnings = Vec::new();
    for k in 0..=cfg.k_max {
        let rho = cfg.r.powi(k as i32);
        if rho > 0.5 * xgrid.length() {
            return Err(Error::Domain(format!("radius {rho} exceeds half the period")));
        }
        let start = times.iter().position(|&t| t >= -rho.powf(2.0 * p.s()) - 1e-12).unwrap_or(times.len());
        let window = &slices[start..];
        let xs: Vec<usize> = (0..xgrid.len()).filter(|&i| norm(xgrid.point(i)) <= rho).collect();
        let ys: Vec<f64> = slices[0].1.ygrid().nodes().iter().copied().filter(|&y| y <= rho).collect();
        let samples: usize = window.len()
            * xs.iter().map(|&i| ys.iter().filter(|&&y| norm(xgrid.point(i)).hypot(y) <= rho).count()).sum::<usize>();
        if window.len() < 3 || xs.len() < 3 || samples < MIN_SAMPLES {
            warnings.push(format!(
                "scale k = {k} (radius {rho:.4e}) has {} slices, {} trace nodes and {samples} samples; sequence truncated",
                window.len(),
                xs.len()
            ));
            break;
        }
        let (slope, d) = fit_trace(window, &xs, xgrid.dim(), cfg.zero_slope);
        let d_prime = derivative(&d, dt);
        let mut deviation = 0.0f64;
        for (i, (_, u)) in window.iter().enumerate() {
            for (l, &y) in ys.iter().enumerate() {
                let profile = y.powf(b) / b;
                for &idx in &xs {
                    let x = xgrid.point(idx);
                    if norm(x).hypot(y) > rho {
                        continue;
                    }
                    let plane: f64 = (0..xgrid.dim()).map(|c| slope[c] * x[c]).sum();
                    let model = plane + d[i] + d_prime[i] * profile;
                    deviation = deviation.max((u.at(l, idx) - model).abs());
                }
            }
        }
        scales.push(FlatnessScale {
            k,
            radius: rho,
            times: window.iter().map(|(t, _)| *t).collect(),
            samples,
            a: slope,
            d,
            d_prime,
            deviation,
        });
    }
    if scales.len() < 4 {
        warnings.push(format!("only {} usable scales", scales.len()));
    }
    let magnitude = slices.iter().map(|(_, u)| u.max().abs().max(u.min().abs())).fold(0.0, f64::max);
    let floor = 1e-12 * (1.0 + magnitude);
    let fit = if scales.len() >= 3 && scales.iter().all(|s| s.deviation > floor) {
        let r: Vec<f64> = scales.iter().map(|s| s.radius).collect();
        let e: Vec<f64> = scales.iter().map(|s| s.deviation).collect();
        Some(fit_exponent(&r, &e)?)
    } else {
        None
    };
    Ok(FlatnessReport { params: *p, config: *cfg, scales, fit, warnings })
}

fn norm(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

/// Pooled least squares for `u_i(x) ≈ A·x + D_i` over the trace nodes.
fn fit_trace(window: &[(f64, ExtendedField)], xs: &[usize], dim: usize, zero_slope: bool) -> (Vec<f64>, Vec<f64>) {
    let grid = *window[0].1.xgrid();
    let m = xs.len() as f64;
    let mut mean_x = [0.0; 2];
    for &i in xs {
        let x = grid.point(i);
        mean_x[0] += x[0] / m;
        mean_x[1] += x[1] / m;
    }
    let means: Vec<f64> = window.iter().map(|(_, u)| xs.iter().map(|&i| u.at(0, i)).sum::<f64>() / m).collect();
    let mut slope = vec![0.0; dim];
    if !zero_slope {
        // Normal equations of the centred regression, at most 2×2.
        let mut sxx = [[0.0; 2]; 2];
        let mut sxu = [0.0; 2];
        for (k, (_, u)) in window.iter().enumerate() {
            for &i in xs {
                let x = grid.point(i);
                let c = [x[0] - mean_x[0], x[1] - mean_x[1]];
                let v = u.at(0, i) - means[k];
                for p in 0..dim {
                    sxu[p] += c[p] * v;
                    for q in 0..dim {
                        sxx[p][q] += c[p] * c[q];
                    }
                }
            }
        }
        if dim == 1 {
            slope[0] = sxu[0] / sxx[0][0];
        } else {
            let det = sxx[0][0] * sxx[1][1] - sxx[0][1] * sxx[1][0];
            slope[0] = (sxu[0] * sxx[1][1] - sxu[1] * sxx[0][1]) / det;
            slope[1] = (sxx[0][0] * sxu[1] - sxx[1][0] * sxu[0]) / det;
        }
    }
    let shift: f64 = (0..dim).map(|p| slope[p] * mean_x[p]).sum();
    let d = means.iter().map(|m| m - shift).collect();
    (slope, d)
}

/// Second-order differences: centred inside, three-point one-sided at the ends.
fn derivative(d: &[f64], dt: f64) -> Vec<f64> {
    let n = d.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * d[0] + 4.0 * d[1] - d[2]) / (2.0 * dt)
            } else if i == n - 1 {
                (3.0 * d[n - 1] - 4.0 * d[n - 2] + d[n - 3]) / (2.0 * dt)
            } else {
                (d[i + 1] - d[i - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

/// The clock rate `d` with `u_τ = lim y^a ∂_y U` when `τ = d t` and `u`
/// solves `u_t + (-Δ)^s u = 0`.
pub fn clock_rate(xgrid: &crate::grid::TorusGrid, p: &FractionalParams) -> Result<f64> {
    let c = crate::extension::calibration_constant(xgrid, p)?;
    if !(c < 0.0) {
        return Err(Error::Internal(format!("calibration constant {c} should be negative")));
    }
    Ok(-c)
}

/// Extends every slice with `τ = d t ≥ -1 - dτ` (one spare slice so the
/// window reaches `-1`) on `m` graded levels.
pub fn extension_slices(
    slices: &[(f64, ScalarField)],
    p: &FractionalParams,
    m: usize,
) -> Result<Vec<(f64, ExtendedField)>> {
    let first = slices.first().ok_or_else(|| invalid("no slices"))?;
    let xgrid = *first.1.grid();
    let rate = clock_rate(&xgrid, p)?;
    let ygrid = default_ygrid(&xgrid, p, m, TopBoundary::ModeDecay)?;
    let dtau = if slices.len() > 1 { rate * (slices[1].0 - slices[0].0) } else { 0.0 };
    slices
        .iter()
        .filter(|(t, _)| rate * t >= -1.0 - dtau * (1.0 - 1e-9))
        .map(|(t, u)| Ok((rate * t, solve_extension(u, p, &ygrid, TopBoundary::ModeDecay)?.field)))
        .collect::<Result<Vec<_>>>()
        .map(|mut v| {
            // Keep exactly one slice at or below τ = -1.
            while v.len() > 1 && v[1].0 <= -1.0 + 1e-12 {
                v.remove(0);
            }
            v
        })
}

/// `u(x + v)` by a Fourier phase shift.
pub fn shift_field(u: &ScalarField, v: [f64; 2]) -> ScalarField {
    let g = *u.grid();
    let t = Transform::new(&g);
    let half = g.n() / 2;
    let values = t.apply_complex(u.values(), |idx| {
        let ij = g.unflatten(idx);
        let mut phase = 0.0;
        for axis in 0..g.dim() {
            if ij[axis] == half {
                // A real Nyquist mode cannot be shifted by a fraction of a cell.
                return Complex64::new(0.0, 0.0);
            }
            phase += g.frequency(ij[axis]) * v[axis];
        }
        Complex64::new(phase.cos(), phase.sin())
    });
    ScalarField::new(g, values).expect("grid unchanged")
}
