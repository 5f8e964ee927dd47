//! Closed-form extension by the Poisson kernel.
//!
//! The kernel `C y^{1-a} / (|z|² + y²)^{(n+1-a)/2}` has Fourier transform
//! `ψ(|ξ| y)` with `ψ(r) = T(r) / T(0)` and
//! `T(r) = ∫ exp(s v - e^v - r² e^{-v} / 4) dv`, which is `2^{1-s} r^s K_s(r)`
//! up to the factor `Γ(s)`. Applying `ψ` as a multiplier is convolution with
//! the periodized kernel; `ψ(0) = 1` fixes the unit mass.

use crate::error::{ensure_finite, invalid, Result};
use crate::fft::Transform;
use crate::field::ScalarField;
use crate::params::FractionalParams;

const STEP: f64 = 0.125;
const UPPER: f64 = 6.0;

fn integral(s: f64, r: f64) -> f64 {
    let lower = -40.0 / s;
    let count = ((UPPER - lower) / STEP).ceil() as usize;
    let quarter = 0.25 * r * r;
    (0..=count)
        .map(|i| {
            let v = lower + i as f64 * STEP;
            (s * v - v.exp() - quarter * (-v).exp()).exp()
        })
        .sum::<f64>()
        * STEP
}

/// `ψ(r)`; equals 1 at 0 and decays like `r^{s-1/2} e^{-r}`.
pub fn poisson_symbol(s: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    integral(s, r) / integral(s, 0.0)
}

/// `u(·, y)` for the extension of `f`.
pub fn poisson_extend(f: &ScalarField, p: &FractionalParams, y: f64) -> Result<ScalarField> {
    if !(y.is_finite() && y > 0.0) {
        return Err(invalid(format!("height must be positive, got {y}")));
    }
    ensure_finite(f.values(), "trace")?;
    let g = *f.grid();
    let t0 = integral(p.s(), 0.0);
    let mut cache: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    let symbol: Vec<f64> = (0..g.len())
        .map(|idx| {
            let r = g.frequency_norm(idx) * y;
            *cache.entry(r.to_bits()).or_insert_with(|| {
                if r == 0.0 {
                    1.0
                } else if r > 800.0 {
                    0.0
                } else {
                    integral(p.s(), r) / t0
                }
            })
        })
        .collect();
    ScalarField::new(g, Transform::new(&g).apply(f.values(), |i| symbol[i]))
}
