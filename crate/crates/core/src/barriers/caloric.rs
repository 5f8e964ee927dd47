//! The caloric barrier
//! `U = |x - x_0|² + n/(1+a) (2 y^{1-a} - y²) + k (t + 1)`.
//!
//! `div(y^a ∇U) = 0` holds identically. On `y = 0`,
//! `U_t - lim y^a ∂_y U = k - 2n(1-a)/(1+a)`, so `U` solves the extended
//! heat problem only for the exact coefficient; `k = 2n` leaves a positive
//! constant and gives a supersolution.

use serde::{Deserialize, Serialize};

use super::flux_operator;
use crate::error::{invalid, Result};
use crate::holder::fit_exponent;
use crate::params::FractionalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeCoefficient {
    /// `k = 2n(1-a)/(1+a)`.
    Exact,
    /// `k = 2n`.
    Literal,
}

impl TimeCoefficient {
    pub fn value(&self, p: &FractionalParams) -> f64 {
        let n = p.dim() as f64;
        let a = p.a();
        match self {
            Self::Exact => 2.0 * n * (1.0 - a) / (1.0 + a),
            Self::Literal => 2.0 * n,
        }
    }
}

pub fn caloric_u(p: &FractionalParams, k: f64, x0: [f64; 2], t: f64, x: [f64; 3]) -> f64 {
    let n = p.dim() as f64;
    let a = p.a();
    let y = x[2];
    let dx = (x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2);
    dx + n / (1.0 + a) * (2.0 * y.powf(1.0 - a) - y * y) + k * (t + 1.0)
}

/// The interior residual is sampled above the degenerate layer, which the
/// boundary residual covers.
const INTERIOR_Y_MIN: f64 = 0.125;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaloricResiduals {
    pub coefficient: TimeCoefficient,
    pub k: f64,
    pub h: Vec<f64>,
    /// Max `|div(y^a ∇U)|` by flux differences on the lattice, `y ≥ 1/8`.
    pub interior: Vec<f64>,
    /// Max `|U_t - lim y^a ∂_y U|` with one-sided quotients of width `h`.
    pub boundary: Vec<f64>,
    pub interior_order: f64,
    pub boundary_order: f64,
}

/// Residuals on the half ball of radius 1 around `x_0 = 0`, `t ∈ [-1, 0]`,
/// for `h = 2^{-k}`, `k = 3..3+levels`.
pub fn caloric_residuals(
    p: &FractionalParams,
    coefficient: TimeCoefficient,
    levels: usize,
) -> Result<CaloricResiduals> {
    if levels < 3 {
        return Err(invalid("need at least three refinement levels"));
    }
    let k = coefficient.value(p);
    let a = p.a();
    let x0 = [0.0, 0.0];
    let mut hs = Vec::new();
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for level in 0..levels {
        let h = 0.125 * 0.5f64.powi(level as i32);
        let m = (1.0 / h).round() as i64;
        let mut worst_in = 0.0f64;
        let mut worst_bd = 0.0f64;
        for i in -m..=m {
            let x1 = i as f64 * h;
            for ti in 0..=4 {
                let t = -1.0 + 0.25 * ti as f64;
                let u = |x: [f64; 3]| caloric_u(p, k, x0, t, x);
                // U_t by a centred quotient; U is affine in t.
                let ut = (caloric_u(p, k, x0, t + h, [x1, 0.0, 0.0]) - caloric_u(p, k, x0, t - h, [x1, 0.0, 0.0]))
                    / (2.0 * h);
                let flux = (1.0 - a) * (u([x1, 0.0, h]) - u([x1, 0.0, 0.0])) / h.powf(1.0 - a);
                worst_bd = worst_bd.max((ut - flux).abs());
                if ti != 2 {
                    continue;
                }
                for l in 1..m {
                    let y = l as f64 * h;
                    if y < INTERIOR_Y_MIN {
                        continue;
                    }
                    if x1 * x1 + y * y >= 1.0 {
                        break;
                    }
                    worst_in = worst_in.max(flux_operator(&u, a, p.dim(), [x1, 0.0, y], h).abs());
                }
            }
        }
        hs.push(h);
        interior.push(worst_in);
        boundary.push(worst_bd);
    }
    Ok(CaloricResiduals {
        coefficient,
        k,
        interior_order: decay_order(&hs, &interior),
        boundary_order: decay_order(&hs, &boundary),
        h: hs,
        interior,
        boundary,
    })
}

/// Slope of `log r` against `log h`; residuals at roundoff count as converged.
fn decay_order(h: &[f64], r: &[f64]) -> f64 {
    const FLOOR: f64 = 1e-13;
    if r.iter().all(|&v| v <= FLOOR) {
        return f64::INFINITY;
    }
    let r: Vec<f64> = r.iter().map(|v| v.max(FLOOR)).collect();
    fit_exponent(h, &r).map(|f| f.slope).unwrap_or(f64::NAN)
}
