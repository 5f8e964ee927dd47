//! The function
//! `B(X) = ∫_{B_1^0} Φ(z - X) - |X|^{1-n-a} Φ(z - X/|X|²) dz`, `Φ(X) = |X|^{1-n-a}`,
//! in one dimension, normalised so that `-lim y^a ∂_y B = 1` on `B_1^0`.
//!
//! With `r = |X|` both integrands depend only on the distance `d` from
//! their singular point: `(d² + y²)^{-a/2}` about `z = x` and
//! `(r² d² + y²/r²)^{-a/2}` about `z = x/r²`. Each integral is split at
//! its singular point and evaluated by tanh-sinh.

use serde::{Deserialize, Serialize};

use super::flux_operator;
use super::quadrature::tanh_sinh;
use crate::error::{invalid, Error, Result};
use crate::grid::GradedYGrid;
use crate::holder::fit_exponent;
use crate::params::FractionalParams;

/// Per-evaluation quadrature tolerance.
pub const QUAD_TOL: f64 = 1e-11;

/// `a ∫_R (1 + u²)^{-1-a/2} du = 2a ∫_0^{π/2} cos^a θ dθ`, the flux of the
/// unnormalised integral through `y = 0`.
pub fn bfun_normalization(a: f64) -> Result<f64> {
    let (v, _) = tanh_sinh(std::f64::consts::FRAC_PI_2, QUAD_TOL, |_, rest| rest.sin().powf(a))?;
    Ok(2.0 * a * v)
}

/// `∫_{-1}^{1} g(|z - c|) dz`.
fn about(c: f64, g: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    if c <= -1.0 {
        let off = -1.0 - c;
        return tanh_sinh(2.0, QUAD_TOL, |w, _| g(w + off));
    }
    if c >= 1.0 {
        let off = c - 1.0;
        return tanh_sinh(2.0, QUAD_TOL, |_, rest| g(rest + off));
    }
    let (l, el) = tanh_sinh(1.0 + c, QUAD_TOL, |_, rest| g(rest))?;
    let (r, er) = tanh_sinh(1.0 - c, QUAD_TOL, |w, _| g(w))?;
    Ok((l + r, el + er))
}

fn raw(a: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    let (i1, e1) = about(x, |d| (d * d + y * y).powf(-0.5 * a))?;
    let r2 = x * x + y * y;
    let (i2, e2) = if r2 == 0.0 { (2.0, 0.0) } else { about(x / r2, |d| (r2 * d * d + y * y / r2).powf(-0.5 * a))? };
    Ok((i1 - i2, e1 + e2))
}

fn check(p: &FractionalParams) -> Result<f64> {
    if p.dim() != 1 {
        return Err(invalid("the B function is implemented in one dimension"));
    }
    let a = p.a();
    if a <= 0.0 {
        return Err(invalid("B vanishes identically for s = 1/2; need s < 1/2"));
    }
    bfun_normalization(a)
}

/// `B(x, y)` and its quadrature error estimate.
pub fn bfun_value(p: &FractionalParams, x: f64, y: f64) -> Result<(f64, f64)> {
    let c = check(p)?;
    let (v, e) = raw(p.a(), x, y)?;
    Ok((v / c, e / c))
}

/// `B` sampled on `[-1, 1] × [0, 1]` restricted to the half ball; nodes
/// outside hold `NaN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfBallField {
    pub params: FractionalParams,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major, one row per `y` level.
    pub values: Vec<f64>,
    pub normalization: f64,
    /// Largest tanh-sinh level-to-level difference.
    pub quadrature_error: f64,
}

impl HalfBallField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.xs[i].powi(2) + self.ys[j].powi(2) <= 1.0
    }

    pub fn origin(&self) -> usize {
        self.xs.len() / 2
    }

    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        writeln!(w, "x,y,b")?;
        for (j, y) in self.ys.iter().enumerate() {
            for (i, x) in self.xs.iter().enumerate() {
                if self.is_inside(i, j) {
                    writeln!(w, "{x:.12e},{y:.12e},{:.12e}", self.at(i, j))?;
                }
            }
        }
        Ok(())
    }
}

/// Samples `B` with `nx` uniform intervals in `x` (even) and `m` graded
/// intervals in `y`.
pub fn compute_bfun(p: &FractionalParams, nx: usize, m: usize) -> Result<HalfBallField> {
    let c = check(p)?;
    if nx < 8 || !nx.is_multiple_of(2) {
        return Err(invalid("nx must be even and at least 8"));
    }
    let ygrid = GradedYGrid::for_params(1.0, m, p)?;
    let xs: Vec<f64> = (0..=nx).map(|i| -1.0 + 2.0 * i as f64 / nx as f64).collect();
    let ys = ygrid.nodes().to_vec();
    let mut values = vec![f64::NAN; xs.len() * ys.len()];
    let mut err = 0.0f64;
    for (j, &y) in ys.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            if x * x + y * y > 1.0 {
                continue;
            }
            let (v, e) = raw(p.a(), x, y)?;
            values[j * xs.len() + i] = v / c;
            err = err.max(e / c);
        }
    }
    Ok(HalfBallField { params: *p, xs, ys, values, normalization: c, quadrature_error: err })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfunProperties {
    /// Max `|B|` over 256 points of the upper unit semicircle.
    pub boundary_sup: f64,
    /// Max `|q - 1|` for the flux quotient `q` at the first `y` level, `|x| ≤ 1/2`.
    pub neumann_error: f64,
    /// Largest `c` with `B(x, 0) ≥ c (1 - |x|)^s` on the trace nodes.
    pub c1: f64,
    /// Largest `c` with `B(0,0) - B ≥ c (x² + y^{1-a})` on the nodes.
    pub c2: f64,
    /// Log-log slope of `B(1 - ε, 0)` against `ε`, `ε = 2^{-3..-12}`.
    pub boundary_exponent: f64,
    pub boundary_exponent_r2: f64,
    pub argmax: (f64, f64),
    pub max_at_origin: bool,
    /// Max `|B(x, y) - B(-x, y)|`.
    pub symmetry_error: f64,
    /// Max `|div(y^a ∇B)|` by flux differences on the sample grid, nodes
    /// with `|X| ≤ 0.9` and `y ≥ y_2`.
    pub interior_residual: f64,
    pub pass: bool,
}

pub fn check_bfun_properties(b: &HalfBallField) -> Result<BfunProperties> {
    let p = &b.params;
    let a = p.a();
    let s = p.s();
    let nx = b.xs.len();
    let boundary_sup = (1..256)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / 256.0;
            bfun_value(p, th.cos(), th.sin()).map(|(v, _)| v.abs())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let y1 = b.ys[1];
    let mut neumann_error = 0.0f64;
    let mut c1 = f64::INFINITY;
    for i in 0..nx {
        let x = b.xs[i];
        if x.abs() <= 0.5 {
            let q = -(1.0 - a) * (b.at(i, 1) - b.at(i, 0)) / y1.powf(1.0 - a);
            neumann_error = neumann_error.max((q - 1.0).abs());
        }
        if x.abs() < 1.0 {
            c1 = c1.min(b.at(i, 0) / (1.0 - x.abs()).powf(s));
        }
    }

    let o = b.origin();
    let peak = b.at(o, 0);
    let mut c2 = f64::INFINITY;
    let mut best = (f64::NEG_INFINITY, 0, 0);
    let mut symmetry_error = 0.0f64;
    let mut interior_residual = 0.0f64;
    let hx = b.xs[1] - b.xs[0];
    for j in 0..b.ys.len() {
        let y = b.ys[j];
        for i in 0..nx {
            if !b.is_inside(i, j) {
                continue;
            }
            let v = b.at(i, j);
            let x = b.xs[i];
            if v > best.0 {
                best = (v, i, j);
            }
            symmetry_error = symmetry_error.max((v - b.at(nx - 1 - i, j)).abs());
            if i != o || j != 0 {
                c2 = c2.min((peak - v) / (x * x + y.powf(1.0 - a)));
            }
            if j >= 2 && j + 1 < b.ys.len() && i > 0 && i + 1 < nx && x * x + y * y <= 0.81 {
                let flux = |lo: usize, hi: usize| {
                    (1.0 - a) * (b.at(i, hi) - b.at(i, lo)) / (b.ys[hi].powf(1.0 - a) - b.ys[lo].powf(1.0 - a))
                };
                let vertical = (flux(j, j + 1) - flux(j - 1, j)) / (0.5 * (b.ys[j + 1] - b.ys[j - 1]));
                let horizontal = y.powf(a) * (b.at(i + 1, j) - 2.0 * v + b.at(i - 1, j)) / (hx * hx);
                interior_residual = interior_residual.max((vertical + horizontal).abs());
            }
        }
    }

    let eps: Vec<f64> = (3..=12).map(|k| 0.5f64.powi(k)).collect();
    let vals = eps.iter().map(|&e| bfun_value(p, 1.0 - e, 0.0).map(|(v, _)| v)).collect::<Result<Vec<_>>>()?;
    let fit = fit_exponent(&eps, &vals).map_err(|e| Error::Accuracy(format!("boundary fit failed: {e}")))?;

    let max_at_origin = best.1 == o && best.2 == 0;
    Ok(BfunProperties {
        boundary_sup,
        neumann_error,
        c1,
        c2,
        boundary_exponent: fit.slope,
        boundary_exponent_r2: fit.r2,
        argmax: (b.xs[best.1], b.ys[best.2]),
        max_at_origin,
        symmetry_error,
        interior_residual,
        pass: c1 > 0.0 && c2 > 0.0,
    })
}

/// `div(y^a ∇B)` at a single point by flux differences of width `delta`.
pub fn bfun_operator(p: &FractionalParams, x: f64, y: f64, delta: f64) -> Result<f64> {
    let c = check(p)?;
    let a = p.a();
    let eval = |q: [f64; 3]| raw(a, q[0], q[2]).map(|(v, _)| v / c).unwrap_or(f64::NAN);
    Ok(flux_operator(&eval, a, 1, [x, 0.0, y], delta))
}
