//! Closed-form barriers for `div(y^a ∇B) ≤ 0` and their certificates.
//!
//! Points are `X = (x_1, x_2, y)`; in one dimension `x_2 = 0`. Operators are
//! evaluated through `div(y^a ∇B) = y^a (ΔB + (a/y) ∂_y B)` with exact
//! derivatives of the closed forms.

mod bfun;
mod caloric;
mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::FractionalParams;

pub use bfun::{
    bfun_normalization, bfun_operator, bfun_value, check_bfun_properties, compute_bfun, BfunProperties, HalfBallField,
};
pub use caloric::{caloric_residuals, caloric_u, CaloricResiduals, TimeCoefficient};
pub use quadrature::tanh_sinh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BarrierTag {
    #[serde(rename = "sphere_boundary")]
    /// `C(1 - |X|²)^α + |X - X_0|^α` on `B_1^+`, `X_0` on the upper sphere.
    SphereBoundary,
    /// `|X - (x_0, 0)|^α + C y^α` for `0 < y < 1`.
    #[serde(rename = "flat_boundary")]
    FlatBoundary,
    /// The normalised integral `B` on `B_1^+`; `C` holds the normalisation.
    #[serde(rename = "bfun")]
    Bfun,
    /// The caloric `U` about `(x_0, 0)` at `t = 0`; `C` holds the time
    /// coefficient.
    #[serde(rename = "caloric_U")]
    CaloricU,
}

impl BarrierTag {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SphereBoundary => "sphere_boundary",
            Self::FlatBoundary => "flat_boundary",
            Self::Bfun => "bfun",
            Self::CaloricU => "caloric_U",
        }
    }
}

impl std::str::FromStr for BarrierTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere_boundary" => Ok(Self::SphereBoundary),
            "flat_boundary" => Ok(Self::FlatBoundary),
            "bfun" => Ok(Self::Bfun),
            "caloric_U" | "caloric_u" => Ok(Self::CaloricU),
            other => Err(invalid(format!("unknown barrier tag {other}"))),
        }
    }
}

/// Slack allowed on the sign condition for exactly differentiated forms.
pub const EXACT_SLACK: f64 = 1e-8;
/// Radius of the region where the flux-difference operator of `B` is
/// sampled.
pub const BFUN_RADIUS: f64 = 0.9;
pub const BFUN_Y_MIN: f64 = 0.1;
/// Slack per `h²` for the flux-difference path of `B`, whose exact operator
/// vanishes; the measured truncation constant on the sampled region is
/// about 11.
pub const FD_SLACK: f64 = 32.0;
/// Search interval for the constant `C`.
pub const C_RANGE: (f64, f64) = (1.0, 1024.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub tag: BarrierTag,
    pub params: FractionalParams,
    pub alpha: f64,
    /// `X_0` for the sphere barrier, `(x_0, 0)` for the flat one.
    pub center: [f64; 3],
    pub c: f64,
    /// Lattice spacing used to find `c`.
    pub h_search: f64,
}

impl BarrierSpec {
    pub fn with_constant(self, c: f64) -> Self {
        Self { c, ..self }
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        let al = self.alpha;
        match self.tag {
            BarrierTag::SphereBoundary => self.c * (1.0 - norm2(x)).powf(al) + dist(x, self.center).powf(al),
            BarrierTag::FlatBoundary => dist(x, self.center).powf(al) + self.c * x[2].powf(al),
            BarrierTag::Bfun => bfun_value(&self.params, x[0], x[2]).map(|v| v.0).unwrap_or(f64::NAN),
            BarrierTag::CaloricU => caloric_u(&self.params, self.c, [self.center[0], self.center[1]], 0.0, x),
        }
    }

    /// `div(y^a ∇B)` at a point with `y > 0`, `X ≠ center`. Exact for the
    /// closed forms; flux differences of width `h_search / 2` for `B`.
    pub fn operator(&self, x: [f64; 3]) -> f64 {
        let n = self.params.dim() as f64;
        let a = self.params.a();
        let al = self.alpha;
        let y = x[2];
        let ya = y.powf(a);
        let d = dist(x, self.center);
        match self.tag {
            BarrierTag::SphereBoundary => {
                let r2 = norm2(x);
                let q = 1.0 - r2;
                let first = al * q.powf(al - 2.0) * (-2.0 * (n + 1.0 + a) * q + 4.0 * r2 * (al - 1.0));
                let y0 = self.center[2];
                let second = al * (n + al - 1.0 + a * (y - y0) / y) * d.powf(al - 2.0);
                ya * (self.c * first + second)
            }
            BarrierTag::FlatBoundary => {
                let first = al * (n + al - 1.0 + a) * d.powf(al - 2.0);
                let second = self.c * al * (al - 1.0 + a) * y.powf(al - 2.0);
                ya * (first + second)
            }
            BarrierTag::Bfun => {
                let f = |q: [f64; 3]| self.value(q);
                flux_operator(&f, a, 1, x, 0.5 * self.h_search)
            }
            BarrierTag::CaloricU => {
                // Δ_x U = 2n and ∂_y² U + (a/y) ∂_y U = -2n, written out.
                let yy = n / (1.0 + a) * (-2.0 - 2.0 * a * (1.0 - a) * y.powf(-a - 1.0));
                let dy = n / (1.0 + a) * (2.0 * (1.0 - a) * y.powf(-a) - 2.0 * y);
                ya * (2.0 * n + yy + a / y * dy)
            }
        }
    }

    /// Operator by centred differences of [`value`](Self::value), step `delta`.
    pub fn operator_fd(&self, x: [f64; 3], delta: f64) -> f64 {
        let a = self.params.a();
        let dims: &[usize] = if self.params.dim() == 2 { &[0, 1, 2] } else { &[0, 2] };
        let centre = self.value(x);
        let mut lap = 0.0;
        for &k in dims {
            let mut p = x;
            let mut m = x;
            p[k] += delta;
            m[k] -= delta;
            lap += (self.value(p) - 2.0 * centre + self.value(m)) / (delta * delta);
        }
        let mut p = x;
        let mut m = x;
        p[2] += delta;
        m[2] -= delta;
        let dy = (self.value(p) - self.value(m)) / (2.0 * delta);
        x[2].powf(a) * (lap + a / x[2] * dy)
    }

    /// Whether the centre is a singular point of the closed form.
    fn singular_centre(&self) -> bool {
        matches!(self.tag, BarrierTag::SphereBoundary | BarrierTag::FlatBoundary)
    }

    /// Whether `x` lies where the sign condition is checked.
    pub fn in_region(&self, x: [f64; 3]) -> bool {
        match self.tag {
            BarrierTag::SphereBoundary => norm2(x) < 1.0 && x[2] > 0.0,
            // B is singular where the sphere meets y = 0, and difference
            // quotients lose accuracy in the degenerate layer.
            BarrierTag::Bfun => norm2(x) < BFUN_RADIUS * BFUN_RADIUS && x[2] >= BFUN_Y_MIN,
            BarrierTag::CaloricU => dist(x, self.center) < 1.0 && x[2] > 0.0,
            BarrierTag::FlatBoundary => {
                x[2] > 0.0 && x[2] < 1.0 && {
                    let dx = [x[0] - self.center[0], x[1] - self.center[1]];
                    dx[0].hypot(dx[1]) <= 1.0
                }
            }
        }
    }
}

/// `div(y^a ∇f)` with the vertical flux
/// `(1-a)(f(y+δ) - f(y)) / ((y+δ)^{1-a} - y^{1-a})`, exact on `y^{1-a}`.
pub(crate) fn flux_operator(f: &dyn Fn([f64; 3]) -> f64, a: f64, dim: usize, x: [f64; 3], delta: f64) -> f64 {
    let y = x[2];
    let b = 1.0 - a;
    let at = |dy: f64| f([x[0], x[1], y + dy]);
    let centre = f(x);
    let up = b * (at(delta) - centre) / ((y + delta).powf(b) - y.powf(b));
    let down = b * (centre - at(-delta)) / (y.powf(b) - (y - delta).powf(b));
    let mut lap = 0.0;
    for k in 0..dim {
        let mut p = x;
        let mut m = x;
        p[k] += delta;
        m[k] -= delta;
        lap += (f(p) - 2.0 * centre + f(m)) / (delta * delta);
    }
    (up - down) / delta + y.powf(a) * lap
}

fn norm2(x: [f64; 3]) -> f64 {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
}

fn dist(x: [f64; 3], c: [f64; 3]) -> f64 {
    ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt()
}

/// Lattice `h·Z^{n+1}` in the validity region, minus collars of width `2h`
/// around the centre and `y = 0`.
pub fn sample_points(spec: &BarrierSpec, h: f64) -> Vec<[f64; 3]> {
    let two_d = spec.params.dim() == 2;
    let span = match spec.tag {
        BarrierTag::SphereBoundary | BarrierTag::Bfun => [0.0, 0.0],
        BarrierTag::FlatBoundary | BarrierTag::CaloricU => [spec.center[0], spec.center[1]],
    };
    let k = (1.0 / h).round() as i64 + 1;
    let mut out = Vec::new();
    for i in -k..=k {
        let x1 = span[0] + i as f64 * h;
        for j in if two_d { -k..=k } else { 0..=0 } {
            let x2 = if two_d { span[1] + j as f64 * h } else { 0.0 };
            for l in 1..=k {
                let y = l as f64 * h;
                let x = [x1, x2, y];
                let near_centre = spec.singular_centre() && dist(x, spec.center) < 2.0 * h;
                if y < 2.0 * h || near_centre || !spec.in_region(x) {
                    continue;
                }
                out.push(x);
            }
        }
    }
    out
}

/// Points approaching the centre along several rays, at distances
/// `2^{-k}`, `k = 4..40`; they certify the sign as the collar shrinks.
/// Empty for forms without a singular centre.
pub fn ray_points(spec: &BarrierSpec) -> Vec<[f64; 3]> {
    if !spec.singular_centre() {
        return Vec::new();
    }
    let c = spec.center;
    let dirs: Vec<[f64; 3]> = match spec.tag {
        BarrierTag::SphereBoundary => {
            // Inward directions making angles with the inner normal -X_0.
            let normal = [-c[0], -c[1], -c[2]];
            let tangent = if spec.params.dim() == 2 && c[1].abs() < 0.99 {
                let t = [-c[2], 0.0, c[0]];
                let l = norm2(t).sqrt();
                [t[0] / l, t[1] / l, t[2] / l]
            } else {
                [-c[2], 0.0, c[0]]
            };
            (1..12)
                .flat_map(|i| {
                    let th = std::f64::consts::FRAC_PI_2 * i as f64 / 12.0;
                    [1.0, -1.0].map(|sg| {
                        let (ct, st) = (th.cos(), sg * th.sin());
                        [
                            ct * normal[0] + st * tangent[0],
                            ct * normal[1] + st * tangent[1],
                            ct * normal[2] + st * tangent[2],
                        ]
                    })
                })
                .chain(std::iter::once(normal))
                .collect()
        }
        BarrierTag::Bfun | BarrierTag::CaloricU => unreachable!("no singular centre"),
        BarrierTag::FlatBoundary => (1..12)
            .map(|i| {
                let th = std::f64::consts::PI * i as f64 / 12.0;
                [th.cos(), 0.0, th.sin()]
            })
            .collect(),
    };
    let mut out = Vec::new();
    for d in dirs {
        for k in 4..=40 {
            let r = 0.5f64.powi(k);
            let x = [c[0] + r * d[0], c[1] + r * d[1], c[2] + r * d[2]];
            if spec.in_region(x) {
                out.push(x);
            }
        }
    }
    out
}

fn bfun_normalization_for(p: &FractionalParams) -> Result<f64> {
    if p.dim() != 1 || p.a() <= 0.0 {
        return Err(invalid("the B function needs n = 1 and s < 1/2"));
    }
    bfun_normalization(p.a())
}

fn max_operator(spec: &BarrierSpec, points: &[[f64; 3]]) -> f64 {
    points.iter().map(|&x| spec.operator(x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Checks the lemma constraints and finds the smallest `C ∈ [1, 1024]` for
/// which the sampled operator is non-positive, by bisection on the lattice
/// of spacing `h_search` together with the ray points.
///
/// `B` and `U` carry no free constant: `C` is the normalisation of `B`
/// and the exact time coefficient of `U`; `alpha` and, for `B`, `center`
/// are ignored.
pub fn make_barrier(
    tag: BarrierTag,
    params: &FractionalParams,
    alpha: f64,
    center: [f64; 3],
    h_search: f64,
) -> Result<BarrierSpec> {
    if !(h_search > 0.0 && h_search <= 0.125) {
        return Err(invalid("search spacing must lie in (0, 1/8]"));
    }
    let a = params.a();
    match tag {
        BarrierTag::SphereBoundary => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(invalid(format!("sphere barrier needs alpha in (0, 1), got {alpha}")));
            }
            if (norm2(center) - 1.0).abs() > 1e-12 || center[2] <= 0.0 {
                return Err(invalid("X_0 must lie on the unit sphere with y_0 > 0"));
            }
        }
        BarrierTag::FlatBoundary => {
            if !(alpha > 0.0 && alpha < 1.0 - a) {
                return Err(invalid(format!("flat barrier needs alpha in (0, 1 - a) = (0, {}), got {alpha}", 1.0 - a)));
            }
            if center[2] != 0.0 || center[0].hypot(center[1]) >= 1.0 {
                return Err(invalid("x_0 must lie in the open unit ball of y = 0"));
            }
        }
        BarrierTag::Bfun => {
            let c = bfun_normalization_for(params)?;
            let spec = BarrierSpec { tag, params: *params, alpha: 0.0, center: [0.0; 3], c, h_search };
            return Ok(spec);
        }
        BarrierTag::CaloricU => {
            if center[2] != 0.0 {
                return Err(invalid("x_0 must lie on y = 0"));
            }
            let c = TimeCoefficient::Exact.value(params);
            return Ok(BarrierSpec { tag, params: *params, alpha: 0.0, center, c, h_search });
        }
    }
    if params.dim() == 1 && center[1] != 0.0 {
        return Err(invalid("second coordinate must vanish in one dimension"));
    }
    let spec = BarrierSpec { tag, params: *params, alpha, center, c: 0.0, h_search };
    let mut points = sample_points(&spec, h_search);
    points.extend(ray_points(&spec));
    let ok = |c: f64| max_operator(&spec.with_constant(c), &points) <= 0.0;
    let (mut lo, mut hi) = C_RANGE;
    if ok(lo) {
        return Ok(spec.with_constant(lo));
    }
    if !ok(hi) {
        return Err(Error::NoCertificate(format!(
            "{} with alpha = {alpha}: no C <= {hi} makes the operator non-positive",
            tag.name()
        )));
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(spec.with_constant(hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_operator: f64,
    pub samples: usize,
    pub h: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluates the operator on the lattice of spacing `h`; for `B` the
/// difference width follows `h`.
pub fn verify_supersolution(spec: &BarrierSpec, h: f64) -> Result<VerificationReport> {
    let spec = BarrierSpec { h_search: if spec.tag == BarrierTag::Bfun { h } else { spec.h_search }, ..*spec };
    let points = sample_points(&spec, h);
    if points.len() < 1000 {
        return Err(invalid(format!("only {} samples at h = {h}; need 1000", points.len())));
    }
    Ok(report(&spec, &points, h))
}

/// The sign check along rays into the centre.
pub fn verify_rays(spec: &BarrierSpec) -> VerificationReport {
    report(spec, &ray_points(spec), 0.0)
}

fn report(spec: &BarrierSpec, points: &[[f64; 3]], h: f64) -> VerificationReport {
    let max_operator = max_operator(spec, points);
    let tolerance = match spec.tag {
        BarrierTag::Bfun => FD_SLACK * h * h,
        _ => EXACT_SLACK,
    };
    VerificationReport { max_operator, samples: points.len(), h, tolerance, pass: max_operator <= tolerance }
}

/// Serialized certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub tag: BarrierTag,
    pub params: FractionalParams,
    pub alpha: f64,
    pub center: [f64; 3],
    #[serde(rename = "C_found")]
    pub c_found: f64,
    pub max_operator_value: f64,
    pub h: f64,
    pub pass: bool,
    /// Reports at `h` and `h/2` plus the ray check.
    pub reports: Vec<VerificationReport>,
}

/// Verifies at `h` and `h/2` and along the rays.
pub fn certify(spec: &BarrierSpec, h: f64) -> Result<Certificate> {
    let coarse = verify_supersolution(spec, h)?;
    let fine = verify_supersolution(spec, 0.5 * h)?;
    let rays = verify_rays(spec);
    let pass = coarse.pass && fine.pass && rays.pass;
    Ok(Certificate {
        tag: spec.tag,
        params: spec.params,
        alpha: spec.alpha,
        center: spec.center,
        c_found: spec.c,
        max_operator_value: coarse.max_operator.max(fine.max_operator).max(rays.max_operator),
        h,
        pass,
        reports: vec![coarse, fine, rays],
    })
}

/// Default sphere point `X_0 = (0.6, 0, 0.8)`.
pub const DEFAULT_SPHERE_POINT: [f64; 3] = [0.6, 0.0, 0.8];

#[cfg(test)]
mod tests;
