//! Four closed-form solutions of `div(y^a ∇u) = 0` and their boundary
//! fluxes, used to certify the discrete scheme.

use serde::{Deserialize, Serialize};

use super::VerticalScheme;
use crate::error::{invalid, Result};
use crate::grid::GradedYGrid;
use crate::params::FractionalParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecialSolution {
    /// `A·x`, flux 0.
    Linear { a: [f64; 2] },
    /// `y^{1-a}/(1-a)`, flux 1.
    Profile,
    /// `y^{1-a}/(1-a) · A·x`, flux `A·x`.
    ProfileLinear { a: [f64; 2] },
    /// `|x|² - n/(1+a) y²`, flux 0.
    Quadratic,
}

impl SpecialSolution {
    pub fn all(a: [f64; 2]) -> [SpecialSolution; 4] {
        [Self::Linear { a }, Self::Profile, Self::ProfileLinear { a }, Self::Quadratic]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear { .. } => "linear",
            Self::Profile => "profile",
            Self::ProfileLinear { .. } => "profile_linear",
            Self::Quadratic => "quadratic",
        }
    }

    pub fn evaluate(&self, p: &FractionalParams, x: [f64; 2], y: f64) -> f64 {
        let b = p.profile_exponent();
        let dot = |a: &[f64; 2]| a[0] * x[0] + if p.dim() == 2 { a[1] * x[1] } else { 0.0 };
        match self {
            Self::Linear { a } => dot(a),
            Self::Profile => y.powf(b) / b,
            Self::ProfileLinear { a } => y.powf(b) / b * dot(a),
            Self::Quadratic => {
                let r2 = x[0] * x[0] + if p.dim() == 2 { x[1] * x[1] } else { 0.0 };
                r2 - p.dim() as f64 / (1.0 + p.a()) * y * y
            }
        }
    }

    /// `lim y^a ∂_y u` at `x`.
    pub fn expected_dtn(&self, p: &FractionalParams, x: [f64; 2]) -> f64 {
        match self {
            Self::Linear { .. } | Self::Quadratic => 0.0,
            Self::Profile => 1.0,
            Self::ProfileLinear { a } => a[0] * x[0] + if p.dim() == 2 { a[1] * x[1] } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialResiduals {
    /// Sup of the cell flux balance `F_{j+1/2} - F_{j-1/2} + W_j Δ_h u`.
    pub pde_residual: f64,
    /// Sup of `|(1-a)(u(y_1) - u(0)) / y_1^{1-a} - expected|`.
    pub dtn_error: f64,
    pub nx: usize,
    pub m: usize,
}

/// Discrete residuals of `sol` on the box `[-1, 1]^n × [0, 1]` with `nx`
/// intervals per horizontal axis (second-order differences) and `m`
/// default-graded intervals in `y`.
pub fn special_solution_residuals(
    sol: SpecialSolution,
    p: &FractionalParams,
    nx: usize,
    m: usize,
) -> Result<SpecialResiduals> {
    if nx < 4 {
        return Err(invalid("need at least 4 horizontal intervals"));
    }
    let ygrid = GradedYGrid::for_params(1.0, m, p)?;
    let scheme = VerticalScheme::new(p, &ygrid);
    let y = scheme.nodes();
    let c = scheme.conductance();
    let w = scheme.weight();
    let hx = 2.0 / nx as f64;
    let coord = |i: usize| -1.0 + i as f64 * hx;
    let u = |x: [f64; 2], yj: f64| sol.evaluate(p, x, yj);
    let second = if p.dim() == 2 { 1..nx } else { 0..1 };

    let mut pde_residual = 0.0f64;
    for i in 1..nx {
        for k in second.clone() {
            let x = [coord(i), if p.dim() == 2 { coord(k) } else { 0.0 }];
            for j in 1..m {
                let flux_up = c[j] * (u(x, y[j + 1]) - u(x, y[j]));
                let flux_down = c[j - 1] * (u(x, y[j]) - u(x, y[j - 1]));
                let centre = u(x, y[j]);
                let mut lap = (u([x[0] + hx, x[1]], y[j]) - 2.0 * centre + u([x[0] - hx, x[1]], y[j])) / (hx * hx);
                if p.dim() == 2 {
                    lap += (u([x[0], x[1] + hx], y[j]) - 2.0 * centre + u([x[0], x[1] - hx], y[j])) / (hx * hx);
                }
                pde_residual = pde_residual.max((flux_up - flux_down + w[j] * lap).abs());
            }
        }
    }

    let mut dtn_error = 0.0f64;
    let second = if p.dim() == 2 { 0..nx + 1 } else { 0..1 };
    for i in 0..=nx {
        for k in second.clone() {
            let x = [coord(i), if p.dim() == 2 { coord(k) } else { 0.0 }];
            let q = c[0] * (u(x, y[1]) - u(x, 0.0));
            dtn_error = dtn_error.max((q - sol.expected_dtn(p, x)).abs());
        }
    }
    Ok(SpecialResiduals { pde_residual, dtn_error, nx, m })
}
