//! The exponent triple shared by every operator.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Diffusion order `s`, the extension weight `a = 1 - 2s`, the target
/// regularity gain `alpha` and the spatial dimension.
///
/// `a` is always derived from `s`; it is never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalParams {
    s: f64,
    alpha: f64,
    dim: usize,
}

impl FractionalParams {
    /// `alpha` defaults to `s`, the middle of the admissible range `(0, 2s)`.
    pub fn new(s: f64, dim: usize) -> Result<Self> {
        if !(s.is_finite() && s > 0.0 && s <= 0.5) {
            return Err(invalid(format!("s must lie in (0, 0.5], got {s}")));
        }
        if dim != 1 && dim != 2 {
            return Err(invalid(format!("dimension must be 1 or 2, got {dim}")));
        }
        Ok(Self { s, alpha: s, dim })
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 2.0 * self.s) {
            return Err(invalid(format!("alpha must lie in (0, 2s) = (0, {}), got {alpha}", 2.0 * self.s)));
        }
        Ok(Self { alpha, ..self })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Extension weight exponent `1 - 2s`.
    pub fn a(&self) -> f64 {
        1.0 - 2.0 * self.s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exponent of the boundary profile `y^(1-a) = y^(2s)`.
    pub fn profile_exponent(&self) -> f64 {
        1.0 - self.a()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_weight_is_consistent() {
        for s in [0.1, 0.25, 1.0 / 3.0, 0.5] {
            let p = FractionalParams::new(s, 1).unwrap();
            assert_eq!(p.a() + 2.0 * p.s(), 1.0);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(FractionalParams::new(0.6, 1).is_err());
        assert!(FractionalParams::new(0.0, 1).is_err());
        assert!(FractionalParams::new(0.25, 3).is_err());
        let p = FractionalParams::new(0.25, 1).unwrap();
        assert!(p.with_alpha(0.5).is_err());
        assert!(p.with_alpha(0.0).is_err());
        assert_eq!(p.with_alpha(0.4).unwrap().alpha(), 0.4);
    }
}
