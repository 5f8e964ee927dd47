//! Reference values for a single Fourier mode of the extension problem.

use crate::error::{invalid, Error, Result};
use crate::params::FractionalParams;

const MAX_STEPS: usize = 1 << 22;

/// `-lim y^a φ'(0)` for `(y^a φ')' = κ² y^a φ`, `φ(0) = 1`, `φ(Y) = 0`.
///
/// Works in `z = y^{1-a}`, where the equation reads
/// `φ_zz = κ² z^{2a/(1-a)} / (1-a)² φ` with a continuous coefficient, and
/// integrates with classical RK4 in `t = z^{1/4}`. Two basis solutions are
/// combined to meet `φ(Y) = 0`.
/// The step count doubles until two results agree to `1e-8` relative.
pub fn mode_ode_oracle(kappa: f64, p: &FractionalParams, height: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid(format!("mode must be non-zero, got {kappa}")));
    }
    if !(height.is_finite() && kappa * height >= 10.0) {
        return Err(invalid(format!("need |k| Y >= 10, got {}", kappa * height)));
    }
    if kappa * height > 600.0 {
        return Err(invalid("|k| Y above 600 overflows the shooting basis"));
    }
    let a = p.a();
    let b = 1.0 - a;
    let zmax = height.powf(b);
    let power = 2.0 * a / b;
    let coef = kappa * kappa / (b * b);
    let q = |z: f64| coef * if power == 0.0 { 1.0 } else { z.powf(power) };

    // `z = t^4` keeps the coefficient at least `C^3` at the origin, where
    // `z^{2a/(1-a)}` alone would cap RK4 near first order.
    let tmax = zmax.powf(0.25);
    let shoot = |steps: usize| -> f64 {
        let dt = tmax / steps as f64;
        // State: (φ_A, φ_A', φ_B, φ_B') with primes in `z`.
        let rhs = |t: f64, s: [f64; 4]| -> [f64; 4] {
            let jac = 4.0 * t * t * t;
            let w = jac * q(t.powi(4));
            [jac * s[1], w * s[0], jac * s[3], w * s[2]]
        };
        let mut s = [1.0, 0.0, 0.0, 1.0];
        for i in 0..steps {
            let t = i as f64 * dt;
            let k1 = rhs(t, s);
            let k2 = rhs(t + 0.5 * dt, add(s, k1, 0.5 * dt));
            let k3 = rhs(t + 0.5 * dt, add(s, k2, 0.5 * dt));
            let k4 = rhs(t + dt, add(s, k3, dt));
            for c in 0..4 {
                s[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        }
        let slope = -s[0] / s[2];
        -b * slope
    };

    let mut steps = 256;
    let mut prev = shoot(steps);
    while steps < MAX_STEPS {
        steps *= 2;
        let next = shoot(steps);
        if (next - prev).abs() <= 1e-8 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::OracleFailure(format!("no convergence for |k| = {kappa} after {MAX_STEPS} steps")))
}

fn add(s: [f64; 4], k: [f64; 4], h: f64) -> [f64; 4] {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3]]
}

/// `K_{1-s}(z) / K_s(z)` from the large-argument expansions of both
/// functions, truncated at the smallest term. Accurate to better than
/// `1e-5` relative for `z ≥ 4`.
pub fn bessel_ratio(s: f64, z: f64) -> f64 {
    series(1.0 - s, z) / series(s, z)
}

fn series(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn p(s: f64) -> FractionalParams {
        FractionalParams::new(s, 1).unwrap()
    }

    #[test]
    fn constant_matches_gamma_closed_form() {
        for s in [0.1, 0.25, 0.4, 0.5] {
            let c = 2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s);
            for k in 1..=8 {
                let k = k as f64;
                let v = mode_ode_oracle(k, &p(s), 20.0).unwrap();
                let ratio = v / k.powf(2.0 * s);
                assert!((ratio - c).abs() <= 1e-6 * c, "s = {s}, k = {k}: {ratio} vs {c}");
            }
        }
    }

    #[test]
    fn half_is_harmonic_extension() {
        let v = mode_ode_oracle(3.0, &p(0.5), 10.0).unwrap();
        // Exact: 3 coth(30).
        assert!((v - 3.0 / (30.0f64).tanh()).abs() < 1e-9);
    }

    #[test]
    fn insensitive_to_height() {
        for s in [0.25, 0.5] {
            let a = mode_ode_oracle(2.0, &p(s), 5.0).unwrap();
            let b = mode_ode_oracle(2.0, &p(s), 10.0).unwrap();
            assert!((a - b).abs() <= 1e-6 * a);
        }
    }

    #[test]
    fn rejects_short_domains() {
        assert!(mode_ode_oracle(1.0, &p(0.25), 5.0).is_err());
        assert!(mode_ode_oracle(0.0, &p(0.25), 50.0).is_err());
    }

    #[test]
    fn bessel_ratio_at_half() {
        // K_{1/2} = K_{1/2}, ratio 1.
        assert!((bessel_ratio(0.5, 4.0) - 1.0).abs() < 1e-15);
        // K_{3/4}(10) / K_{1/4}(10), reference from the integral representation.
        let k = |nu: f64, z: f64| -> f64 {
            let h = 1e-3;
            (0..20_000)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    (-z * t.cosh()).exp() * (nu * t).cosh()
                })
                .sum::<f64>()
                * h
        };
        let reference = k(0.75, 10.0) / k(0.25, 10.0);
        assert!((bessel_ratio(0.25, 10.0) - reference).abs() < 1e-9 * reference);
        let reference = k(0.75, 4.0) / k(0.25, 4.0);
        assert!((bessel_ratio(0.25, 4.0) - reference).abs() < 1e-5 * reference);
    }
}
