//! The backward characteristic through the origin and the accumulated
//! forcing along it.

use serde::{Deserialize, Serialize};

use super::{DriftField, Forcing};

/// `V(t)` with `V(0) = 0`, `V' = b(t, V)`, and `S(t) = -∫_t^0 f(τ, V(τ)) dτ`,
/// sampled on a uniform clock over `[-1, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowPath {
    /// Increasing sample times from `-1` to `0`.
    pub times: Vec<f64>,
    pub v: Vec<[f64; 2]>,
    pub s: Vec<f64>,
    v_dot: Vec<[f64; 2]>,
    s_dot: Vec<f64>,
}

impl FlowPath {
    /// Cubic Hermite interpolation of `(V, S)` at `t ∈ [-1, 0]`.
    pub fn at(&self, t: f64) -> ([f64; 2], f64) {
        let n = self.times.len() - 1;
        let t0 = self.times[0];
        let h = (self.times[n] - t0) / n as f64;
        let u = ((t - t0) / h).clamp(0.0, n as f64);
        let i = (u.floor() as usize).min(n - 1);
        let x = u - i as f64;
        let h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
        let h10 = x * (1.0 - x) * (1.0 - x);
        let h01 = x * x * (3.0 - 2.0 * x);
        let h11 = x * x * (x - 1.0);
        let mix = |a: f64, da: f64, b: f64, db: f64| h00 * a + h10 * h * da + h01 * b + h11 * h * db;
        let v = [
            mix(self.v[i][0], self.v_dot[i][0], self.v[i + 1][0], self.v_dot[i + 1][0]),
            mix(self.v[i][1], self.v_dot[i][1], self.v[i + 1][1], self.v_dot[i + 1][1]),
        ];
        let s = mix(self.s[i], self.s_dot[i], self.s[i + 1], self.s_dot[i + 1]);
        (v, s)
    }
}

/// Classical RK4 from `t = 0` down to `t = -1` in `steps` uniform steps.
///
/// `S' = f(t, V)` with `f` evaluated along the characteristic, so that
/// `u(t, x + V(t)) - S(t)` has no forcing at the moving origin.
pub fn flow_ode(b: &DriftField, f: &Forcing, steps: usize) -> FlowPath {
    flow_ode_from(b, f, [0.0, 0.0], steps)
}

/// [`flow_ode`] for the characteristic ending at `end` instead of the origin.
pub fn flow_ode_from(b: &DriftField, f: &Forcing, end: [f64; 2], steps: usize) -> FlowPath {
    let steps = steps.max(1);
    let dt = -1.0 / steps as f64;
    let rhs = |t: f64, y: [f64; 3]| -> [f64; 3] {
        let x = [y[0], y[1]];
        let v = b.sample(t, x);
        [v[0], v[1], f.sample(t, x)]
    };
    let mut y = [end[0], end[1], 0.0];
    let mut t = 0.0;
    let mut rev = vec![(t, y, rhs(t, y))];
    for k in 0..steps {
        let k1 = rhs(t, y);
        let k2 = rhs(t + 0.5 * dt, add(y, k1, 0.5 * dt));
        let k3 = rhs(t + 0.5 * dt, add(y, k2, 0.5 * dt));
        let k4 = rhs(t + dt, add(y, k3, dt));
        for c in 0..3 {
            y[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        t = -((k + 1) as f64) / steps as f64;
        rev.push((t, y, rhs(t, y)));
    }
    rev.reverse();
    FlowPath {
        times: rev.iter().map(|r| r.0).collect(),
        v: rev.iter().map(|r| [r.1[0], r.1[1]]).collect(),
        s: rev.iter().map(|r| r.1[2]).collect(),
        v_dot: rev.iter().map(|r| [r.2[0], r.2[1]]).collect(),
        s_dot: rev.iter().map(|r| r.2[2]).collect(),
    }
}

fn add(y: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}
