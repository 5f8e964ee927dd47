//! Drift fields and forcing terms, sampled or closed form.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::grid::TorusGrid;

type DriftFn = Arc<dyn Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync>;

/// `b(t, x)`. Divergence is never assumed or used.
#[derive(Clone)]
pub enum DriftField {
    Zero,
    Constant([f64; 2]),
    /// Closed form together with a bound on `sup |b_1| + |b_2|`.
    Function {
        f: DriftFn,
        bound: f64,
    },
    /// Slices `b(t_i, ·)`, one field per component, linear in time and
    /// bilinear in space between samples. Times must increase.
    Sampled {
        times: Vec<f64>,
        slices: Vec<Vec<ScalarField>>,
    },
}

impl fmt::Debug for DriftField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Constant(c) => write!(f, "Constant({c:?})"),
            Self::Function { bound, .. } => write!(f, "Function {{ bound: {bound} }}"),
            Self::Sampled { times, .. } => write!(f, "Sampled {{ slices: {} }}", times.len()),
        }
    }
}

impl DriftField {
    pub fn function(bound: f64, f: impl Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self::Function { f: Arc::new(f), bound }
    }

    /// Time-independent sampled drift.
    pub fn steady(components: Vec<ScalarField>) -> Result<Self> {
        Self::sampled(vec![0.0], vec![components])
    }

    pub fn sampled(times: Vec<f64>, slices: Vec<Vec<ScalarField>>) -> Result<Self> {
        if times.is_empty() || times.len() != slices.len() {
            return Err(invalid("need one slice per sample time"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("sample times must increase"));
        }
        let grid = *slices[0].first().ok_or_else(|| invalid("empty drift slice"))?.grid();
        for slice in &slices {
            if slice.len() != grid.dim() || slice.iter().any(|c| c.grid() != &grid || !c.is_finite()) {
                return Err(invalid("drift slices must have one finite component per axis"));
            }
        }
        Ok(Self::Sampled { times, slices })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    /// Bound on `sup_x |b_1| + |b_2|` over all times.
    pub fn bound(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(c) => c[0].abs() + c[1].abs(),
            Self::Function { bound, .. } => *bound,
            Self::Sampled { slices, .. } => slices
                .iter()
                .map(|s| {
                    let n = s[0].values().len();
                    (0..n).map(|i| s.iter().map(|c| c.values()[i].abs()).sum::<f64>()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max),
        }
    }

    /// Largest `|b(t, x)|` over the samples; the closed form reports its bound.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(c) => c[0].hypot(c[1]),
            Self::Function { bound, .. } => *bound,
            Self::Sampled { slices, .. } => slices
                .iter()
                .map(|s| {
                    let n = s[0].values().len();
                    (0..n).map(|i| s.iter().map(|c| c.values()[i].powi(2)).sum::<f64>().sqrt()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max),
        }
    }

    /// Multiplies every value by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Zero => Self::Zero,
            Self::Constant(b) => Self::Constant([c * b[0], c * b[1]]),
            Self::Function { f, bound } => {
                let f = f.clone();
                Self::Function {
                    f: Arc::new(move |t, x| {
                        let v = f(t, x);
                        [c * v[0], c * v[1]]
                    }),
                    bound: c.abs() * bound,
                }
            }
            Self::Sampled { times, slices } => Self::Sampled {
                times: times.clone(),
                slices: slices.iter().map(|s| s.iter().map(|f| f.scaled(c)).collect()).collect(),
            },
        }
    }

    /// Components at every node of `grid` at time `t`.
    pub fn at_nodes(&self, t: f64, grid: &TorusGrid) -> Vec<Vec<f64>> {
        let dim = grid.dim();
        match self {
            Self::Zero => vec![vec![0.0; grid.len()]; dim],
            Self::Constant(c) => (0..dim).map(|d| vec![c[d]; grid.len()]).collect(),
            Self::Function { f, .. } => {
                let mut out = vec![Vec::with_capacity(grid.len()); dim];
                for idx in 0..grid.len() {
                    let v = f(t, grid.point(idx));
                    for d in 0..dim {
                        out[d].push(v[d]);
                    }
                }
                out
            }
            Self::Sampled { times, slices } => {
                let (i, w) = bracket(times, t);
                (0..dim)
                    .map(|d| {
                        let a = slices[i][d].values();
                        let b = slices[(i + 1).min(times.len() - 1)][d].values();
                        a.iter().zip(b).map(|(a, b)| (1.0 - w) * a + w * b).collect()
                    })
                    .collect()
            }
        }
    }

    /// `b(t, x)` at an arbitrary point.
    pub fn sample(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        match self {
            Self::Zero => [0.0; 2],
            Self::Constant(c) => *c,
            Self::Function { f, .. } => f(t, x),
            Self::Sampled { times, slices } => {
                let (i, w) = bracket(times, t);
                let j = (i + 1).min(times.len() - 1);
                let mut out = [0.0; 2];
                for (d, o) in out.iter_mut().enumerate().take(slices[i].len()) {
                    *o = (1.0 - w) * bilinear(&slices[i][d], x) + w * bilinear(&slices[j][d], x);
                }
                out
            }
        }
    }
}

/// Index of the slice at or before `t` and the weight of the next one.
fn bracket(times: &[f64], t: f64) -> (usize, f64) {
    if times.len() == 1 || t <= times[0] {
        return (0, 0.0);
    }
    let last = times.len() - 1;
    if t >= times[last] {
        return (last, 0.0);
    }
    let i = times.partition_point(|&s| s <= t) - 1;
    (i, (t - times[i]) / (times[i + 1] - times[i]))
}

/// Periodic (bi)linear interpolation.
pub fn bilinear(f: &ScalarField, x: [f64; 2]) -> f64 {
    let g = f.grid();
    let n = g.n() as i64;
    let h = g.spacing();
    let locate = |xi: f64| {
        let u = (xi + 0.5 * g.length()) / h;
        let base = u.floor();
        (base as i64, u - base)
    };
    let (i, wx) = locate(x[0]);
    let i0 = i.rem_euclid(n) as usize;
    let i1 = (i + 1).rem_euclid(n) as usize;
    let v = f.values();
    if g.dim() == 1 {
        return (1.0 - wx) * v[i0] + wx * v[i1];
    }
    let (j, wy) = locate(x[1]);
    let j0 = j.rem_euclid(n) as usize;
    let j1 = (j + 1).rem_euclid(n) as usize;
    let at = |a: usize, b: usize| v[g.flatten([a, b])];
    (1.0 - wx) * ((1.0 - wy) * at(i0, j0) + wy * at(i0, j1)) + wx * ((1.0 - wy) * at(i1, j0) + wy * at(i1, j1))
}

/// Right-hand side `f(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Zero,
    Static(ScalarField),
    /// Slices linear in time, as for [`DriftField::Sampled`].
    Sampled {
        times: Vec<f64>,
        slices: Vec<ScalarField>,
    },
}

impl Forcing {
    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Static(f) => f.sup_norm(),
            Self::Sampled { slices, .. } => slices.iter().map(|s| s.sup_norm()).fold(0.0, f64::max),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Zero => Self::Zero,
            Self::Static(f) => Self::Static(f.scaled(c)),
            Self::Sampled { times, slices } => {
                Self::Sampled { times: times.clone(), slices: slices.iter().map(|s| s.scaled(c)).collect() }
            }
        }
    }

    pub fn at(&self, t: f64, grid: &TorusGrid) -> ScalarField {
        match self {
            Self::Zero => ScalarField::zeros(*grid),
            Self::Static(f) => f.clone(),
            Self::Sampled { times, slices } => {
                let (i, w) = bracket(times, t);
                let j = (i + 1).min(times.len() - 1);
                let values =
                    slices[i].values().iter().zip(slices[j].values()).map(|(a, b)| (1.0 - w) * a + w * b).collect();
                ScalarField::new(*grid, values).expect("slice on grid")
            }
        }
    }

    pub fn sample(&self, t: f64, x: [f64; 2]) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Static(f) => bilinear(f, x),
            Self::Sampled { times, slices } => {
                let (i, w) = bracket(times, t);
                let j = (i + 1).min(times.len() - 1);
                (1.0 - w) * bilinear(&slices[i], x) + w * bilinear(&slices[j], x)
            }
        }
    }
}
