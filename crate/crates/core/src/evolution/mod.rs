//! Time integration of `u_t + b·∇u + (-Δ)^s u - εΔu = f` on the torus.
//!
//! Each step transports with the drift (SSP-RK2, limited second-order
//! upwinding of the advective form), then applies the exact propagator of
//! `(-Δ)^s - εΔ` with the forcing folded in by the exponential integrator
//! `û ← e^{-dtλ} û + (1 - e^{-dtλ})/λ · f̂`.

mod drift;
mod flow;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::fft::Transform;
use crate::field::ScalarField;
use crate::grid::TorusGrid;
use crate::holder::increment_sup;
use crate::params::FractionalParams;

pub use drift::{bilinear, DriftField, Forcing};
pub use flow::{flow_ode, flow_ode_from, FlowPath};

/// Largest admissible `dt · max(Σ_d |b_d|) / h`.
pub const CFL_MAX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionState {
    pub t: f64,
    pub u: ScalarField,
    pub params: FractionalParams,
    pub eps: f64,
    pub steps: usize,
    /// Largest CFL number of any accepted step.
    pub max_cfl: f64,
}

impl EvolutionState {
    pub fn new(t: f64, u: ScalarField, params: FractionalParams, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(invalid(format!("viscosity must be non-negative, got {eps}")));
        }
        ensure_finite(u.values(), "initial data")?;
        Ok(Self { t, u, params, eps, steps: 0, max_cfl: 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    /// Switch off `(-Δ)^s` and `εΔ`, leaving transport and forcing.
    pub diffusion: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { diffusion: true }
    }
}

pub fn step(state: &EvolutionState, b: &DriftField, f: &Forcing, dt: f64) -> Result<EvolutionState> {
    Stepper::new(state.u.grid(), &state.params, state.eps).step(state, b, f, dt, StepOptions::default())
}

pub fn step_with(
    state: &EvolutionState,
    b: &DriftField,
    f: &Forcing,
    dt: f64,
    options: StepOptions,
) -> Result<EvolutionState> {
    Stepper::new(state.u.grid(), &state.params, state.eps).step(state, b, f, dt, options)
}

/// Reusable plans for repeated steps on one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: TorusGrid,
    transform: Transform,
    /// `|ξ|^{2s} + ε|ξ|²` per spectral index.
    rate: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &TorusGrid, p: &FractionalParams, eps: f64) -> Self {
        let two_s = 2.0 * p.s();
        let rate = (0..grid.len())
            .map(|i| {
                let r = grid.frequency_norm(i);
                r.powf(two_s) + eps * r * r
            })
            .collect();
        Self { grid: *grid, transform: Transform::new(grid), rate }
    }

    pub fn step(
        &self,
        state: &EvolutionState,
        b: &DriftField,
        f: &Forcing,
        dt: f64,
        options: StepOptions,
    ) -> Result<EvolutionState> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        if state.u.grid() != &self.grid {
            return Err(invalid("state lives on a different grid"));
        }
        let h = self.grid.spacing();
        let t = state.t;
        let mut cfl = 0.0;
        let mut u = state.u.values().to_vec();
        if !b.is_zero() {
            let b0 = b.at_nodes(t, &self.grid);
            let b1 = b.at_nodes(t + dt, &self.grid);
            let speed = max_speed(&b0).max(max_speed(&b1));
            cfl = dt * speed / h;
            if cfl > CFL_MAX * (1.0 + 1e-12) {
                return Err(Error::StepRejected { admissible_dt: CFL_MAX * h / speed });
            }
            let r0 = advection_rate(&self.grid, &u, &b0);
            let u1: Vec<f64> = u.iter().zip(&r0).map(|(u, r)| u + dt * r).collect();
            let r1 = advection_rate(&self.grid, &u1, &b1);
            u = u.iter().zip(&u1).zip(&r1).map(|((u, u1), r)| 0.5 * u + 0.5 * (u1 + dt * r)).collect();
        }
        if options.diffusion || !f.is_zero() {
            let mut spec = self.transform.forward(&u);
            let forcing =
                if f.is_zero() { None } else { Some(self.transform.forward(f.at(t + 0.5 * dt, &self.grid).values())) };
            for (idx, c) in spec.iter_mut().enumerate() {
                let lambda = if options.diffusion { self.rate[idx] } else { 0.0 };
                let decay = (-dt * lambda).exp();
                *c *= decay;
                if let Some(fh) = &forcing {
                    let weight = if lambda == 0.0 { dt } else { -(-dt * lambda).exp_m1() / lambda };
                    *c += fh[idx] * weight;
                }
            }
            u = self.transform.inverse(spec);
        }
        let u = ScalarField::new(self.grid, u)?;
        Ok(EvolutionState {
            t: t + dt,
            u,
            params: state.params,
            eps: state.eps,
            steps: state.steps + 1,
            max_cfl: state.max_cfl.max(cfl),
        })
    }
}

fn max_speed(b: &[Vec<f64>]) -> f64 {
    let n = b[0].len();
    (0..n).map(|i| b.iter().map(|c| c[i].abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn minmod(x: f64, y: f64) -> f64 {
    if x * y <= 0.0 {
        0.0
    } else if x.abs() < y.abs() {
        x
    } else {
        y
    }
}

/// `-b·∇u` by limited upwind differences: the slope-limited interface values
/// on the upwind side are differenced, so each update is a convex
/// combination of neighbours whenever the CFL number is at most 2/3.
fn advection_rate(grid: &TorusGrid, u: &[f64], b: &[Vec<f64>]) -> Vec<f64> {
    let n = grid.n();
    let h = grid.spacing();
    let mut out = vec![0.0; u.len()];
    for (axis, comp) in b.iter().enumerate() {
        let nb = |idx: usize, shift: isize| -> usize {
            let mut ij = grid.unflatten(idx);
            ij[axis] = (ij[axis] as isize + shift).rem_euclid(n as isize) as usize;
            grid.flatten(ij)
        };
        let slope: Vec<f64> = (0..u.len()).map(|i| minmod(u[i] - u[nb(i, -1)], u[nb(i, 1)] - u[i])).collect();
        for i in 0..u.len() {
            let v = comp[i];
            if v == 0.0 {
                continue;
            }
            let deriv = if v > 0.0 {
                let im = nb(i, -1);
                (u[i] - u[im] + 0.5 * (slope[i] - slope[im])) / h
            } else {
                let ip = nb(i, 1);
                (u[ip] - u[i] - 0.5 * (slope[ip] - slope[i])) / h
            };
            out[i] -= v * deriv;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvpConfig {
    /// Initial time; the default window is `[-1, 0]`.
    pub t0: f64,
    pub duration: f64,
    pub eps: f64,
    pub dt_max: f64,
    /// Target CFL number used to pick the uniform step.
    pub cfl_target: f64,
    /// Scales at which increment sups are recorded.
    pub band_scales: Vec<f64>,
    /// Keep `u` after every step.
    pub keep_slices: bool,
}

impl Default for IvpConfig {
    fn default() -> Self {
        Self {
            t0: -1.0,
            duration: 1.0,
            eps: 0.0,
            dt_max: 1.0 / 64.0,
            cfl_target: 0.4,
            band_scales: Vec::new(),
            keep_slices: false,
        }
    }
}

impl IvpConfig {
    /// Uniform step count for the drift bound `speed` on spacing `h`.
    pub fn step_count(&self, speed: f64, h: f64) -> usize {
        let mut dt = self.dt_max;
        if speed > 0.0 {
            dt = dt.min(self.cfl_target * h / speed);
        }
        (self.duration / dt).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub sup: f64,
    pub mean: f64,
    pub energy: f64,
    pub bands: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TimeSeries {
    pub band_scales: Vec<f64>,
    pub rows: Vec<SeriesRow>,
}

impl TimeSeries {
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        write!(w, "t,sup,mean,energy")?;
        for s in &self.band_scales {
            write!(w, ",band_{s}")?;
        }
        writeln!(w)?;
        for r in &self.rows {
            write!(w, "{},{},{},{}", r.t, r.sup, r.mean, r.energy)?;
            for b in &r.bands {
                write!(w, ",{b}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvpResult {
    pub state: EvolutionState,
    pub series: TimeSeries,
    /// `(t, u)` after every step, including the initial data, when requested.
    pub slices: Vec<(f64, ScalarField)>,
}

fn record(u: &ScalarField, t: f64, scales: &[f64]) -> Result<SeriesRow> {
    let bands = scales.iter().map(|&s| increment_sup(u, s)).collect::<Result<Vec<_>>>()?;
    Ok(SeriesRow { t, sup: u.sup_norm(), mean: u.mean(), energy: u.energy(), bands })
}

pub fn solve_ivp(
    u0: &ScalarField,
    b: &DriftField,
    f: &Forcing,
    p: &FractionalParams,
    cfg: &IvpConfig,
) -> Result<IvpResult> {
    if !(cfg.duration.is_finite() && cfg.duration > 0.0) {
        return Err(invalid(format!("duration must be positive, got {}", cfg.duration)));
    }
    if !(cfg.cfl_target > 0.0 && cfg.cfl_target <= CFL_MAX) {
        return Err(invalid("CFL target must lie in (0, 0.5]"));
    }
    let grid = *u0.grid();
    let steps = cfg.step_count(b.bound(), grid.spacing());
    let dt = cfg.duration / steps as f64;
    let stepper = Stepper::new(&grid, p, cfg.eps);
    let guard = 10.0 * (u0.sup_norm() + cfg.duration * f.sup_norm()) + 1e-300;
    let mut state = EvolutionState::new(cfg.t0, u0.clone(), *p, cfg.eps)?;
    let mut series = TimeSeries { band_scales: cfg.band_scales.clone(), rows: Vec::new() };
    series.rows.push(record(&state.u, state.t, &cfg.band_scales)?);
    let mut slices = Vec::new();
    if cfg.keep_slices {
        slices.push((state.t, state.u.clone()));
    }
    for k in 0..steps {
        state = stepper.step(&state, b, f, dt, StepOptions::default())?;
        // Pin the clock to the uniform schedule.
        state.t = cfg.t0 + (k + 1) as f64 * dt;
        let sup = state.u.sup_norm();
        if !sup.is_finite() || sup > guard {
            return Err(Error::Instability(format!("sup-norm {sup:e} exceeds guard {guard:e} at t = {}", state.t)));
        }
        series.rows.push(record(&state.u, state.t, &cfg.band_scales)?);
        if cfg.keep_slices {
            slices.push((state.t, state.u.clone()));
        }
    }
    Ok(IvpResult { state, series, slices })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub dt_max: f64,
    pub cfl_target: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { dt_max: 1.0 / 64.0, cfl_target: 0.4 }
    }
}

/// Runs `u_t + b_δ·∇u + (-Δ)^s u - εΔu = f_δ` and `v_t + (-Δ)^s v = 0` from
/// the same data over `[-1, 0]`, where `b_δ`, `f_δ` are `b`, `f` rescaled to
/// sup-norm `δ`, and returns `sup |u - v|` over all time levels.
pub fn perturbation_experiment(
    u0: &ScalarField,
    b: &DriftField,
    f: &Forcing,
    delta: f64,
    p: &FractionalParams,
    eps: f64,
    cfg: &PerturbationConfig,
) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(invalid(format!("delta must be non-negative, got {delta}")));
    }
    if eps > delta {
        return Err(invalid(format!("viscosity {eps} exceeds delta {delta}")));
    }
    let bs = b.sup_norm();
    let fs = f.sup_norm();
    let b_delta = if bs > 0.0 && delta > 0.0 { b.scaled(delta / bs) } else { DriftField::Zero };
    let f_delta = if fs > 0.0 && delta > 0.0 { f.scaled(delta / fs) } else { Forcing::Zero };
    let grid = *u0.grid();
    let ivp = IvpConfig { dt_max: cfg.dt_max, cfl_target: cfg.cfl_target, ..Default::default() };
    let steps = ivp.step_count(b_delta.bound(), grid.spacing());
    let dt = 1.0 / steps as f64;
    let drifted = Stepper::new(&grid, p, eps);
    let plain = Stepper::new(&grid, p, 0.0);
    let mut u = EvolutionState::new(-1.0, u0.clone(), *p, eps)?;
    let mut v = EvolutionState::new(-1.0, u0.clone(), *p, 0.0)?;
    let guard = 10.0 * (u0.sup_norm() + delta) + 1e-300;
    let mut worst = 0.0f64;
    for k in 0..steps {
        u = drifted.step(&u, &b_delta, &f_delta, dt, StepOptions::default())?;
        v = plain.step(&v, &DriftField::Zero, &Forcing::Zero, dt, StepOptions::default())?;
        u.t = -1.0 + (k + 1) as f64 * dt;
        v.t = u.t;
        if !(u.u.sup_norm() <= guard) {
            return Err(Error::Instability(format!("drifted run left the guard at t = {}", u.t)));
        }
        worst = worst.max(u.u.sup_distance(&v.u));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
