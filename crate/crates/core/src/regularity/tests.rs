use super::*;
use crate::evolution::{DriftField, Forcing};
use crate::field::{ExtendedField, ScalarField};
use crate::grid::{GradedYGrid, TorusGrid};
use crate::params::FractionalParams;

fn ansatz_slices(
    p: &FractionalParams,
    a: f64,
    d: impl Fn(f64) -> f64,
    d_prime: impl Fn(f64) -> f64,
) -> Vec<(f64, ExtendedField)> {
    let xgrid = TorusGrid::new(1, 256, 8.0).unwrap();
    let ygrid = GradedYGrid::for_params(2.0, 48, p).unwrap();
    let b = p.profile_exponent();
    (0..=64)
        .map(|i| {
            let tau = -1.0 + i as f64 / 64.0;
            let field =
                ExtendedField::from_fn(xgrid, ygrid.clone(), |x, y| a * x[0] + d(tau) + d_prime(tau) * y.powf(b) / b);
            (tau, field)
        })
        .collect()
}

#[test]
fn ansatz_members_have_zero_deviation() {
    let p = FractionalParams::new(0.25, 1).unwrap();
    let static_plane = ansatz_slices(&p, 0.7, |_| 0.3, |_| 0.0);
    let profile = ansatz_slices(&p, -0.2, |t| 1.0 + 0.3 * t + 0.2 * t * t, |t| 0.3 + 0.4 * t);
    for slices in [static_plane, profile] {
        let report = flatness_profile(&slices, &p, &FlatnessConfig::default()).unwrap();
        assert_eq!(report.scales.len(), 5);
        assert!(report.deviations().iter().all(|&e| (0.0..1e-12).contains(&e)), "{:?}", report.deviations());
        assert!(report.fit.is_none());
        assert!(report.scales.iter().all(|s| s.samples >= MIN_SAMPLES));
    }
}

#[test]
fn forced_zero_slope_sees_the_plane() {
    let p = FractionalParams::new(0.25, 1).unwrap();
    let slices = ansatz_slices(&p, 0.7, |_| 0.3, |_| 0.0);
    let cfg = FlatnessConfig { zero_slope: true, ..Default::default() };
    let report = flatness_profile(&slices, &p, &cfg).unwrap();
    let slope = report.slope().unwrap();
    assert!((slope - 1.0).abs() < 0.05, "{slope}");
}

#[test]
fn rejects_bad_arguments() {
    let p = FractionalParams::new(0.25, 1).unwrap();
    let slices = ansatz_slices(&p, 0.0, |_| 0.0, |_| 0.0);
    assert!(flatness_profile(&slices, &p, &FlatnessConfig { r: 0.6, ..Default::default() }).is_err());
    assert!(flatness_profile(&slices, &p, &FlatnessConfig { k_max: 2, ..Default::default() }).is_err());
    assert!(flatness_profile(&slices[32..], &p, &FlatnessConfig::default()).is_err());
}

#[test]
fn deep_scales_are_truncated_with_a_warning() {
    let p = FractionalParams::new(0.25, 1).unwrap();
    let slices = ansatz_slices(&p, 0.5, |t| t * t, |t| 2.0 * t);
    let report = flatness_profile(&slices, &p, &FlatnessConfig { r: 0.25, k_max: 6, zero_slope: false }).unwrap();
    assert!(report.scales.len() < 7);
    assert!(!report.warnings.is_empty());
}

#[test]
fn clock_rate_matches_gamma_form() {
    use statrs::function::gamma::gamma;
    let grid = TorusGrid::new(1, 256, 2.0 * std::f64::consts::PI).unwrap();
    for s in [0.25, 0.4, 0.5] {
        let p = FractionalParams::new(s, 1).unwrap();
        let expected = gamma(s) / (2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s));
        let rate = clock_rate(&grid, &p).unwrap();
        assert!((rate - expected).abs() < 1e-5 * expected, "s {s}: {rate} vs {expected}");
    }
}

#[test]
fn phase_shift_translates() {
    let grid = TorusGrid::new(1, 128, 2.0 * std::f64::consts::PI).unwrap();
    let u = ScalarField::from_fn(grid, |x| (3.0 * x[0]).sin() + 0.5 * x[0].cos());
    let v = shift_field(&u, [0.123, 0.0]);
    let exact = ScalarField::from_fn(grid, |x| (3.0 * (x[0] + 0.123)).sin() + 0.5 * (x[0] + 0.123).cos());
    assert!(v.sup_distance(&exact) < 1e-12);
}

fn driftless(s: f64, seed: u64) -> ExperimentConfig {
    ExperimentConfig { s, seed, delta: 0.0, forcing: 0.0, ..Default::default() }
}

#[test]
fn smooth_driftless_flatness_decays_fast() {
    for s in [0.25, 0.5] {
        for seed in 1..=2 {
            let cfg = driftless(s, seed);
            let u0 = smooth_data(&cfg.grid().unwrap(), seed);
            let report = flatness_experiment(&cfg, &u0, &DriftField::Zero, &Forcing::Zero, false).unwrap();
            let slope = report.slope().unwrap();
            assert!(slope >= 1.0 + 2.0 * s - cfg.slope_slack, "s {s} seed {seed}: {slope}");
            let e = report.deviations();
            assert!(e.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}

#[test]
fn constant_drift_matches_driftless_in_moving_frame() {
    // The characteristic through the origin starts at x = -b, so the moving
    // frame sees the driftless solution from data translated by b.
    let cfg = driftless(0.25, 3);
    let b = 0.8;
    let u0 = smooth_data(&cfg.grid().unwrap(), 3);
    let translated = shift_field(&u0, [-b, 0.0]);
    let still = flatness_experiment(&cfg, &translated, &DriftField::Zero, &Forcing::Zero, false).unwrap();
    let moving = flatness_experiment(&cfg, &u0, &DriftField::Constant([b, 0.0]), &Forcing::Zero, false).unwrap();
    let (a, b) = (still.slope().unwrap(), moving.slope().unwrap());
    assert!((a - b).abs() < 0.1, "{a} vs {b}");
}

#[test]
fn theorem_pipelines_separate_the_claims() {
    let cfg = ExperimentConfig::default();
    let t1 = theorem1_experiment(&cfg).unwrap();
    assert!(t1.within_tolerance, "{} vs {}", t1.measured, t1.claimed);
    assert!(t1.band[0] <= t1.measured && t1.measured <= t1.band[1]);
    assert!(t1.achieved_ratio.unwrap() > 0.0);
    let sweep = theorem2_sweep(&ExperimentConfig { alpha: 0.0, ..cfg.clone() }, &[0.1, 0.05, 0.025]).unwrap();
    let measured: Vec<f64> = sweep.iter().map(|r| r.measured).collect();
    let last = *measured.last().unwrap();
    assert!(last < t1.measured && last >= 0.7, "{measured:?} vs {}", t1.measured);
    // Non-decreasing as the seminorm shrinks, up to fitting noise.
    assert!(measured.windows(2).all(|w| w[1] >= w[0] - 0.05), "{measured:?}");
}

#[test]
fn driftless_pipeline_reaches_the_smooth_rate() {
    let cfg = ExperimentConfig { delta: 0.0, forcing: 0.0, ..Default::default() };
    let t1 = theorem1_experiment(&cfg).unwrap();
    assert!(t1.measured >= 1.0 + 2.0 * cfg.s - cfg.slope_slack, "{}", t1.measured);
    assert!(t1.achieved_ratio.is_none());
}

#[test]
fn reports_are_deterministic() {
    let cfg = ExperimentConfig { seed: 7, ..Default::default() };
    let a = theorem1_experiment(&cfg).unwrap();
    let b = theorem1_experiment(&cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn holder_estimates_are_positive() {
    for s in [0.25, 0.5] {
        let cfg = ExperimentConfig { s, delta: 1.0, ..Default::default() };
        let r = holder_estimate_experiment(&cfg).unwrap();
        assert!(r.within_tolerance);
    }
}
