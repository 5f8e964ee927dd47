use super::*;
use crate::holder::{synth_holder, HolderSynthConfig};
use crate::spectral::{frac_laplacian, heat_propagate};
use proptest::prelude::*;

fn p(s: f64) -> FractionalParams {
    FractionalParams::new(s, 1).unwrap()
}

fn grid(n: usize) -> TorusGrid {
    TorusGrid::periodic_1d(n).unwrap()
}

fn smooth(g: TorusGrid, seed: u64) -> ScalarField {
    let mut rng = crate::rng::Rng::seeded(seed);
    let modes: Vec<(f64, f64, f64)> = (1..=4).map(|k| (k as f64, rng.normal() / k as f64, rng.phase())).collect();
    ScalarField::from_fn(g, |x| modes.iter().map(|(k, a, th)| a * (k * x[0] + th).cos()).sum())
}

fn rough_drift(g: TorusGrid, seed: u64, amplitude: f64) -> DriftField {
    let c = HolderSynthConfig::new(0.5, 2, 5, seed, amplitude);
    DriftField::steady(vec![synth_holder(&c, &g).unwrap()]).unwrap()
}

#[test]
fn driftless_step_is_the_propagator() {
    let g = grid(64);
    let u0 = smooth(g, 1);
    let state = EvolutionState::new(0.0, u0.clone(), p(0.3), 0.0).unwrap();
    let next = step(&state, &DriftField::Zero, &Forcing::Zero, 0.1).unwrap();
    let exact = heat_propagate(&u0, 0.1, &p(0.3), 0.0).unwrap();
    assert!(next.u.sup_distance(&exact) <= 1e-15 * u0.sup_norm() * 10.0);
}

#[test]
fn pure_transport_translates() {
    let errs: Vec<f64> = [64usize, 128, 256]
        .iter()
        .map(|&n| {
            let g = grid(n);
            let u0 = ScalarField::from_fn(g, |x| (x[0]).sin());
            let c = 0.7;
            let b = DriftField::Constant([c, 0.0]);
            let dt = 0.4 * g.spacing() / c;
            let steps = (1.0 / dt).ceil() as usize;
            let dt = 1.0 / steps as f64;
            let mut st = EvolutionState::new(0.0, u0, p(0.25), 0.0).unwrap();
            for _ in 0..steps {
                st = step_with(&st, &b, &Forcing::Zero, dt, StepOptions { diffusion: false }).unwrap();
            }
            let exact = ScalarField::from_fn(g, |x| (x[0] - c).sin());
            st.u.sup_distance(&exact)
        })
        .collect();
    assert!(errs[0] < 0.05, "{errs:?}");
    // Limiting clips extrema, so the sup error converges at about 1.25.
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() > 1.2, "{errs:?}");
    }
}

#[test]
fn cfl_violation_is_rejected() {
    let g = grid(32);
    let st = EvolutionState::new(0.0, smooth(g, 2), p(0.25), 0.0).unwrap();
    let b = DriftField::Constant([2.0, 0.0]);
    match step(&st, &b, &Forcing::Zero, 1.0) {
        Err(Error::StepRejected { admissible_dt }) => {
            assert!((admissible_dt - 0.25 * g.spacing()).abs() < 1e-15);
            assert!(step(&st, &b, &Forcing::Zero, admissible_dt).is_ok());
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn eigenmode_decays_exactly() {
    let g = grid(64);
    let s = 0.25;
    let u0 = ScalarField::from_fn(g, |x| (3.0 * x[0]).cos());
    let cfg = IvpConfig { duration: 0.8, dt_max: 0.013, ..Default::default() };
    let out = solve_ivp(&u0, &DriftField::Zero, &Forcing::Zero, &p(s), &cfg).unwrap();
    let want = u0.scaled((-0.8 * 3f64.powf(2.0 * s)).exp());
    assert!(out.state.u.sup_distance(&want) < 1e-13);
    assert!((out.state.t + 0.2).abs() < 1e-14);
}

#[test]
fn manufactured_equilibrium_is_kept() {
    let g = grid(64);
    let pp = p(0.25);
    let phi = smooth(g, 3);
    let f = Forcing::Static(frac_laplacian(&phi, &pp).unwrap());
    let out = solve_ivp(&phi, &DriftField::Zero, &f, &pp, &IvpConfig::default()).unwrap();
    assert!(out.state.u.sup_distance(&phi) < 1e-8);
}

#[test]
fn splitting_is_partition_independent() {
    let g = grid(64);
    let pp = p(0.4);
    let u0 = smooth(g, 4);
    let exact = heat_propagate(&u0, 1.0, &pp, 0.0).unwrap();
    for dt_max in [1.0, 0.3, 0.01] {
        let cfg = IvpConfig { dt_max, ..Default::default() };
        let out = solve_ivp(&u0, &DriftField::Zero, &Forcing::Zero, &pp, &cfg).unwrap();
        assert!(out.state.u.sup_distance(&exact) < 1e-13);
    }
}

#[test]
fn galilean_frame() {
    // Constant drift: u(t, x) = v(t, x - c t) with v driftless.
    let errs: Vec<f64> = [64usize, 128, 256]
        .iter()
        .map(|&n| {
            let g = grid(n);
            let pp = p(0.25);
            let u0 = smooth(g, 5);
            let c = 1.3;
            let cfg = IvpConfig::default();
            let out = solve_ivp(&u0, &DriftField::Constant([c, 0.0]), &Forcing::Zero, &pp, &cfg).unwrap();
            let v = heat_propagate(&u0, 1.0, &pp, 0.0).unwrap();
            let shifted = crate::fft::Transform::new(&g).apply_complex(v.values(), |i| {
                let xi = g.frequency(i);
                if i == g.n() / 2 {
                    rustfft::num_complex::Complex64::new((xi * c).cos(), 0.0)
                } else {
                    rustfft::num_complex::Complex64::from_polar(1.0, -xi * c)
                }
            });
            out.state.u.values().iter().zip(&shifted).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .collect();
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() > 1.3, "{errs:?}");
    }
}

#[test]
fn flow_closed_forms() {
    let zero = flow_ode(&DriftField::Zero, &Forcing::Zero, 64);
    assert!(zero.v.iter().all(|v| v == &[0.0, 0.0]) && zero.s.iter().all(|s| *s == 0.0));
    let c = flow_ode(&DriftField::Constant([0.5, -1.0]), &Forcing::Zero, 64);
    for (t, v) in c.times.iter().zip(&c.v) {
        assert!((v[0] - 0.5 * t).abs() < 1e-14 && (v[1] + t).abs() < 1e-14);
    }
    let lin = flow_ode(&DriftField::function(1.0, |_, x| [x[0], 0.0]), &Forcing::Zero, 64);
    assert!(lin.v.iter().all(|v| v[0] == 0.0));
    assert_eq!(c.at(0.0).0, [0.0, 0.0]);
    let (v, _) = c.at(-0.37);
    assert!((v[0] + 0.185).abs() < 1e-14);
}

#[test]
fn flow_is_fourth_order() {
    let b = DriftField::function(1.0, |t, _| [t.sin(), 0.0]);
    let f = Forcing::Static(ScalarField::from_fn(grid(256), |x| x[0]));
    // V(t) = 1 - cos t and S(t) = -∫_t^0 V = t - sin t.
    let errs: Vec<f64> = [4usize, 8, 16, 32]
        .iter()
        .map(|&n| {
            let path = flow_ode(&b, &Forcing::Zero, n);
            (path.v[0][0] - (1.0 - (1.0f64).cos())).abs()
        })
        .collect();
    let scales: Vec<f64> = [4.0, 8.0, 16.0, 32.0].iter().map(|n: &f64| 1.0 / n).collect();
    let fit = crate::holder::fit_exponent(&scales, &errs).unwrap();
    assert!(fit.slope >= 3.8, "{errs:?}");
    let path = flow_ode(&b, &f, 512);
    assert!((path.s[0] + (1.0 - (1.0f64).sin())).abs() < 1e-4, "{}", path.s[0]);
}

#[test]
fn perturbation_vanishes_with_delta() {
    let g = grid(128);
    let pp = p(0.25);
    let u0 = smooth(g, 6);
    let b = rough_drift(g, 8, 1.0);
    let f = Forcing::Static(smooth(g, 9));
    let cfg = PerturbationConfig::default();
    let zero = perturbation_experiment(&u0, &b, &f, 0.0, &pp, 0.0, &cfg).unwrap();
    assert!(zero <= 1e-10);
    let d: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&delta| perturbation_experiment(&u0, &b, &f, delta, &pp, 0.0, &cfg).unwrap())
        .collect();
    assert!(d[0] >= d[1] && d[1] >= d[2], "{d:?}");
    assert!(perturbation_experiment(&u0, &b, &f, 0.01, &pp, 0.1, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maximum_principle(seed in 0u64..10_000, s in 0.1f64..0.5, amp in 0.0f64..3.0) {
        let g = grid(64);
        let u0 = smooth(g, seed);
        let b = rough_drift(g, seed + 1, amp);
        let cfg = IvpConfig { duration: 0.25, ..Default::default() };
        let out = solve_ivp(&u0, &b, &Forcing::Zero, &p(s), &cfg).unwrap();
        let tol = 1e-10 * u0.oscillation();
        let (mut hi, mut lo) = (u0.max(), u0.min());
        let mut st = EvolutionState::new(-1.0, u0.clone(), p(s), 0.0).unwrap();
        let steps = cfg.step_count(b.bound(), g.spacing());
        for _ in 0..steps {
            st = step(&st, &b, &Forcing::Zero, cfg.duration / steps as f64).unwrap();
            prop_assert!(st.u.max() <= hi + tol && st.u.min() >= lo - tol);
            hi = st.u.max();
            lo = st.u.min();
        }
        prop_assert!(out.state.u.sup_distance(&st.u) < 1e-12);
    }

    #[test]
    fn forced_bound(seed in 0u64..10_000, amp in 0.0f64..2.0) {
        let g = grid(64);
        let pp = p(0.25);
        let u0 = smooth(g, seed);
        let f = Forcing::Static(smooth(g, seed + 7));
        let b = rough_drift(g, seed + 3, amp);
        let out = solve_ivp(&u0, &b, &f, &pp, &IvpConfig::default()).unwrap();
        let bound = u0.sup_norm() + f.sup_norm();
        for row in &out.series.rows {
            prop_assert!(row.sup <= bound * (1.0 + 1e-12));
        }
    }
}
