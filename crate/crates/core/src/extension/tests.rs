use super::*;
use crate::spectral::frac_laplacian;
use statrs::function::gamma::gamma;

fn p(s: f64) -> FractionalParams {
    FractionalParams::new(s, 1).unwrap()
}

fn grid(n: usize) -> TorusGrid {
    TorusGrid::periodic_1d(n).unwrap()
}

fn smooth_trace(g: TorusGrid) -> ScalarField {
    ScalarField::from_fn(g, |x| (x[0]).cos() + 0.5 * (2.0 * x[0] + 0.3).sin() - 0.25 * (3.0 * x[0] + 1.0).cos())
}

#[test]
fn constant_trace_extends_constantly() {
    let g = grid(32);
    let pp = p(0.25);
    let y = default_ygrid(&g, &pp, 64, TopBoundary::ModeDecay).unwrap();
    let sol = solve_extension(&ScalarField::constant(g, 3.0), &pp, &y, TopBoundary::ModeDecay).unwrap();
    assert!(sol.field.values().iter().all(|v| (v - 3.0).abs() < 1e-14));
    assert!(sol.dtn.sup_norm() < 1e-9);
}

#[test]
fn calibration_matches_gamma_closed_form() {
    for s in [0.25, 0.4, 0.5] {
        let c = calibration_constant(&grid(64), &p(s)).unwrap();
        let closed = 2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s);
        assert!((-1.0 / c - closed).abs() < 1e-6 * closed, "s = {s}");
    }
}

#[test]
fn calibrated_dtn_matches_symbol_on_cosines() {
    for s in [0.25, 0.5] {
        let pp = p(s);
        let g = grid(128);
        let y = default_ygrid(&g, &pp, 256, TopBoundary::ModeDecay).unwrap();
        for k in 1..=16 {
            let kf = k as f64;
            let f = ScalarField::from_fn(g, |x| (kf * x[0]).cos());
            let sol = solve_extension(&f, &pp, &y, TopBoundary::ModeDecay).unwrap();
            let got = sol.calibrated_dtn();
            let want = f.scaled(kf.powf(2.0 * s));
            let rel = got.sup_distance(&want) / want.sup_norm();
            assert!(rel <= 0.02, "s = {s}, k = {k}: {rel}");
            assert!(sol.residual < 1e-12);
        }
    }
}

#[test]
fn dtn_error_decreases_under_refinement() {
    let pp = p(0.25);
    let g = grid(64);
    let f = smooth_trace(g);
    let exact = frac_laplacian(&f, &pp).unwrap();
    let errs: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&m| {
            let y = default_ygrid(&g, &pp, m, TopBoundary::ModeDecay).unwrap();
            let sol = solve_extension(&f, &pp, &y, TopBoundary::ModeDecay).unwrap();
            sol.calibrated_dtn().sup_distance(&exact)
        })
        .collect();
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.0, "{errs:?}");
    }
}

#[test]
fn appending_profile_shifts_flux_by_one() {
    let pp = p(0.3);
    let g = grid(32);
    let y = default_ygrid(&g, &pp, 64, TopBoundary::ModeDecay).unwrap();
    let sol = solve_extension(&smooth_trace(g), &pp, &y, TopBoundary::ModeDecay).unwrap();
    let b = pp.profile_exponent();
    let shifted = ExtendedField::from_fn(g, y.clone(), |x, yy| {
        let j = y.nodes().iter().position(|&v| v == yy).unwrap();
        let idx = ((x[0] + 0.5 * g.length()) / g.spacing()).round() as usize;
        sol.field.at(j, idx) + yy.powf(b) / b
    });
    let d = raw_dtn(&shifted, &pp);
    for (a, b) in d.values().iter().zip(sol.dtn.values()) {
        assert!((a - b - 1.0).abs() < 1e-9);
    }
}

#[test]
fn solver_is_linear() {
    let pp = p(0.25);
    let g = grid(32);
    let y = default_ygrid(&g, &pp, 48, TopBoundary::ModeDecay).unwrap();
    let f1 = smooth_trace(g);
    let f2 = ScalarField::from_fn(g, |x| (5.0 * x[0]).sin());
    let sum = f1.axpy(1.0, &f2).unwrap();
    let u1 = solve_extension(&f1, &pp, &y, TopBoundary::ModeDecay).unwrap();
    let u2 = solve_extension(&f2, &pp, &y, TopBoundary::ModeDecay).unwrap();
    let us = solve_extension(&sum, &pp, &y, TopBoundary::ModeDecay).unwrap();
    for i in 0..us.field.values().len() {
        let lin = u1.field.values()[i] + u2.field.values()[i];
        assert!((us.field.values()[i] - lin).abs() < 1e-13);
    }
}

#[test]
fn maximum_principle_with_differences() {
    let pp = p(0.25);
    let g = grid(32);
    let mut rng = crate::rng::Rng::seeded(5);
    let f = ScalarField::new(g, (0..32).map(|_| rng.normal()).collect()).unwrap();
    let y = default_ygrid(&g, &pp, 64, TopBoundary::Zero).unwrap();
    let opts = ExtensionOptions { top: TopBoundary::Zero, horizontal: Horizontal::FiniteDifference };
    let sol = solve_extension_with(&f, &pp, &y, opts).unwrap();
    let hi = f.max().max(0.0);
    let lo = f.min().min(0.0);
    let tol = 1e-13 * (hi - lo);
    assert!(sol.field.max() <= hi + tol && sol.field.min() >= lo - tol);
}

#[test]
fn zero_top_requires_tall_domain() {
    let pp = p(0.25);
    let g = grid(32);
    let y = GradedYGrid::for_params(2.0, 32, &pp).unwrap();
    assert!(solve_extension(&smooth_trace(g), &pp, &y, TopBoundary::Zero).is_err());
}

#[test]
fn poisson_agrees_with_solver() {
    for s in [0.25, 0.5] {
        let pp = p(s);
        let g = grid(64);
        let f = smooth_trace(g);
        let y = default_ygrid(&g, &pp, 256, TopBoundary::ModeDecay).unwrap();
        let sol = solve_extension(&f, &pp, &y, TopBoundary::ModeDecay).unwrap();
        for j in [40usize, 120, 200] {
            let u = poisson_extend(&f, &pp, y.nodes()[j]).unwrap();
            let diff = u.sup_distance(&sol.field.level_field(j));
            assert!(diff <= 0.01 * f.oscillation(), "s = {s}, j = {j}: {diff}");
        }
    }
}

fn closed_form_solution(sol: SpecialSolution, pp: FractionalParams) -> ExtensionSolution {
    let g = grid(32);
    let y = GradedYGrid::for_params(1.0, 128, &pp).unwrap();
    let field = ExtendedField::from_fn(g, y, |x, yy| sol.evaluate(&pp, x, yy));
    let dtn = raw_dtn(&field, &pp);
    ExtensionSolution {
        field,
        params: pp,
        dtn,
        residual: 0.0,
        calibration: calibration_constant(&g, &pp).unwrap(),
        options: ExtensionOptions::default(),
    }
}

#[test]
fn expansion_of_special_solutions() {
    let pp = p(0.25);
    let b = pp.profile_exponent();
    let fit = expansion_fit(&closed_form_solution(SpecialSolution::Profile, pp)).unwrap();
    assert!(fit.g.values().iter().all(|v| (v - 1.0 / b).abs() < 1e-9));
    assert!(fit.bands.iter().all(|band| band.residual < 1e-12));
    assert!(fit.slope.is_none());

    let fit = expansion_fit(&closed_form_solution(SpecialSolution::Quadratic, pp)).unwrap();
    assert!(fit.g.sup_norm() < 1e-9);
    let slope = fit.slope.unwrap();
    assert!((slope - 2.0).abs() < 0.05, "{slope}");
}

#[test]
fn expansion_order_of_smooth_traces() {
    for s in [0.25, 0.5] {
        let pp = p(s);
        let g = grid(64);
        let f = smooth_trace(g);
        let y = default_ygrid(&g, &pp, 256, TopBoundary::ModeDecay).unwrap();
        let sol = solve_extension(&f, &pp, &y, TopBoundary::ModeDecay).unwrap();
        let fit = expansion_fit(&sol).unwrap();
        let ys: Vec<f64> = (0..8).map(|i| 0.5 * 0.5f64.powi(i)).collect();
        let pf = expansion_fit_poisson(&f, &pp, &ys).unwrap();
        let slope = pf.slope.unwrap();
        assert!((1.7..=2.3).contains(&slope), "poisson s = {s}: {slope}");
        let slope = fit.slope.unwrap();
        assert!((1.7..=2.3).contains(&slope), "solver s = {s}: {slope}");
    }
}

#[test]
fn corollary_constants() {
    let pp = p(0.25);
    let lin =
        check_corollary_expansion(&closed_form_solution(SpecialSolution::Linear { a: [2.0, 0.0] }, pp), [0.0, 0.0])
            .unwrap();
    assert!(lin.d.abs() < 1e-12 && lin.max_constant < 1e-9, "{lin:?}");
    let prof = check_corollary_expansion(&closed_form_solution(SpecialSolution::Profile, pp), [0.0, 0.0]).unwrap();
    assert!((prof.d - 2.0).abs() < 1e-9 && prof.max_constant < 1e-9, "{prof:?}");

    let g = grid(128);
    let f = smooth_trace(g);
    let y = default_ygrid(&g, &pp, 256, TopBoundary::ModeDecay).unwrap();
    let sol = solve_extension(&f, &pp, &y, TopBoundary::ModeDecay).unwrap();
    let rep = check_corollary_expansion(&sol, [0.3, 0.0]).unwrap();
    for w in rep.constants.windows(2) {
        assert!(w[1] <= 2.0 * w[0] && w[0] <= 2.0 * w[1], "{:?}", rep.constants);
    }
}

#[test]
fn special_solutions_converge() {
    for s in [0.25, 0.5] {
        for dim in [1usize, 2] {
            let pp = FractionalParams::new(s, dim).unwrap();
            for sol in SpecialSolution::all([1.5, -0.5]) {
                let coarse = special_solution_residuals(sol, &pp, 16, 32).unwrap();
                let fine = special_solution_residuals(sol, &pp, 32, 64).unwrap();
                for (c, f) in [(coarse.pde_residual, fine.pde_residual), (coarse.dtn_error, fine.dtn_error)] {
                    assert!(f <= 1e-12 || (c / f).log2() >= 1.0, "{} s = {s}: {c} -> {f}", sol.name());
                }
            }
        }
    }
}

#[test]
fn two_dimensional_cosine() {
    let pp = FractionalParams::new(0.25, 2).unwrap();
    let g = TorusGrid::new(2, 32, std::f64::consts::TAU).unwrap();
    let f = ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1]).cos());
    let y = default_ygrid(&g, &pp, 128, TopBoundary::ModeDecay).unwrap();
    let sol = solve_extension(&f, &pp, &y, TopBoundary::ModeDecay).unwrap();
    let want = frac_laplacian(&f, &pp).unwrap();
    assert!(sol.calibrated_dtn().sup_distance(&want) <= 0.02 * want.sup_norm());
}
