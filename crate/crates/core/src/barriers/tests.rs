use super::*;

fn p(s: f64) -> FractionalParams {
    FractionalParams::new(s, 1).unwrap()
}

#[test]
fn exact_operator_matches_differences() {
    let params = p(0.25);
    let sphere = BarrierSpec {
        tag: BarrierTag::SphereBoundary,
        params,
        alpha: 0.5,
        center: DEFAULT_SPHERE_POINT,
        c: 2.0,
        h_search: 0.05,
    };
    let flat = BarrierSpec { tag: BarrierTag::FlatBoundary, center: [0.1, 0.0, 0.0], alpha: 0.25, ..sphere };
    for spec in [sphere, flat] {
        for x in [[0.1, 0.0, 0.3], [-0.4, 0.0, 0.5], [0.2, 0.0, 0.1]] {
            let exact = spec.operator(x);
            let fd = spec.operator_fd(x, 1e-4);
            assert!((exact - fd).abs() < 1e-4 * (1.0 + exact.abs()), "{:?} {x:?}: {exact} vs {fd}", spec.tag);
        }
    }
}

#[test]
fn exact_operator_matches_differences_in_two_dimensions() {
    let params = FractionalParams::new(0.3, 2).unwrap();
    let spec = BarrierSpec {
        tag: BarrierTag::SphereBoundary,
        params,
        alpha: 0.75,
        center: [0.36, 0.48, 0.8],
        c: 3.0,
        h_search: 0.05,
    };
    let x = [0.1, -0.2, 0.4];
    let exact = spec.operator(x);
    let fd = spec.operator_fd(x, 1e-4);
    assert!((exact - fd).abs() < 1e-4 * (1.0 + exact.abs()));
}

#[test]
fn sphere_barrier_is_certified() {
    for alpha in [0.25, 0.5, 0.75] {
        let spec = make_barrier(BarrierTag::SphereBoundary, &p(0.25), alpha, DEFAULT_SPHERE_POINT, 1.0 / 64.0).unwrap();
        assert!(spec.c >= 1.0 && spec.c <= 1024.0);
        let cert = certify(&spec, 1.0 / 64.0).unwrap();
        assert!(cert.pass, "alpha {alpha}: {cert:?}");
    }
}

#[test]
fn sphere_barrier_without_first_term_fails() {
    let spec = make_barrier(BarrierTag::SphereBoundary, &p(0.25), 0.5, DEFAULT_SPHERE_POINT, 1.0 / 32.0).unwrap();
    let report = verify_supersolution(&spec.with_constant(0.0), 1.0 / 32.0).unwrap();
    assert!(!report.pass);
    assert!(report.max_operator > 0.0);
}

#[test]
fn flat_barrier_constant_respects_lower_bound() {
    // At x = x_0 the operator is y^{α+a-2} α (n+α-1+a + C(α-1+a)), which
    // forces C ≥ (n+α-1+a)/(1-a-α).
    for s in [0.25, 0.4] {
        let params = p(s);
        let a = params.a();
        let alpha = 0.5 * (1.0 - a);
        let spec = make_barrier(BarrierTag::FlatBoundary, &params, alpha, [0.0; 3], 1.0 / 64.0).unwrap();
        let bound = (alpha + a) / (1.0 - a - alpha);
        assert!(spec.c >= bound * (1.0 - 1e-8), "s {s}: {} < {bound}", spec.c);
        assert!(spec.c <= bound * (1.0 + 1e-6), "s {s}: {} vs {bound}", spec.c);
        assert!(certify(&spec, 1.0 / 64.0).unwrap().pass);
    }
}

#[test]
fn constraint_violations_are_rejected() {
    let params = p(0.25);
    let a = params.a();
    assert!(matches!(
        make_barrier(BarrierTag::SphereBoundary, &params, 1.0, DEFAULT_SPHERE_POINT, 0.05),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        make_barrier(BarrierTag::FlatBoundary, &params, 1.0 - a, [0.0; 3], 0.05),
        Err(Error::InvalidArgument(_))
    ));
    assert!(make_barrier(BarrierTag::SphereBoundary, &params, 0.5, [1.0, 0.0, 0.0], 0.05).is_err());
    assert!(make_barrier(BarrierTag::SphereBoundary, &params, 0.5, [0.6, 0.0, 0.7], 0.05).is_err());
}

#[test]
fn caloric_exact_coefficient_converges() {
    for s in [0.25, 0.4] {
        let r = caloric_residuals(&p(s), TimeCoefficient::Exact, 4).unwrap();
        assert!((r.k - 2.0 * (1.0 - p(s).a()) / (1.0 + p(s).a())).abs() < 1e-15);
        assert!(r.boundary_order >= 1.0, "{r:?}");
        assert!(r.interior_order >= 1.0, "{r:?}");
        assert!(r.boundary.last().unwrap() < &1e-2);
    }
}

#[test]
fn caloric_literal_coefficient_leaves_constant_residual() {
    let params = p(0.25);
    let a = params.a();
    let r = caloric_residuals(&params, TimeCoefficient::Literal, 4).unwrap();
    let gap = 4.0 * a / (1.0 + a);
    assert!((r.boundary.last().unwrap() - gap).abs() < 1e-2, "{r:?}");
    assert!(r.boundary_order.abs() < 0.1);
}

#[test]
fn caloric_interior_operator_vanishes() {
    let spec = make_barrier(BarrierTag::CaloricU, &p(0.25), 0.0, [0.2, 0.0, 0.0], 1.0 / 32.0).unwrap();
    let report = verify_supersolution(&spec, 1.0 / 32.0).unwrap();
    assert!(report.max_operator.abs() < 1e-10, "{report:?}");
}

#[test]
fn bfun_normalization_matches_gamma_form() {
    use statrs::function::gamma::gamma;
    for a in [0.2, 0.5, 0.8] {
        let closed = a * std::f64::consts::PI.sqrt() * gamma(0.5 * (1.0 + a)) / gamma(1.0 + 0.5 * a);
        assert!((bfun_normalization(a).unwrap() - closed).abs() < 1e-10);
    }
}

#[test]
fn bfun_trace_matches_closed_form() {
    // (1-a) B_raw(x, 0) = (1+x)^{1-a}(1 - 1/x) + (1-x)^{1-a}(1 + 1/x).
    let params = p(0.25);
    let a = params.a();
    let c = bfun_normalization(a).unwrap();
    for x in [0.1f64, 0.37, -0.6, 0.95] {
        let raw = ((1.0 + x).powf(1.0 - a) * (1.0 - 1.0 / x) + (1.0 - x).powf(1.0 - a) * (1.0 + 1.0 / x)) / (1.0 - a);
        let (v, _) = bfun_value(&params, x, 0.0).unwrap();
        assert!((v - raw / c).abs() < 1e-9, "{x}: {v} vs {}", raw / c);
    }
    let (v0, _) = bfun_value(&params, 0.0, 0.0).unwrap();
    assert!((v0 - 2.0 * a / (1.0 - a) / c).abs() < 1e-9);
}

#[test]
fn bfun_rejects_half_laplacian() {
    assert!(compute_bfun(&p(0.5), 16, 8).is_err());
    assert!(make_barrier(BarrierTag::Bfun, &p(0.5), 0.0, [0.0; 3], 0.05).is_err());
}

#[test]
fn bfun_properties() {
    let params = p(0.25);
    let b = compute_bfun(&params, 64, 32).unwrap();
    let props = check_bfun_properties(&b).unwrap();
    assert!(props.boundary_sup < 1e-9, "{props:?}");
    assert!(props.neumann_error < 0.02, "{props:?}");
    assert!(props.symmetry_error < 1e-9);
    assert!(props.max_at_origin);
    assert!(props.c1 > 0.0 && props.c2 > 0.0);
    // The trace vanishes like (1 - |x|)^{2s}.
    assert!((props.boundary_exponent - 2.0 * params.s()).abs() < 0.05, "{props:?}");
}

#[test]
fn bfun_interior_residual_shrinks_under_refinement() {
    let params = p(0.25);
    let coarse = check_bfun_properties(&compute_bfun(&params, 32, 16).unwrap()).unwrap();
    let fine = check_bfun_properties(&compute_bfun(&params, 64, 32).unwrap()).unwrap();
    assert!(fine.interior_residual < 0.5 * coarse.interior_residual);
}

#[test]
fn bfun_verification_report() {
    let spec = make_barrier(BarrierTag::Bfun, &p(0.25), 0.0, [0.0; 3], 1.0 / 32.0).unwrap();
    let coarse = verify_supersolution(&spec, 1.0 / 32.0).unwrap();
    let fine = verify_supersolution(&spec, 1.0 / 64.0).unwrap();
    assert!(coarse.pass && fine.pass, "{coarse:?} {fine:?}");
    assert!(fine.max_operator < 0.5 * coarse.max_operator);
}

#[test]
fn certificate_round_trips() {
    let spec = make_barrier(BarrierTag::SphereBoundary, &p(0.25), 0.5, DEFAULT_SPHERE_POINT, 1.0 / 32.0).unwrap();
    let cert = certify(&spec, 1.0 / 32.0).unwrap();
    let json = serde_json::to_string(&cert).unwrap();
    assert!(json.contains("\"C_found\"") && json.contains("\"sphere_boundary\""));
    let back: Certificate = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cert);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn certificates_survive_refinement(s in 0.1f64..0.5, alpha in 0.1f64..0.9, theta in 0.2f64..2.9) {
            let params = p(s);
            let centre = [theta.cos(), 0.0, theta.sin()];
            let spec = make_barrier(BarrierTag::SphereBoundary, &params, alpha, centre, 1.0 / 32.0).unwrap();
            let coarse = verify_supersolution(&spec, 1.0 / 32.0).unwrap();
            let fine = verify_supersolution(&spec, 1.0 / 64.0).unwrap();
            prop_assert!(coarse.pass);
            prop_assert_eq!(coarse.pass, fine.pass);
        }

        #[test]
        fn flat_certificates_survive_refinement(s in 0.1f64..0.5, frac in 0.1f64..0.9, x0 in -0.8f64..0.8) {
            let params = p(s);
            let alpha = frac * (1.0 - params.a());
            let spec = make_barrier(BarrierTag::FlatBoundary, &params, alpha, [x0, 0.0, 0.0], 1.0 / 32.0).unwrap();
            let fine = verify_supersolution(&spec, 1.0 / 64.0).unwrap();
            prop_assert!(fine.pass);
        }
    }
}
