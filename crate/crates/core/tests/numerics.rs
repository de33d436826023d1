use ppp_ase::numerics::{
    beta, bisect, gamma, incomplete_beta, integrate_finite, integrate_semi_infinite, lower_incomplete_gamma,
    BisectionOptions, QuadratureOptions,
};
use ppp_ase::Error;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn beta_reference_values() {
    // High-precision values of the defining integral.
    assert!(rel(incomplete_beta(0.5, 0.5, 2.5).unwrap(), 1.089_048_622_548_086_2) < 1e-10);
    assert!(rel(incomplete_beta(0.3, 2.5, 7.25).unwrap(), 0.004_892_158_743_379_497) < 1e-10);
    assert_eq!(incomplete_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
    assert!((incomplete_beta(0.5, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn beta_matches_brute_force_quadrature() {
    // Composite GK on [0, x] with the x^(a-1) singularity removed by t = x·v^(1/a).
    let (x, a, b) = (0.5, 0.5, 2.5);
    let opts = QuadratureOptions { rel_tolerance: 1e-13, abs_tolerance: 1e-15, ..QuadratureOptions::default() };
    let direct = integrate_finite(
        |v: f64| {
            let t = x * v.powf(1.0 / a);
            x.powf(a) / a * (1.0 - t).powf(b - 1.0)
        },
        0.0,
        1.0,
        &opts,
    )
    .unwrap()
    .value;
    assert!(rel(incomplete_beta(x, a, b).unwrap(), direct) < 1e-10);
}

#[test]
fn gamma_reference_values() {
    assert!(rel(lower_incomplete_gamma(0.5, 2.0).unwrap(), 1.691_806_732_945_198_3) < 1e-10);
    assert!(rel(lower_incomplete_gamma(3.7, 11.0).unwrap(), 4.156_730_632_793_835) < 1e-10);
    assert_eq!(lower_incomplete_gamma(2.0, 0.0).unwrap(), 0.0);
    assert!(rel(lower_incomplete_gamma(0.5, 2.0).unwrap(), {
        let opts = QuadratureOptions { rel_tolerance: 1e-13, abs_tolerance: 1e-15, ..QuadratureOptions::default() };
        // t = v², removing the t^(-1/2) singularity.
        integrate_finite(|v: f64| 2.0 * (-v * v).exp(), 0.0, 2f64.sqrt(), &opts).unwrap().value
    }) < 1e-10);
}

#[test]
fn domain_errors() {
    assert!(matches!(incomplete_beta(1.1, 1.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(incomplete_beta(0.5, 0.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(incomplete_beta(0.5, 1.0, -1.0), Err(Error::Domain(_))));
    assert!(matches!(lower_incomplete_gamma(0.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(lower_incomplete_gamma(1.0, -1.0), Err(Error::Domain(_))));
    let bad = QuadratureOptions { max_subdivisions: 0, ..QuadratureOptions::default() };
    assert!(integrate_semi_infinite(|z: f64| (-z).exp(), &bad).is_err());
    let bad = BisectionOptions { interval_tolerance: 0.0, ..BisectionOptions::default() };
    assert!(bisect(|x: f64| Ok(x), -1.0, 1.0, &bad).is_err());
}

#[test]
fn quadrature_failure_is_a_convergence_error() {
    let opts = QuadratureOptions { max_subdivisions: 3, ..QuadratureOptions::default() };
    let err = integrate_semi_infinite(|z: f64| (50.0 * z).sin().abs() / (1.0 + z * z), &opts).unwrap_err();
    assert!(err.is_convergence_failure());
}

#[test]
fn bisect_without_sign_change_reports_bracket() {
    let err = bisect(|x: f64| Ok(x * x + 1.0), -1.0, 1.0, &BisectionOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Bracket { .. }));
    assert!(err.is_convergence_failure());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn beta_complement_identity(x in 0.0f64..=1.0, a in 0.05f64..30.0, b in 0.05f64..30.0) {
        let lhs = incomplete_beta(x, a, b).unwrap() + incomplete_beta(1.0 - x, b, a).unwrap();
        prop_assert!(rel(lhs, beta(a, b)) < 1e-10, "x={x} a={a} b={b}: {lhs} vs {}", beta(a, b));
    }

    #[test]
    fn beta_monotone_in_x(x in 0.0f64..0.99, dx in 1e-6f64..0.01, a in 0.1f64..20.0, b in 0.1f64..20.0) {
        let lo = incomplete_beta(x, a, b).unwrap();
        let hi = incomplete_beta((x + dx).min(1.0), a, b).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-13));
    }

    #[test]
    fn gamma_monotone_and_bounded(s in 0.05f64..40.0, x in 0.0f64..100.0, dx in 1e-6f64..1.0) {
        let lo = lower_incomplete_gamma(s, x).unwrap();
        let hi = lower_incomplete_gamma(s, x + dx).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-13));
        prop_assert!(hi <= gamma(s) * (1.0 + 1e-12));
    }

    #[test]
    fn gamma_unit_shape_closed_form(x in 0.0f64..50.0) {
        let g = lower_incomplete_gamma(1.0, x).unwrap();
        prop_assert!((g - (-(-x).exp_m1())).abs() <= 1e-14 * g.max(1e-300) + 1e-300);
    }

    #[test]
    fn quadrature_is_linear(c in 0.1f64..10.0, p in 1.2f64..4.0, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let opts = QuadratureOptions::default();
        let f = |z: f64| (-c * z).exp();
        let g = |z: f64| (1.0 + z).powf(-p);
        let both = integrate_semi_infinite(|z| a * f(z) + b * g(z), &opts).unwrap().value;
        let exact = a / c + b / (p - 1.0);
        prop_assert!((both - exact).abs() <= 1e-8 * (a.abs() / c + b.abs() / (p - 1.0)), "{both} vs {exact}");
    }

    #[test]
    fn bisect_finds_root_within_tolerance(r in -10.0f64..10.0, w in 0.01f64..20.0, cubic in any::<bool>()) {
        let opts = BisectionOptions::default();
        let root = bisect(
            |x: f64| Ok(if cubic { (x - r).powi(3) } else { (x - r) * (1.0 + x * x) }),
            r - w,
            r + 0.7 * w,
            &opts,
        )
        .unwrap();
        prop_assert!((root - r).abs() <= opts.interval_tolerance);
    }

    #[test]
    fn bisect_is_orientation_free(r in -5.0f64..5.0) {
        let opts = BisectionOptions::default();
        let up = bisect(|x: f64| Ok(x - r), -6.0, 6.0, &opts).unwrap();
        let down = bisect(|x: f64| Ok(r - x), -6.0, 6.0, &opts).unwrap();
        prop_assert!((up - down).abs() <= opts.interval_tolerance);
    }
}
