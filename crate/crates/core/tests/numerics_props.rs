use casimir::equilibrium::{ratio_eq, ratio_eq_dimensional, ratio_from_forces};
use casimir::modesum::{sum_minus_integral_bilateral, sum_minus_integral_halfline, ModeFn};
use casimir::nonequilibrium::{inner_integral_estimate, ratio_from_fields};
use casimir::numerics::{differentiate, integrate_1d, QuadSettings};
use casimir::specfun::{ap_kernel, bessel_minus_struve};
use proptest::prelude::*;

type Case = (fn(f64) -> f64, f64);

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn integration_is_linear(
        f in prop::collection::vec(-3.0..3.0f64, 1..6),
        g in prop::collection::vec(-3.0..3.0f64, 1..6),
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
        lo in -2.0..0.0f64,
        hi in 0.1..2.0f64,
    ) {
        let s = QuadSettings::equilibrium();
        let ef = integrate_1d(|x| poly(&f, x), lo, hi, &s).unwrap();
        let eg = integrate_1d(|x| poly(&g, x), lo, hi, &s).unwrap();
        let combined = integrate_1d(|x| alpha * poly(&f, x) + beta * poly(&g, x), lo, hi, &s).unwrap();
        let tol = combined.error + alpha.abs() * ef.error + beta.abs() * eg.error + 1e-12;
        prop_assert!((combined.value - (alpha * ef.value + beta * eg.value)).abs() <= tol);
        prop_assert!(ef.error >= 0.0 && ef.evaluations >= 1);
    }

    #[test]
    fn derivatives_of_smooth_functions(x in 0.2..3.0f64) {
        let cases: [Case; 4] = [
            (f64::sin, x.cos()),
            (f64::exp, x.exp()),
            (f64::ln, 1.0 / x),
            (|y| y.powi(5), 5.0 * x.powi(4)),
        ];
        for (f, want) in cases {
            let d = differentiate(f, x, None).unwrap();
            prop_assert!((d.value() - want).abs() <= 1e-6 * want.abs().max(1e-3), "{} vs {want}", d.value());
        }
    }

    #[test]
    fn kernel_outputs_finite(x in 0.0..50.0f64) {
        prop_assert!(ap_kernel(x).is_finite());
        let d = bessel_minus_struve(std::f64::consts::PI * x).unwrap();
        prop_assert!(d.value.is_finite() && d.est_rel_err.is_finite());
    }

    #[test]
    fn cellwise_linear_sums_vanish(a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let s = QuadSettings::equilibrium();
        let r = sum_minus_integral_bilateral(&ModeFn::new(move |n| a + b * n), &s).unwrap();
        prop_assert!(r.value.abs() <= 1e-12 * (1.0 + a.abs() + b.abs()), "{}", r.value);
    }

    #[test]
    fn even_paths_agree(width in 0.5..3.0f64) {
        let s = QuadSettings::equilibrium();
        let f = move |n: f64| (-(n / width).powi(2)).exp();
        let bilateral = sum_minus_integral_bilateral(&ModeFn::new(f), &s).unwrap();
        let half = sum_minus_integral_halfline(&ModeFn::new(f), &s).unwrap();
        let tol = bilateral.tail_error + 2.0 * half.tail_error + 1e-9;
        prop_assert!((bilateral.value - (2.0 * half.value - f(0.0))).abs() <= tol);
    }

    #[test]
    fn equilibrium_paths_and_scaling(a_t in 0.0..6.0f64, a in 0.1..10.0f64) {
        prop_assert!((ratio_eq(a_t) - ratio_from_forces(a_t)).abs() <= 1e-10);
        prop_assert_eq!(ratio_eq_dimensional(a, a_t / a), ratio_eq(a * (a_t / a)));
        if a_t >= 3.0 {
            prop_assert!(ratio_eq(a_t).abs() <= 0.05);
        }
    }

    #[test]
    fn ratio_identity(t in 0.0..10.0f64, delta in -0.05..0.05f64, d in -0.1..0.1f64) {
        let r = ratio_from_fields(t, delta, d);
        let direct = 1.0 - 240.0 / (std::f64::consts::PI.powi(2)) * (3.0 * delta + t * d);
        prop_assert!((r - direct).abs() <= 1e-14 * direct.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_integral_nonnegative(n in -6.0..6.0f64, t in 0.05..5.0f64) {
        let e = inner_integral_estimate(n, t, &QuadSettings::nonequilibrium()).unwrap();
        prop_assert!(e.value >= 0.0, "{e:?}");
    }
}

#[test]
fn inner_integral_not_even() {
    let s = QuadSettings::nonequilibrium();
    for t in [0.5, 1.0] {
        let found = (1..=8).any(|k| {
            let n = 0.25 * k as f64;
            let plus = inner_integral_estimate(n, t, &s).unwrap();
            let minus = inner_integral_estimate(-n, t, &s).unwrap();
            (plus.value - minus.value).abs() > plus.error + minus.error
        });
        assert!(found, "t/a = {t}");
    }
}
