use std::f64::consts::PI;

use fracgrad::special_fn::{gamma, gen_binomial, GammaError, GammaMode};
use proptest::prelude::*;

/// Γ at the exact binary value of each argument, from a 40-digit mpmath run.
#[allow(clippy::excessive_precision)]
const REFERENCE: &[(f64, f64)] = &[
    (0.001, 9.99423772484595445e+2),
    (0.01, 9.94325851191506016e+1),
    (0.1, 9.51350769866873129),
    (0.3, 2.99156898768759074),
    (0.5, 1.77245385090551603),
    (0.75, 1.22541670246517765),
    (1.5, 8.86226925452758014e-1),
    (2.5, 1.32934038817913702),
    (3.3, 2.6834373819557683),
    (7.25, 1.15538101391998969e+3),
    (10.5, 1.13327838894878557e+6),
    (23.7, 1.00461418275853452e+22),
    (50.5, 4.29046291235195981e+63),
    (99.9, 5.89173215164451569e+155),
    (140.25, 3.30539196541907949e+239),
    (170.5, 5.56209241455999961e+305),
    (-0.5, -3.54490770181103205),
    (-1.5, 2.3632718012073547),
    (-2.3, -1.44710739425591812),
    (-7.6, 1.91047919141173633e-4),
    (-9.5, 2.77212791157510213e-6),
    (-20.25, -8.56903266388512748e-19),
];

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn matches_high_precision_reference() {
    for &(x, expected) in REFERENCE {
        let got = gamma(x, GammaMode::Extended).unwrap();
        assert!(rel(got, expected) <= 1e-12, "Γ({x}) = {got:e}, want {expected:e}");
        if x > 0.0 {
            assert_eq!(gamma(x, GammaMode::Strict).unwrap().to_bits(), got.to_bits());
        }
    }
}

#[test]
fn matches_statrs_on_positive_grid() {
    for j in 1..=1600 {
        let x = j as f64 * 0.1;
        let got = gamma(x, GammaMode::Strict).unwrap();
        let other = statrs::function::gamma::gamma(x);
        assert!(rel(got, other) <= 1e-12, "x = {x}: {got:e} vs {other:e}");
    }
}

#[test]
fn factorials_are_exact() {
    let mut fact = 1.0;
    for n in 1..=22u32 {
        assert_eq!(gamma(f64::from(n), GammaMode::Strict).unwrap(), fact, "Γ({n})");
        fact *= f64::from(n);
    }
}

fn falling_product(p: f64, q: u32) -> f64 {
    let mut num = 1.0;
    let mut den = 1.0;
    for j in 0..q {
        num *= p - f64::from(j);
        den *= f64::from(j + 1);
    }
    num / den
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn recurrence_on_positive_axis(x in 1e-6f64..50.0) {
        let lhs = gamma(x + 1.0, GammaMode::Strict).unwrap();
        let rhs = x * gamma(x, GammaMode::Strict).unwrap();
        prop_assert!(rel(rhs, lhs) <= 1e-12, "x = {}: {:e} vs {:e}", x, lhs, rhs);
    }

    #[test]
    fn recurrence_on_negative_axis(x in -10.0f64..0.0) {
        prop_assume!((x - x.round()).abs() > 1e-6);
        let lhs = gamma(x + 1.0, GammaMode::Extended).unwrap();
        let rhs = x * gamma(x, GammaMode::Extended).unwrap();
        prop_assert!(rel(rhs, lhs) <= 1e-11, "x = {}", x);
    }

    #[test]
    fn reflection(x in -10.0f64..0.0) {
        prop_assume!((x - x.round()).abs() > 1e-6);
        let product = gamma(x, GammaMode::Extended).unwrap()
            * gamma(1.0 - x, GammaMode::Extended).unwrap()
            * (PI * x).sin()
            / PI;
        prop_assert!((product - 1.0).abs() <= 1e-10, "x = {}: {}", x, product);
    }

    #[test]
    fn binomial_equals_falling_product(p in -5.0f64..5.0, q in 0u32..20) {
        let got = gen_binomial(p, q, GammaMode::Extended).unwrap();
        let direct = falling_product(p, q);
        if direct == 0.0 {
            prop_assert_eq!(got, 0.0);
        } else {
            prop_assert!(rel(got, direct) <= 1e-12, "({} choose {}) = {:e} vs {:e}", p, q, got, direct);
        }
    }

    #[test]
    fn binomial_equals_gamma_ratio_away_from_poles(p in -5.0f64..5.0, q in 0u32..20) {
        let den_arg = p - f64::from(q) + 1.0;
        let clear = |a: f64| a > 0.0 || (a - a.round()).abs() > 0.01;
        prop_assume!(clear(p + 1.0) && clear(den_arg));
        let g = |a: f64| gamma(a, GammaMode::Extended).unwrap();
        let ratio = g(p + 1.0) / (g(f64::from(q) + 1.0) * g(den_arg));
        let got = gen_binomial(p, q, GammaMode::Extended).unwrap();
        prop_assert!(rel(got, ratio) <= 1e-10, "({} choose {}) = {:e} vs {:e}", p, q, got, ratio);
    }

    #[test]
    fn strict_success_agrees_bitwise(x in -5.0f64..60.0, p in -3.0f64..8.0, q in 0u32..12) {
        if let Ok(v) = gamma(x, GammaMode::Strict) {
            prop_assert_eq!(v.to_bits(), gamma(x, GammaMode::Extended).unwrap().to_bits());
        } else {
            prop_assert!(x <= 0.0);
        }
        match gen_binomial(p, q, GammaMode::Strict) {
            Ok(v) => prop_assert_eq!(v.to_bits(), gen_binomial(p, q, GammaMode::Extended).unwrap().to_bits()),
            Err(GammaError::StrictNonPositive { arg }) => {
                prop_assert!(arg <= 0.0);
                prop_assert!(p + 1.0 <= 0.0 || p - f64::from(q) + 1.0 <= 0.0);
            }
            Err(e) => prop_assert!(false, "unexpected {:?}", e),
        }
    }
}

#[test]
fn integer_binomials_match_pascal() {
    for n in 0..30u32 {
        let mut row = 1.0;
        for k in 0..=n {
            let got = gen_binomial(f64::from(n), k, GammaMode::Strict).unwrap();
            assert!(rel(got, row) < 1e-13, "C({n},{k})");
            row = row * f64::from(n - k) / f64::from(k + 1);
        }
        for k in n + 1..n + 4 {
            assert_eq!(gen_binomial(f64::from(n), k, GammaMode::Extended).unwrap(), 0.0);
        }
    }
}
