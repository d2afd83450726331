mod common;

use std::f64::consts::FRAC_PI_2;

use approx::assert_relative_eq;
use otsuki_spectra::elliptic::{
    complete_e, complete_k, complete_pi, de_dk, dk_dk, dpi_dk, dpi_dn, Characteristic, Modulus,
};
use otsuki_spectra::geodesic::{xi, xi_derivative};

fn k(x: f64) -> f64 {
    complete_k(Modulus::new(x).unwrap())
}

fn e(x: f64) -> f64 {
    complete_e(x).unwrap()
}

fn pi3(n: f64, x: f64) -> f64 {
    complete_pi(Characteristic::new(n).unwrap(), Modulus::new(x).unwrap())
}

#[test]
fn values_at_zero_modulus() {
    assert!((k(0.0) - FRAC_PI_2).abs() <= 1e-12);
    assert!((e(0.0) - FRAC_PI_2).abs() <= 1e-12);
    assert!((pi3(0.0, 0.0) - FRAC_PI_2).abs() <= 1e-12);
}

#[test]
fn legendre_relation_on_fifty_moduli() {
    for i in 1..=50 {
        let x = i as f64 / 51.0;
        let xc = (1.0 - x * x).sqrt();
        let lhs = e(x) * k(xc) + e(xc) * k(x) - k(x) * k(xc);
        assert!((lhs - FRAC_PI_2).abs() <= 1e-11, "k = {x}: {lhs}");
    }
}

#[test]
fn agrees_with_double_exponential_quadrature() {
    for i in 0..20 {
        let x = 0.049 * i as f64;
        assert_relative_eq!(k(x), common::elliptic_k(x), max_relative = 1e-13);
        assert_relative_eq!(e(x), common::elliptic_e(x), max_relative = 1e-13);
        for n in [0.1, 0.45, 0.8] {
            assert_relative_eq!(pi3(n, x), common::elliptic_pi(n, x), max_relative = 1e-12);
        }
    }
}

#[test]
fn first_and_second_kind_derivatives_match_differences() {
    for i in 1..20 {
        let x = 0.05 * i as f64;
        let h = 1e-3 * (1.0 - x).min(x);
        assert_relative_eq!(de_dk(x).unwrap(), common::derivative(e, x, h), max_relative = 1e-7);
        assert_relative_eq!(dk_dk(x).unwrap(), common::derivative(k, x, h), max_relative = 1e-7);
    }
}

#[test]
fn third_kind_derivatives_match_differences() {
    for &(n, x) in &[(0.2f64, 0.3f64), (0.5, 0.6), (0.7, 0.4), (0.3, 0.9), (0.85, 0.2)] {
        let hn = 1e-3 * (1.0 - n).min(n);
        let hk = 1e-3 * (1.0 - x).min(x);
        let fd_n = common::derivative(|m| pi3(m, x), n, hn);
        let fd_k = common::derivative(|y| pi3(n, y), x, hk);
        assert_relative_eq!(dpi_dn(n, x).unwrap(), fd_n, max_relative = 1e-7);
        assert_relative_eq!(dpi_dk(n, x).unwrap(), fd_k, max_relative = 1e-7);
    }
}

#[test]
fn xi_derivative_matches_differences() {
    // Ξ as a function of n = sin²b
    let xi_n = |n: f64| xi(n.sqrt().asin()).unwrap();
    for n in std::iter::once(1e-3).chain((1..10).map(|i| 0.1 * i as f64)) {
        let h = 1e-3 * (1.0 - n).min(n);
        assert_relative_eq!(xi_derivative(n).unwrap(), common::derivative(xi_n, n, h), max_relative = 1e-7);
    }
}

#[test]
fn rejects_out_of_range_arguments() {
    assert!(Modulus::new(1.0).is_err());
    assert!(Modulus::new(-0.1).is_err());
    assert!(Characteristic::new(1.0).is_err());
    assert!(de_dk(0.0).is_err());
    assert!(dpi_dn(0.25, 0.5).is_err());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn legendre_relation_holds_anywhere(x in 0.001f64..0.999) {
            let xc = (1.0 - x * x).sqrt();
            let lhs = e(x) * k(xc) + e(xc) * k(x) - k(x) * k(xc);
            prop_assert!((lhs - FRAC_PI_2).abs() <= 1e-11);
        }

        #[test]
        fn second_kind_never_exceeds_first(x in 0.0f64..0.999) {
            prop_assert!(e(x) <= k(x));
            prop_assert!(de_dk(x.max(1e-3)).unwrap() < 0.0);
        }
    }
}
