mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use otsuki_spectra::geodesic::{profile, solve_rotation, GeodesicProfile};
use otsuki_spectra::spectrum::sl_grid_size;
use otsuki_spectra::sturm::{build_problem, classify_subperiod, eigen, rayleigh, Boundary, SLProblem, SubperiodTag};
use otsuki_spectra::RotationNumber;

use common::CASES;

fn constant(p: f64, v: f64, boundary: Boundary) -> SLProblem<f64> {
    SLProblem::new(2.0 * PI, Arc::new(move |_| p), Arc::new(move |_| v), boundary)
}

/// `p k² + V` for `k = 0, 1, 1, 2, 2, …` (periodic) or `½, ½, 3/2, 3/2, …`.
fn fourier(p: f64, v: f64, boundary: Boundary, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let k = match boundary {
                Boundary::Periodic => i.div_ceil(2) as f64,
                Boundary::Antiperiodic => (i / 2) as f64 + 0.5,
            };
            p * k * k + v
        })
        .collect()
}

fn max_error(p: f64, v: f64, boundary: Boundary, n: usize, count: usize) -> f64 {
    let spec = eigen(&constant(p, v, boundary), count, n).unwrap();
    spec.eigenvalues.iter().zip(fourier(p, v, boundary, count)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn constant_coefficients_converge_at_second_order() {
    for boundary in [Boundary::Periodic, Boundary::Antiperiodic] {
        for (p, v) in [(1.0, 0.0), (2.5, 0.75)] {
            let errors: Vec<f64> = [64, 128, 256, 512].iter().map(|&n| max_error(p, v, boundary, n, 9)).collect();
            for w in errors.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.9, "{boundary:?} p={p} V={v}: order {order} from {errors:?}");
            }
            // relative to the largest eigenvalue checked
            assert!(errors[3] < 1e-3 * fourier(p, v, boundary, 9)[8]);
        }
    }
}

#[test]
fn constant_coefficient_ladder_and_rayleigh_quotients() {
    for boundary in [Boundary::Periodic, Boundary::Antiperiodic] {
        let spec = eigen(&constant(1.0, 0.0, boundary), 9, 256).unwrap();
        assert!(spec.ladder_violations(9).is_empty(), "{boundary:?}: {:?}", spec.zero_counts);
        for (lam, h) in spec.eigenvalues.iter().zip(&spec.eigenfunctions) {
            let r = rayleigh(&spec.problem, h).unwrap();
            assert!((r - lam).abs() < 1e-10 * lam.max(1.0));
            assert!((spec.inner(h, h) - 1.0).abs() < 1e-12);
        }
    }
}

fn otsuki_profile(p: u32, q: u32) -> GeodesicProfile<f64> {
    let sol = solve_rotation(RotationNumber::new(p, q).unwrap()).unwrap();
    let n = sl_grid_size(2048, q);
    profile(&sol, n / (2 * q as usize)).unwrap()
}

#[test]
fn otsuki_problems_interlace_and_follow_the_zero_ladder() {
    for (p, q) in CASES {
        let prof = otsuki_profile(p, q);
        let n = prof.samples_per_period();
        let count = 2 * q as usize + 4;
        for l in 0..=3 {
            let per = eigen(&build_problem(&prof, l, Boundary::Periodic), count, n).unwrap();
            let anti = eigen(&build_problem(&prof, l, Boundary::Antiperiodic), count, n).unwrap();
            assert!(per.ladder_violations(count).is_empty(), "{p}/{q} l={l}: {:?}", per.zero_counts);
            assert!(anti.ladder_violations(count).is_empty(), "{p}/{q} l={l}: {:?}", anti.zero_counts);

            // λ0 < λ̃1 ≤ λ̃2 < λ1 ≤ λ2 < λ̃3 ≤ λ̃4 < …
            let (lam, tilde) = (&per.eigenvalues, &anti.eigenvalues);
            let slack = 1e-9 * lam[count - 1];
            let mut chain = vec![(lam[0], true)];
            for i in 0..(count - 1) / 2 {
                chain.extend([(tilde[2 * i], true), (tilde[2 * i + 1], false)]);
                chain.extend([(lam[2 * i + 1], true), (lam[2 * i + 2], false)]);
            }
            for w in chain.windows(2) {
                let (prev, (next, strict)) = (w[0].0, w[1]);
                if strict {
                    assert!(prev < next, "{p}/{q} l={l}: {prev} !< {next}");
                } else {
                    assert!(prev <= next + slack, "{p}/{q} l={l}: {prev} !<= {next}");
                }
            }
        }
    }
}

#[test]
fn subperiod_classification_of_the_zeroth_problem() {
    let prof = otsuki_profile(3, 5);
    let q = 5usize;
    let spec = eigen(&build_problem(&prof, 0, Boundary::Periodic), 2 * q + 4, prof.samples_per_period()).unwrap();
    let tags = classify_subperiod(&spec, q).unwrap();
    for (i, tag) in tags.iter().enumerate() {
        let expected = match i {
            0 => SubperiodTag::PeriodicT0OverN,
            i if i == 2 * q - 1 || i == 2 * q => SubperiodTag::AntiperiodicT0Over2n,
            _ => SubperiodTag::Neither,
        };
        assert_eq!(*tag, expected, "mode {i}");
    }
}

#[test]
fn degenerate_inputs_are_rejected() {
    let prob = constant(1.0, 0.0, Boundary::Periodic);
    assert!(eigen(&prob, 4, 32).is_err());
    assert!(eigen(&prob, 0, 128).is_err());
    assert!(rayleigh(&prob, &[0.0; 64]).is_err());
    let bad = SLProblem::new(1.0, Arc::new(|_| -1.0), Arc::new(|_| 0.0), Boundary::Periodic);
    assert!(eigen(&bad, 2, 64).is_err());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// The Rayleigh quotient of any grid function bounds λ₀ from above.
        #[test]
        fn rayleigh_quotients_bound_the_ground_state(v in proptest::collection::vec(-1.0f64..1.0, 128)) {
            prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
            let prob = SLProblem::new(
                2.0 * PI,
                Arc::new(|t: f64| 1.5 + t.cos()),
                Arc::new(|t: f64| 0.5 + 0.25 * (2.0 * t).sin()),
                Boundary::Periodic,
            );
            let spec = eigen(&prob, 1, 128).unwrap();
            prop_assert!(rayleigh(&prob, &v).unwrap() >= spec.eigenvalues[0] - 1e-12);
        }
    }
}
