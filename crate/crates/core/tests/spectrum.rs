mod common;

use std::f64::consts::PI;

use otsuki_spectra::geodesic::{profile, solve_rotation, GeodesicProfile};
use otsuki_spectra::spectrum::{
    assemble, index_report, lambda_functional, lambda_functional_closed_form, sl_grid_size, upper_bound, weyl_n,
};
use otsuki_spectra::sturm::{build_problem, eigen_below, Boundary};
use otsuki_spectra::{Config, RotationNumber, Spectrum};

use common::{orthonormalize, similarity, CASES};

const CUT: f64 = 2.5;

fn setup(p: u32, q: u32, grid: usize) -> GeodesicProfile<f64> {
    let sol = solve_rotation(RotationNumber::new(p, q).unwrap()).unwrap();
    let n = sl_grid_size(grid, q);
    profile(&sol, n / (2 * q as usize)).unwrap()
}

/// Spectrum of the `l`-problem on the profile grid, and twice the largest
/// eigenvalue shift below the cut on doubling that grid.
fn spectrum_with_error(prof: &GeodesicProfile<f64>, l: u32) -> (Spectrum, f64) {
    let n = prof.samples_per_period();
    let prob = build_problem(prof, l, Boundary::Periodic);
    let coarse = eigen_below(&prob, CUT, n).unwrap();
    let fine = eigen_below(&prob, CUT, 2 * n).unwrap();
    let shift = coarse
        .eigenvalues
        .iter()
        .zip(&fine.eigenvalues)
        .filter(|(a, _)| **a < CUT)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (coarse, 2.0 * shift)
}

#[test]
fn zeroth_problem_has_sin_phi_at_two() {
    for (p, q) in CASES {
        let prof = setup(p, q, 2048);
        let (spec, eps) = spectrum_with_error(&prof, 0);
        let q2 = 2 * q as usize;
        assert!((spec.eigenvalues[q2] - 2.0).abs() < eps, "{p}/{q}: {} (eps {eps})", spec.eigenvalues[q2]);
        let mut sin_phi = vec![spec.grid.iter().map(|&t| prof.bipolar.state(t).phi.sin()).collect::<Vec<_>>()];
        orthonormalize(&mut sin_phi);
        assert!(similarity(&spec.eigenfunctions[q2], &sin_phi) > 1.0 - 1e-6);
        assert_eq!(spec.zero_counts[q2], q2);
        let margin = 2.0 - spec.eigenvalues[q2 - 1];
        assert!(margin > eps, "{p}/{q}: margin {margin} vs eps {eps}");
    }
}

#[test]
fn first_problem_has_a_double_eigenvalue_at_two() {
    for (p, q) in CASES {
        let prof = setup(p, q, 2048);
        let (spec, eps) = spectrum_with_error(&prof, 1);
        let mut coords: Vec<Vec<f64>> = vec![
            spec.grid
                .iter()
                .map(|&t| {
                    let s = prof.bipolar.state(t);
                    s.phi.cos() * s.theta.sin()
                })
                .collect(),
            spec.grid
                .iter()
                .map(|&t| {
                    let s = prof.bipolar.state(t);
                    s.phi.cos() * s.theta.cos()
                })
                .collect(),
        ];
        orthonormalize(&mut coords);
        let p2 = 2 * p as usize;
        for i in [p2 - 1, p2] {
            assert!((spec.eigenvalues[i] - 2.0).abs() < eps, "{p}/{q} λ_{i}(1) = {}", spec.eigenvalues[i]);
            assert!(similarity(&spec.eigenfunctions[i], &coords) > 1.0 - 1e-6, "{p}/{q} mode {i}");
            assert_eq!(spec.zero_counts[i], p2);
        }
        assert!(spec.eigenvalues[p2 - 2] < 2.0 - eps);
    }
}

#[test]
fn second_problem_starts_above_four() {
    for (p, q) in CASES {
        let prof = setup(p, q, 2048);
        let (spec, eps) = spectrum_with_error(&prof, 2);
        assert!(spec.eigenvalues[0] >= 4.0 - eps.max(1e-12), "{p}/{q}: {}", spec.eigenvalues[0]);
    }
}

#[test]
fn extremal_index_counts() {
    let expected = [20, 16, 28, 36, 22];
    let config = Config::default();
    for ((p, q), n2) in CASES.into_iter().zip(expected) {
        let r = RotationNumber::new(p, q).unwrap();
        let rep = index_report(r, &config).unwrap();
        assert_eq!(rep.n2, n2, "{p}/{q}");
        assert_eq!(rep.n2_expected, n2);
        assert_eq!(rep.table.n2_refined, n2, "{p}/{q} on the doubled grid");
        assert!(rep.pass(), "{p}/{q}: {:?}", rep.first_failure());
    }
}

#[test]
fn count_is_stable_on_a_coarser_and_a_finer_grid() {
    for (p, q, n2) in [(3, 5, 20), (5, 8, 16)] {
        for grid in [1024, 4096] {
            let table = assemble(&setup(p, q, grid), 3, CUT).unwrap();
            assert_eq!(weyl_n(&table, 2.0), n2, "{p}/{q} at {grid}");
        }
    }
}

#[test]
fn functional_two_ways_and_its_bound() {
    for (p, q) in CASES {
        let r = RotationNumber::new(p, q).unwrap();
        let sol = solve_rotation::<f64>(r).unwrap();
        let by_area = lambda_functional(&sol);
        let closed = lambda_functional_closed_form(&sol).unwrap();
        assert!((by_area - closed).abs() < 1e-8, "{p}/{q}");
        let factor = if q % 2 == 0 { 4.0 } else { 8.0 };
        let oracle = factor * f64::from(q) * PI * common::i_direct(3, sol.b);
        assert!((by_area - oracle).abs() < 1e-8 * oracle, "{p}/{q}");
        let bound = upper_bound::<f64>(r);
        let k = if q % 2 == 0 { 2.0 } else { 4.0 };
        assert_eq!(bound, k * 2f64.sqrt() * f64::from(q) * PI * PI);
        assert!(by_area < bound);
    }
}

#[test]
fn too_small_angular_cutoff_is_reported() {
    let prof = setup(3, 5, 512);
    assert!(assemble(&prof, 1, CUT).is_err());
    assert!(assemble(&prof, 3, 1.5).is_err());
}
