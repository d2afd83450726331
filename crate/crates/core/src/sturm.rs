//! Periodic and antiperiodic Sturm–Liouville problems
//! `−(p h′)′ + V h = λ h` on a circle of length `period`.
//!
//! The discretisation is the flux form on a uniform grid `t_j = j·Δt`:
//!
//! ```text
//! (A h)_j = −[p_{j+½}(h_{j+1} − h_j) − p_{j−½}(h_j − h_{j−1})] / Δt² + V_j h_j
//! ```
//!
//! which is symmetric in the plain Euclidean inner product; the
//! antiperiodic condition flips the sign of the wraparound coupling.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesic::GeodesicProfile;
use crate::linalg::{combine, dot, CyclicTridiagonal, DenseSymmetric};
use crate::scalar::{sq, Real};

pub type Coefficient<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Boundary {
    /// `h(t + period) = h(t)`
    Periodic,
    /// `h(t + period) = −h(t)`
    Antiperiodic,
}

impl Boundary {
    fn wrap_sign<T: Real>(self) -> T {
        match self {
            Boundary::Periodic => T::one(),
            Boundary::Antiperiodic => -T::one(),
        }
    }
}

#[derive(Clone)]
pub struct SLProblem<T> {
    /// Angular wave number; zero for problems not coming from a torus.
    pub l: u32,
    pub period: T,
    /// Flux coefficient `p(t) > 0`.
    pub p: Coefficient<T>,
    /// Potential `V(t) ≥ 0`.
    pub v: Coefficient<T>,
    pub boundary: Boundary,
}

impl<T: fmt::Debug> fmt::Debug for SLProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SLProblem")
            .field("l", &self.l)
            .field("period", &self.period)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

impl<T: Real> SLProblem<T> {
    pub fn new(period: T, p: Coefficient<T>, v: Coefficient<T>, boundary: Boundary) -> Self {
        Self { l: 0, period, p, v, boundary }
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        Self { boundary, ..self.clone() }
    }

    /// Largest relative deviation of `p` and `V` from being periodic with
    /// period `period / n`, sampled on `samples` points.
    pub fn subperiod_deviation(&self, n: usize, samples: usize) -> T {
        let shift = self.period / T::from_usize_lossy(n);
        let mut dev = T::zero();
        let mut scale_p = T::zero();
        let mut scale_v = T::min_positive_value();
        let mut dev_v = T::zero();
        for j in 0..samples {
            let t = self.period * T::from_usize_lossy(j) / T::from_usize_lossy(samples);
            let (p0, p1) = ((self.p)(t), (self.p)(t + shift));
            let (v0, v1) = ((self.v)(t), (self.v)(t + shift));
            dev = dev.max((p1 - p0).abs());
            dev_v = dev_v.max((v1 - v0).abs());
            scale_p = scale_p.max(p0.abs());
            scale_v = scale_v.max(v0.abs());
        }
        (dev / scale_p).max(dev_v / scale_v)
    }
}

/// The Sturm–Liouville problem of the separated Laplacian on the torus:
/// `p(t) = 4π² cos²φ(t)`, `V(t) = l² / cos²φ(t)`, period `t0`.
pub fn build_problem<T: Real>(profile: &GeodesicProfile<T>, l: u32, boundary: Boundary) -> SLProblem<T> {
    let curve_p = profile.bipolar.clone();
    let curve_v = profile.bipolar.clone();
    let four_pi2 = T::lit(4.0) * sq(T::PI());
    let l2 = T::lit(f64::from(l) * f64::from(l));
    SLProblem {
        l,
        period: profile.t0(),
        p: Arc::new(move |t| four_pi2 * curve_p.cos2_phi(t)),
        v: Arc::new(move |t| l2 / curve_v.cos2_phi(t)),
        boundary,
    }
}

/// The discrete operator of a problem on `n` uniform cells.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub step: T,
    pub grid: Vec<T>,
    pub matrix: CyclicTridiagonal<T>,
}

pub fn discretize<T: Real>(prob: &SLProblem<T>, n: usize) -> Result<Discretization<T>> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::DegenerateGrid(format!("grid size {n} must be even and at least 4")));
    }
    let nf = T::from_usize_lossy(n);
    let step = prob.period / nf;
    let h2 = sq(step);
    let grid: Vec<T> = (0..n).map(|j| prob.period * T::from_usize_lossy(j) / nf).collect();
    let mut flux = Vec::with_capacity(n);
    for &t in &grid {
        let p = (prob.p)(t + step * T::half());
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::DegenerateGrid(format!("p(t) = {p} at t = {}", t + step * T::half())));
        }
        flux.push(p / h2);
    }
    let mut diag = Vec::with_capacity(n);
    for j in 0..n {
        let v = (prob.v)(grid[j]);
        if !v.is_finite() {
            return Err(Error::DegenerateGrid(format!("V(t) = {v} at t = {}", grid[j])));
        }
        diag.push(flux[j] + flux[(j + n - 1) % n] + v);
    }
    let mut off: Vec<T> = flux.iter().map(|f| -*f).collect();
    off[n - 1] *= prob.boundary.wrap_sign();
    Ok(Discretization { step, grid, matrix: CyclicTridiagonal::new(diag, off)? })
}

#[derive(Debug, Clone)]
pub struct SLSpectrum<T> {
    pub problem: SLProblem<T>,
    pub grid: Vec<T>,
    pub step: T,
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Normalised to `∫ h² dt = 1`.
    pub eigenfunctions: Vec<Vec<T>>,
    /// Sign changes over one period.
    pub zero_counts: Vec<usize>,
    /// Oscillation-theory index: `λ_i` for periodic problems (from 0),
    /// `λ̃_i` for antiperiodic ones (from 1).
    pub labels: Vec<usize>,
    pub matrix: CyclicTridiagonal<T>,
}

/// Zero count expected at sorted position `k` by oscillation theory:
/// `0, 2, 2, 4, 4, …` (periodic) or `1, 1, 3, 3, …` (antiperiodic).
pub fn expected_zero_count(boundary: Boundary, k: usize) -> usize {
    match boundary {
        Boundary::Periodic => 2 * k.div_ceil(2),
        Boundary::Antiperiodic => 2 * (k / 2) + 1,
    }
}

impl<T: Real> SLSpectrum<T> {
    pub fn grid_size(&self) -> usize {
        self.grid.len()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Positions among the first `k` modes whose zero count differs from
    /// the oscillation ladder.
    pub fn ladder_violations(&self, k: usize) -> Vec<usize> {
        (0..k.min(self.len()))
            .filter(|&i| self.zero_counts[i] != expected_zero_count(self.problem.boundary, i))
            .collect()
    }

    /// Discrete Rayleigh quotient on this spectrum's grid.
    pub fn rayleigh(&self, v: &[T]) -> Result<T> {
        quotient(&self.matrix, v)
    }

    /// `v` translated by `cells` grid steps: `(S v)_j = v(t_j + cells·Δt)`,
    /// continued across the period by the boundary condition.
    pub fn shifted(&self, v: &[T], cells: usize) -> Vec<T> {
        shift_samples(v, cells, self.problem.boundary)
    }

    /// `v(−t)` on the grid, continued by the boundary condition.
    pub fn reflected(&self, v: &[T]) -> Vec<T> {
        reflect_samples(v, self.problem.boundary)
    }

    /// `∫ u v dt` on the grid.
    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        dot(u, v) * self.step
    }
}

fn shift_samples<T: Real>(v: &[T], cells: usize, boundary: Boundary) -> Vec<T> {
    let n = v.len();
    (0..n)
        .map(|j| {
            let k = j + cells;
            let wraps = k / n;
            let x = v[k % n];
            if boundary == Boundary::Antiperiodic && wraps % 2 == 1 {
                -x
            } else {
                x
            }
        })
        .collect()
}

fn reflect_samples<T: Real>(v: &[T], boundary: Boundary) -> Vec<T> {
    let n = v.len();
    let s: T = boundary.wrap_sign();
    (0..n).map(|j| if j == 0 { v[0] } else { s * v[n - j] }).collect()
}

fn quotient<T: Real>(m: &CyclicTridiagonal<T>, v: &[T]) -> Result<T> {
    if v.len() != m.len() {
        return Err(Error::DegenerateGrid(format!("{} samples on a {}-point grid", v.len(), m.len())));
    }
    let vv = dot(v, v);
    if !(vv > T::zero()) {
        return Err(Error::ZeroFunction);
    }
    Ok(m.quadratic_form(v) / vv)
}

/// Rayleigh quotient `∫(p v′² + V v²) / ∫ v²` of grid samples `v`
/// (uniform on `[0, period)`), in the same flux form as [`eigen`].
pub fn rayleigh<T: Real>(prob: &SLProblem<T>, v: &[T]) -> Result<T> {
    if v.iter().all(|x| *x == T::zero()) {
        return Err(Error::ZeroFunction);
    }
    quotient(&discretize(prob, v.len())?.matrix, v)
}

/// Cyclic sign changes of `v`; samples below `1e−9·max|v|` count as zero
/// and are skipped. Antiperiodic functions change sign once more across
/// the seam when `v(t0⁻)` and `v(0)` agree in sign.
pub fn count_sign_changes<T: Real>(v: &[T], boundary: Boundary) -> usize {
    let max = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let thr = max * T::lit(1e-9);
    let signs: Vec<bool> = v.iter().filter(|x| x.abs() > thr).map(|x| *x > T::zero()).collect();
    if signs.is_empty() {
        return 0;
    }
    let mut count = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let first = signs[0];
    let wrapped = match boundary {
        Boundary::Periodic => first,
        Boundary::Antiperiodic => !first,
    };
    if *signs.last().unwrap() != wrapped {
        count += 1;
    }
    count
}

/// The `count` lowest eigenpairs on `grid_size` uniform cells.
pub fn eigen<T: Real>(prob: &SLProblem<T>, count: usize, grid_size: usize) -> Result<SLSpectrum<T>> {
    if grid_size < 64 {
        return Err(Error::DegenerateGrid(format!("grid size {grid_size} below 64")));
    }
    if count == 0 {
        return Err(Error::DegenerateGrid("requested zero eigenpairs".into()));
    }
    let disc = discretize(prob, grid_size)?;
    solve(prob, disc, count)
}

/// Every eigenpair below `lambda_cut`, plus the first one at or above it.
pub fn eigen_below<T: Real>(prob: &SLProblem<T>, lambda_cut: T, grid_size: usize) -> Result<SLSpectrum<T>> {
    if grid_size < 64 {
        return Err(Error::DegenerateGrid(format!("grid size {grid_size} below 64")));
    }
    let disc = discretize(prob, grid_size)?;
    let count = disc.matrix.count_below(lambda_cut) + 1;
    solve(prob, disc, count)
}

fn solve<T: Real>(prob: &SLProblem<T>, disc: Discretization<T>, count: usize) -> Result<SLSpectrum<T>> {
    let (values, mut vectors) = disc.matrix.smallest_eigenpairs(count)?;
    let (lo, hi) = disc.matrix.gershgorin();
    let scale = lo.abs().max(hi.abs());

    // Within numerically degenerate groups, diagonalise the reflection
    // t ↦ −t so each basis vector is even or odd about t = 0.
    let degenerate = T::lit(1e-10) * scale;
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= degenerate {
            end += 1;
        }
        if end - start > 1 {
            let block = &vectors[start..end];
            let images: Vec<Vec<T>> = block.iter().map(|v| reflect_samples(v, prob.boundary)).collect();
            let m = end - start;
            let mut r = DenseSymmetric::zeros(m);
            for i in 0..m {
                for j in 0..=i {
                    let x = (dot(&block[i], &images[j]) + dot(&block[j], &images[i])) * T::half();
                    r.set(i, j, x);
                    r.set(j, i, x);
                }
            }
            let (_, z) = r.eigen();
            // odd vectors (reflection eigenvalue −1) first, even last
            let rotated: Vec<Vec<T>> = (0..m).map(|k| combine(block, |i| z.get(i, k))).collect();
            for (slot, v) in vectors[start..end].iter_mut().zip(rotated) {
                *slot = v;
            }
        }
        start = end;
    }

    let norm = disc.step.sqrt();
    for v in vectors.iter_mut() {
        let nv = dot(v, v).sqrt() * norm;
        let max = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let pivot = v.iter().find(|x| x.abs() > T::lit(1e-3) * max).copied().unwrap_or(T::one());
        let s = if pivot < T::zero() { -T::one() } else { T::one() };
        for x in v.iter_mut() {
            *x = *x * s / nv;
        }
    }
    let zero_counts: Vec<usize> = vectors.iter().map(|v| count_sign_changes(v, prob.boundary)).collect();
    let labels = oscillation_labels(&zero_counts, prob.boundary);
    Ok(SLSpectrum {
        problem: prob.clone(),
        grid: disc.grid,
        step: disc.step,
        eigenvalues: values,
        eigenfunctions: vectors,
        zero_counts,
        labels,
        matrix: disc.matrix,
    })
}

/// Labels by zero count first (a count `z` owns the indices whose ladder
/// value is `z`), then by eigenvalue order within a count.
fn oscillation_labels(zero_counts: &[usize], boundary: Boundary) -> Vec<usize> {
    let base = match boundary {
        Boundary::Periodic => 0,
        Boundary::Antiperiodic => 1,
    };
    let mut used = std::collections::HashMap::<usize, usize>::new();
    zero_counts
        .iter()
        .enumerate()
        .map(|(pos, &z)| {
            let first = match boundary {
                Boundary::Periodic if z == 0 => Some(0),
                Boundary::Periodic if z % 2 == 0 => Some(z - 1),
                Boundary::Antiperiodic if z % 2 == 1 => Some(z - 1),
                _ => None,
            };
            match first {
                Some(f) => {
                    let k = used.entry(z).or_insert(0);
                    *k += 1;
                    f + *k - 1 + base
                }
                // a count that oscillation theory forbids: keep the position
                None => pos + base,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubperiodTag {
    /// `h(t + t0/n) = h(t)`
    PeriodicT0OverN,
    /// `h(t + t0/(2n)) = −h(t)`
    AntiperiodicT0Over2n,
    Neither,
}

/// Relative tolerance for the symmetry tests of eigenfunctions; the
/// discrete operator commutes with the shifts exactly, so only solver
/// error enters.
const SYMMETRY_TOL: f64 = 1e-6;

/// Tags each eigenfunction by its behaviour under the shifts `t0/(2n)` and
/// `t0/n`. The coefficients must have period `t0/n`.
pub fn classify_subperiod<T: Real>(spec: &SLSpectrum<T>, n: usize) -> Result<Vec<SubperiodTag>> {
    let size = spec.grid_size();
    if n == 0 || !size.is_multiple_of(n) {
        return Err(Error::DegenerateGrid(format!("grid size {size} is not divisible by n = {n}")));
    }
    let probe = size.max(256);
    let dev = spec.problem.subperiod_deviation(n, probe);
    if dev > T::lit(1e-10) {
        return Err(Error::SubperiodViolation { n, deviation: dev.to_f64_lossy() });
    }
    let half_ok = size.is_multiple_of(2 * n) && spec.problem.subperiod_deviation(2 * n, probe) <= T::lit(1e-10);
    let tol = T::lit(SYMMETRY_TOL);
    Ok(spec
        .eigenfunctions
        .iter()
        .map(|v| {
            let max = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            let close = |w: &[T], sign: T| v.iter().zip(w).all(|(a, b)| (*b - sign * *a).abs() <= tol * max);
            if half_ok && close(&spec.shifted(v, size / (2 * n)), -T::one()) {
                SubperiodTag::AntiperiodicT0Over2n
            } else if close(&spec.shifted(v, size / n), T::one()) {
                SubperiodTag::PeriodicT0OverN
            } else {
                SubperiodTag::Neither
            }
        })
        .collect())
}

/// Number of eigenfunctions in `range` (a union of whole eigenspaces)
/// satisfying `h(t + shift) = sign·h(t)`, computed basis-independently as
/// `(m + sign·tr(Vᵀ S V)) / 2` for the involution `S`.
pub fn count_symmetric<T: Real>(spec: &SLSpectrum<T>, range: std::ops::Range<usize>, cells: usize, sign: T) -> usize {
    let m = range.len();
    let mut trace = T::zero();
    for v in &spec.eigenfunctions[range] {
        trace += spec.inner(v, &spec.shifted(v, cells));
    }
    let kept = (T::from_usize_lossy(m) + sign * trace) * T::half();
    kept.round().to_usize().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn constant(boundary: Boundary) -> SLProblem<f64> {
        SLProblem::new(2.0 * PI, Arc::new(|_| 1.0), Arc::new(|_| 0.0), boundary)
    }

    #[test]
    fn fourier_modes() {
        let s = eigen(&constant(Boundary::Periodic), 7, 256).unwrap();
        let exact = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0];
        for (v, e) in s.eigenvalues.iter().zip(exact) {
            assert_abs_diff_eq!(*v, e, epsilon = 5e-3);
        }
        assert!(s.ladder_violations(7).is_empty(), "{:?}", s.zero_counts);
        assert_eq!(s.labels, vec![0, 1, 2, 3, 4, 5, 6]);

        let s = eigen(&constant(Boundary::Antiperiodic), 4, 256).unwrap();
        for (v, e) in s.eigenvalues.iter().zip([0.25, 0.25, 2.25, 2.25]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-3);
        }
        assert_eq!(s.zero_counts, vec![1, 1, 3, 3]);
        assert_eq!(s.labels, vec![1, 2, 3, 4]);
    }

    #[test]
    fn degenerate_pairs_split_into_even_and_odd() {
        let s = eigen(&constant(Boundary::Periodic), 5, 128).unwrap();
        for k in [1, 3] {
            let odd = &s.eigenfunctions[k];
            let even = &s.eigenfunctions[k + 1];
            let r_odd = s.reflected(odd);
            let r_even = s.reflected(even);
            for j in 0..128 {
                assert_abs_diff_eq!(r_odd[j], -odd[j], epsilon = 1e-9);
                assert_abs_diff_eq!(r_even[j], even[j], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn rayleigh_quotients() {
        let prob = constant(Boundary::Periodic);
        let s = eigen(&prob, 3, 128).unwrap();
        assert_abs_diff_eq!(rayleigh(&prob, &s.eigenfunctions[2]).unwrap(), s.eigenvalues[2], epsilon = 1e-10);
        assert_abs_diff_eq!(rayleigh(&prob, &vec![3.0; 128]).unwrap(), 0.0, epsilon = 1e-12);
        assert!(matches!(rayleigh(&prob, &vec![0.0; 128]), Err(Error::ZeroFunction)));
    }

    #[test]
    fn subperiod_tags_of_fourier_modes() {
        let s = eigen(&constant(Boundary::Periodic), 5, 128).unwrap();
        let tags = classify_subperiod(&s, 2).unwrap();
        // n = 2: cos 2t, sin 2t flip sign under t ↦ t + π/2; cos t, sin t
        // are neither π-periodic nor π/2-antiperiodic
        assert_eq!(tags[0], SubperiodTag::PeriodicT0OverN);
        assert_eq!(tags[1], SubperiodTag::Neither);
        assert_eq!(tags[3], SubperiodTag::AntiperiodicT0Over2n);
        let tags = classify_subperiod(&s, 1).unwrap();
        assert_eq!(tags[1], SubperiodTag::AntiperiodicT0Over2n);
        assert_eq!(tags[3], SubperiodTag::PeriodicT0OverN);
        assert_eq!(count_symmetric(&s, 1..3, 64, -1.0), 2);
        assert_eq!(count_symmetric(&s, 3..5, 64, 1.0), 2);

        let bumpy = SLProblem::new(2.0 * PI, Arc::new(|t: f64| 2.0 + t.cos()), Arc::new(|_| 0.0), Boundary::Periodic);
        let s = eigen(&bumpy, 3, 128).unwrap();
        assert!(matches!(classify_subperiod(&s, 2), Err(Error::SubperiodViolation { .. })));
    }

    #[test]
    fn sign_change_counting() {
        let v = [1.0, 0.0, -1.0, -2.0, 1e-12, 3.0];
        assert_eq!(count_sign_changes(&v, Boundary::Periodic), 2);
        let w = [1.0, 2.0, 1.0];
        assert_eq!(count_sign_changes(&w, Boundary::Antiperiodic), 1);
    }
}
