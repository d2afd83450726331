//! Low Laplace–Beltrami spectrum of the bipolar torus.
//!
//! Separating `f(α, t) = h(t)·cos lα` (and `h(t)·sin lα` for `l ≥ 1`) turns
//! the Laplacian into the periodic problems
//! `−(4π² cos²φ h′)′ + l²/cos²φ · h = λ h` on `[0, t0)`; each eigenfunction
//! with `l ≥ 1` contributes two torus eigenfunctions. For even `q` the torus
//! is the quotient of the parameter domain by `(α, t) ↦ (α + π, t + t0/2)`,
//! which keeps exactly the modes with `h(t + t0/2) = (−1)^l h(t)`.
//!
//! The coordinate functions of the immersion are eigenfunctions with
//! eigenvalue exactly 2; their discrete counterparts sit within the grid
//! error of 2 on either side. Such modes are identified by matching against
//! the known functions and recorded at the exact value, so the strict count
//! `N(2)` never depends on which side of 2 the discretisation lands.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesic::{i2, profile, solve_rotation, GeodesicProfile, OtsukiSolution, RotationNumber};
use crate::immersion::area;
use crate::linalg::{dot, orthonormalize};
use crate::scalar::Real;
use crate::sturm::{
    build_problem, classify_subperiod, count_symmetric, eigen_below, Boundary, SLSpectrum, SubperiodTag,
};

/// Similarity (squared projection onto the known λ = 2 functions) above
/// which a mode near 2 is taken to be one of them.
const MATCH_TOL: f64 = 1e-6;

/// Relative gap below which neighbouring eigenvalues form one cluster.
const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KeepReason {
    /// Odd `q`: the parameter domain is the torus itself.
    OddQ,
    /// Even `q`: `h(t + t0/2) = (−1)^l h(t)`, so the mode descends.
    Invariant,
    /// Even `q`: the mode changes sign under the identification.
    NotInvariant,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeEntry<T> {
    pub l: u32,
    /// Position in the sorted spectrum of the `l`-problem.
    pub index: usize,
    /// Discrete eigenvalue on the working grid.
    pub lambda: T,
    /// Richardson extrapolation from the working and doubled grids.
    pub lambda_extrapolated: T,
    /// Exact value when the mode is identified analytically.
    pub exact: Option<T>,
    /// 1 for `l = 0`, 2 otherwise.
    pub multiplicity: usize,
    pub kept: bool,
    pub reason: KeepReason,
    pub zero_count: usize,
    /// Matched against a coordinate function of the immersion.
    pub threshold: bool,
}

impl<T: Real> ModeEntry<T> {
    /// The value used for counting: exact if known, extrapolated otherwise.
    pub fn value(&self) -> T {
        self.exact.unwrap_or(self.lambda_extrapolated)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeTable<T> {
    pub rotation: RotationNumber,
    pub grid_size: usize,
    pub l_max: u32,
    pub lambda_cut: T,
    /// Discretisation error estimate: twice the largest change of any
    /// tabulated eigenvalue under grid doubling.
    pub epsilon_grid: T,
    /// Lowest eigenvalue `λ₀(l)` for `l = 0..=l_max` on the working grid.
    pub ground: Vec<T>,
    /// Sorted by [`ModeEntry::value`].
    pub entries: Vec<ModeEntry<T>>,
    /// `N(2)` recomputed from the doubled grid alone.
    pub n2_refined: usize,
}

impl<T: Real> ModeTable<T> {
    pub fn kept(&self) -> impl Iterator<Item = &ModeEntry<T>> {
        self.entries.iter().filter(|e| e.kept)
    }

    /// Kept non-threshold torus eigenfunctions with `l` in `ls` and value
    /// strictly below `lambda`.
    pub fn count_below(&self, ls: std::ops::RangeInclusive<u32>, lambda: T) -> usize {
        self.kept().filter(|e| ls.contains(&e.l) && e.value() < lambda).map(|e| e.multiplicity).sum()
    }

    pub fn entry(&self, l: u32, index: usize) -> Option<&ModeEntry<T>> {
        self.entries.iter().find(|e| e.l == l && e.index == index)
    }

    /// Sorted indices of threshold-matched modes of the `l`-problem.
    pub fn threshold_indices(&self, l: u32) -> Vec<usize> {
        let mut v: Vec<usize> = self.entries.iter().filter(|e| e.l == l && e.threshold).map(|e| e.index).collect();
        v.sort_unstable();
        v
    }
}

/// `N(λ) = #{i : λ_i < λ}` counted with multiplicity, including `λ₀ = 0`.
pub fn weyl_n<T: Real>(table: &ModeTable<T>, lambda: T) -> usize {
    table.count_below(0..=table.l_max, lambda)
}

/// Working SL grid: at least the profile's sample count, rounded up to a
/// multiple of `4q` so the shifts by `t0/2` and `t0/4` are whole cells.
pub fn sl_grid_size(requested: usize, q: u32) -> usize {
    let m = 4 * q as usize;
    requested.max(64).div_ceil(m) * m
}

struct Census<T> {
    spectra: Vec<SLSpectrum<T>>,
}

fn spectra_at<T: Real>(profile: &GeodesicProfile<T>, l_max: u32, cut: T, n: usize) -> Result<Census<T>> {
    let spectra = (0..=l_max)
        .map(|l| eigen_below(&build_problem(profile, l, Boundary::Periodic), cut, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(Census { spectra })
}

/// Coordinate functions of the immersion that separate with wave number
/// `l`, sampled on `grid` and orthonormalised.
fn known_modes<T: Real>(profile: &GeodesicProfile<T>, l: u32, grid: &[T]) -> Result<Vec<Vec<T>>> {
    let states: Vec<_> = grid.iter().map(|&t| profile.bipolar.state(t)).collect();
    let mut out = match l {
        0 => vec![states.iter().map(|s| s.phi.sin()).collect::<Vec<T>>()],
        1 => vec![
            states.iter().map(|s| s.phi.cos() * s.theta.sin()).collect(),
            states.iter().map(|s| s.phi.cos() * s.theta.cos()).collect(),
        ],
        _ => return Ok(Vec::new()),
    };
    orthonormalize(&mut out)?;
    Ok(out)
}

fn clusters<T: Real>(values: &[T]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split =
            i == values.len() || values[i] - values[i - 1] > T::lit(CLUSTER_TOL) * values[i].abs().max(T::one());
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Entries of one grid's census, before extrapolation.
fn entries<T: Real>(profile: &GeodesicProfile<T>, census: &Census<T>, cut: T, window: T) -> Result<Vec<ModeEntry<T>>> {
    let even_q = profile.solution.rotation.q_is_even();
    let mut out = Vec::new();
    for spec in &census.spectra {
        let l = spec.problem.l;
        let n = spec.grid_size();
        let known = known_modes(profile, l, &spec.grid)?;
        let kept = if even_q { even_q_filter(spec)? } else { vec![true; spec.len()] };
        for (i, &lam) in spec.eigenvalues.iter().enumerate() {
            let near_two = (lam - T::two()).abs() <= window;
            if lam >= cut && !near_two {
                continue;
            }
            let threshold = near_two && {
                let h = &spec.eigenfunctions[i];
                let hn = dot(h, h).sqrt();
                let sim: T = known.iter().map(|g| crate::scalar::sq(dot(h, g) / hn)).sum();
                sim > T::one() - T::lit(MATCH_TOL)
            };
            debug_assert_eq!(spec.grid.len(), n);
            out.push(ModeEntry {
                l,
                index: i,
                lambda: lam,
                lambda_extrapolated: lam,
                // the constant function is the ground state of l = 0
                exact: if threshold {
                    Some(T::two())
                } else if l == 0 && i == 0 {
                    Some(T::zero())
                } else {
                    None
                },
                multiplicity: if l == 0 { 1 } else { 2 },
                kept: kept[i],
                reason: match (even_q, kept[i]) {
                    (false, _) => KeepReason::OddQ,
                    (true, true) => KeepReason::Invariant,
                    (true, false) => KeepReason::NotInvariant,
                },
                zero_count: spec.zero_counts[i],
                threshold,
            });
        }
    }
    Ok(out)
}

/// Per-mode flags for the even-`q` identification. Each cluster keeps
/// exactly as many modes as the basis-independent trace count; the shift
/// tags choose which ones when the basis is already adapted.
fn even_q_filter<T: Real>(spec: &SLSpectrum<T>) -> Result<Vec<bool>> {
    let l = spec.problem.l;
    let n = spec.grid_size();
    let (tags, wanted): (Vec<SubperiodTag>, fn(SubperiodTag) -> bool) = if l.is_multiple_of(2) {
        (classify_subperiod(spec, 2)?, |t| t != SubperiodTag::Neither)
    } else {
        (classify_subperiod(spec, 1)?, |t| t == SubperiodTag::AntiperiodicT0Over2n)
    };
    let sign = if l.is_multiple_of(2) { T::one() } else { -T::one() };
    let mut kept = vec![false; spec.len()];
    for range in clusters(&spec.eigenvalues) {
        let target = count_symmetric(spec, range.clone(), n / 2, sign);
        let tagged: Vec<usize> = range.clone().filter(|&i| wanted(tags[i])).collect();
        let chosen: Vec<usize> = if tagged.len() == target { tagged } else { range.clone().take(target).collect() };
        for i in chosen {
            kept[i] = true;
        }
    }
    Ok(kept)
}

fn n2_of<T: Real>(entries: &[ModeEntry<T>]) -> usize {
    entries.iter().filter(|e| e.kept && e.exact.unwrap_or(e.lambda) < T::two()).map(|e| e.multiplicity).sum()
}

/// Assembles all modes below `lambda_cut` for `l = 0..=l_max`, plus the
/// threshold modes at 2, on the profile's grid (rounded by
/// [`sl_grid_size`]) and on the doubled grid for the error estimate.
pub fn assemble<T: Real>(profile: &GeodesicProfile<T>, l_max: u32, lambda_cut: T) -> Result<ModeTable<T>> {
    if !(lambda_cut >= T::two()) {
        return Err(crate::error::domain("assemble", "lambda_cut must be at least 2"));
    }
    if l_max < 2 {
        return Err(crate::error::domain("assemble", "l_max must be at least 2"));
    }
    let sol = &profile.solution;
    let n = sl_grid_size(profile.samples_per_period(), sol.rotation.q());
    let coarse = spectra_at(profile, l_max, lambda_cut, n)?;
    let ground: Vec<T> = coarse.spectra.iter().map(|s| s.eigenvalues[0]).collect();
    let top = ground[l_max as usize];
    if top < lambda_cut {
        return Err(Error::InsufficientLMax {
            l_max: l_max as usize,
            lambda0: top.to_f64_lossy(),
            cut: lambda_cut.to_f64_lossy(),
        });
    }
    let fine = spectra_at(profile, l_max, lambda_cut, 2 * n)?;

    let mut eps = T::zero();
    for (c, f) in coarse.spectra.iter().zip(&fine.spectra) {
        for (a, b) in c.eigenvalues.iter().zip(&f.eigenvalues) {
            if *a < lambda_cut {
                eps = eps.max((*a - *b).abs());
            }
        }
    }
    let eps = T::two() * eps.max(T::epsilon());

    let mut rows = entries(profile, &coarse, lambda_cut, eps)?;
    let refined = entries(profile, &fine, lambda_cut, eps)?;
    for e in rows.iter_mut() {
        if let Some(f) = fine.spectra[e.l as usize].eigenvalues.get(e.index) {
            // O(h²) error: (4·λ_{2N} − λ_N)/3
            e.lambda_extrapolated = (T::lit(4.0) * *f - e.lambda) / T::lit(3.0);
        }
    }
    rows.sort_by(|a, b| a.value().partial_cmp(&b.value()).unwrap_or(std::cmp::Ordering::Equal).then(a.l.cmp(&b.l)));
    Ok(ModeTable {
        rotation: sol.rotation,
        grid_size: n,
        l_max,
        lambda_cut,
        epsilon_grid: eps,
        ground,
        entries: rows,
        n2_refined: n2_of(&refined),
    })
}

/// `Λ = λ·area` at the eigenvalue `λ = 2` of the coordinate functions.
pub fn lambda_functional<T: Real>(sol: &OtsukiSolution<T>) -> T {
    T::two() * area(sol)
}

/// The same value from the closed form `8qπ I₂(b)` (odd `q`) or
/// `4qπ I₂(b)` (even `q`).
pub fn lambda_functional_closed_form<T: Real>(sol: &OtsukiSolution<T>) -> Result<T> {
    let q = T::lit(f64::from(sol.rotation.q()));
    let k = if sol.rotation.q_is_even() { T::lit(4.0) } else { T::lit(8.0) };
    Ok(k * q * T::PI() * i2(sol.b)?)
}

/// `4√2 qπ²` (odd `q`) or `2√2 qπ²` (even `q`): the closed form with
/// `I₂` replaced by its supremum `I₂(0) = π/√2`.
pub fn upper_bound<T: Real>(r: RotationNumber) -> T {
    let q = T::lit(f64::from(r.q()));
    let k = if r.q_is_even() { T::two() } else { T::lit(4.0) };
    k * T::SQRT_2() * q * T::PI() * T::PI()
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumConfig<T> {
    /// Requested SL grid size; rounded up by [`sl_grid_size`].
    pub grid_size: usize,
    pub l_max: u32,
    pub lambda_cut: T,
}

impl<T: Real> Default for SpectrumConfig<T> {
    fn default() -> Self {
        Self { grid_size: 2048, l_max: 3, lambda_cut: T::lit(2.5) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate<T> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    /// Positive when the inequality holds; `−|lhs − rhs|` for equalities.
    pub margin: T,
    pub pass: bool,
}

impl<T: Real> Certificate<T> {
    /// `lhs < rhs`
    pub fn less(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        Self { name: name.into(), lhs, rhs, margin: rhs - lhs, pass: lhs < rhs }
    }

    /// `lhs = rhs`, for integer-valued quantities.
    pub fn equal(name: impl Into<String>, lhs: usize, rhs: usize) -> Self {
        let (l, r) = (T::from_usize_lossy(lhs), T::from_usize_lossy(rhs));
        Self { name: name.into(), lhs: l, rhs: r, margin: T::zero() - (l - r).abs(), pass: lhs == rhs }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport<T> {
    pub p: u32,
    pub q: u32,
    pub a: T,
    pub b: T,
    pub t0: T,
    #[serde(rename = "N2")]
    pub n2: usize,
    #[serde(rename = "N2_expected")]
    pub n2_expected: usize,
    pub lambda_functional: T,
    pub upper_bound: T,
    pub certificates: Vec<Certificate<T>>,
    #[serde(skip)]
    pub solution: OtsukiSolution<T>,
    #[serde(skip)]
    pub table: ModeTable<T>,
}

impl<T: Real> VerificationReport<T> {
    pub fn pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Certificate<T>> {
        self.certificates.iter().find(|c| !c.pass)
    }
}

/// Solves, samples, assembles and evaluates every certificate; never fails
/// on a violated certificate.
pub fn index_report<T: Real>(r: RotationNumber, config: &SpectrumConfig<T>) -> Result<VerificationReport<T>> {
    let sol = solve_rotation::<T>(r)?;
    let q = r.q() as usize;
    let p = r.p() as usize;
    let n = sl_grid_size(config.grid_size, r.q());
    let prof = profile(&sol, n / (2 * q))?;
    let table = assemble(&prof, config.l_max, config.lambda_cut)?;
    Ok(report_from(&sol, table, p, q))
}

fn report_from<T: Real>(sol: &OtsukiSolution<T>, table: ModeTable<T>, p: usize, q: usize) -> VerificationReport<T> {
    let r = sol.rotation;
    let even = r.q_is_even();
    let eps = table.epsilon_grid;
    let two = T::two();
    let n2 = weyl_n(&table, two);
    let expected = r.expected_n2();
    let lam = lambda_functional(sol);
    let bound = upper_bound::<T>(r);
    let mut certs = vec![Certificate::equal("N(2) = N2_expected", n2, expected)];
    certs.push(Certificate::equal("N(2) on doubled grid = N(2)", table.n2_refined, n2));

    let (l0_expected, l1_expected) = if even { (q, 2 * (p - 1)) } else { (2 * q, 2 * (2 * p - 1)) };
    certs.push(Certificate::equal("kept l=0 modes below 2", table.count_below(0..=0, two), l0_expected));
    certs.push(Certificate::equal(
        "kept l=1 modes below 2 (with multiplicity)",
        table.count_below(1..=1, two),
        l1_expected,
    ));
    certs.push(Certificate::equal("kept l>=2 modes at or below 2", table.count_below(2..=table.l_max, two + eps), 0));

    let missing = T::infinity();
    let below = table.entry(0, 2 * q - 1).map(|e| e.lambda).unwrap_or(missing);
    certs.push(Certificate::less("lambda_{2q-1}(0) < 2 - eps_grid", below, two - eps));
    let at = table.entry(0, 2 * q).map(|e| (e.lambda - two).abs()).unwrap_or(missing);
    certs.push(Certificate::less("|lambda_{2q}(0) - 2| < eps_grid", at, eps));
    certs.push(Certificate::equal("l=0 threshold mode index", index_code(&table.threshold_indices(0)), 2 * q));
    let pair = [2 * p - 1, 2 * p]
        .iter()
        .map(|&i| table.entry(1, i).map(|e| (e.lambda - two).abs()).unwrap_or(missing))
        .fold(T::zero(), T::max);
    certs.push(Certificate::less("|lambda_{2p-1,2p}(1) - 2| < eps_grid", pair, eps));
    certs.push(Certificate::equal(
        "l=1 threshold mode indices (first of pair)",
        index_code(&pair_start(&table.threshold_indices(1))),
        2 * p - 1,
    ));
    let g2 = table.ground.get(2).copied().unwrap_or(missing);
    certs.push(Certificate::less("2 < lambda_0(2)", two, g2));
    certs.push(Certificate::less("4 - eps_grid < lambda_0(2)", T::lit(4.0) - eps, g2));

    certs.push(Certificate::less("Lambda < upper bound", lam, bound));
    let closed = lambda_functional_closed_form(sol).unwrap_or(T::nan());
    certs.push(Certificate::less("|Lambda(area) - Lambda(I2)|", (lam - closed).abs(), T::lit(1e-8)));
    let quad = T::two() * T::from_usize_lossy(2 * q) * sol.bipolar_curve().map(|c| c.half_period()).unwrap_or(T::nan())
        / if even { T::two() } else { T::one() };
    certs.push(Certificate::less("|Lambda(area) - Lambda(quadrature)|", (lam - quad).abs(), T::lit(1e-8)));

    VerificationReport {
        p: r.p(),
        q: r.q(),
        a: sol.a,
        b: sol.b,
        t0: sol.t0,
        n2,
        n2_expected: expected,
        lambda_functional: lam,
        upper_bound: bound,
        certificates: certs,
        solution: *sol,
        table,
    }
}

/// The single index in `v`, or `usize::MAX` when there is not exactly one.
fn index_code(v: &[usize]) -> usize {
    if v.len() == 1 {
        v[0]
    } else {
        usize::MAX
    }
}

/// `[i, i + 1]` ↦ `[i]`; anything else ↦ empty.
fn pair_start(v: &[usize]) -> Vec<usize> {
    if v.len() == 2 && v[1] == v[0] + 1 {
        vec![v[0]]
    } else {
        Vec::new()
    }
}

/// Runs the full pipeline and fails with the first violated certificate.
pub fn verify_theorem3<T: Real>(r: RotationNumber, config: &SpectrumConfig<T>) -> Result<VerificationReport<T>> {
    let rep = index_report(r, config)?;
    if let Some(c) = rep.first_failure() {
        return Err(Error::VerificationFailed(format!(
            "{}: lhs = {}, rhs = {}",
            c.name,
            c.lhs.to_f64_lossy(),
            c.rhs.to_f64_lossy()
        )));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rounding() {
        assert_eq!(sl_grid_size(2048, 5), 2060);
        assert_eq!(sl_grid_size(2048, 8), 2048);
        assert_eq!(sl_grid_size(10, 3), 72);
    }

    #[test]
    fn three_fifths_theorem() {
        let rep = index_report::<f64>(RotationNumber::new(3, 5).unwrap(), &SpectrumConfig::default()).unwrap();
        for c in &rep.certificates {
            assert!(c.pass, "{c:?}");
        }
        assert_eq!(rep.n2, 20);
        assert_eq!(weyl_n(&rep.table, 0.0), 0);
        assert_eq!(weyl_n(&rep.table, 1e-9), 1);
    }

    #[test]
    fn five_eighths_theorem() {
        let rep = index_report::<f64>(RotationNumber::new(5, 8).unwrap(), &SpectrumConfig::default()).unwrap();
        for c in &rep.certificates {
            assert!(c.pass, "{c:?}");
        }
        assert_eq!(rep.n2, 16);
    }
}
