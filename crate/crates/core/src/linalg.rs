//! Small dense and cyclic-tridiagonal symmetric eigensolvers.
//!
//! The periodic Sturm–Liouville discretisation is a symmetric tridiagonal
//! matrix with one extra pair of corner entries. Its low eigenvalues are
//! found by bisection on the inertia of `A − σI`. Folding the ring (index
//! `k` paired with `n − 1 − k`) turns it into a chain of 2×2 blocks, so a
//! block `LDLᵀ` gives the inertia without any long-range fill; the same
//! factorisation drives block inverse iteration for the eigenvectors.

use crate::error::{Error, Result};
use crate::scalar::{sq, Real};

/// Symmetric matrix with `diag[i]` on the diagonal and `off[i]` coupling
/// `i` and `(i + 1) mod n`. The entry `off[n − 1]` is the corner coupling.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

/// Symmetric 2×2 block `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy)]
struct Sym2<T> {
    a: T,
    b: T,
    c: T,
}

impl<T: Real> Sym2<T> {
    fn det(self) -> T {
        self.a * self.c - self.b * self.b
    }

    fn negatives(self) -> usize {
        let d = self.det();
        if d < T::zero() {
            1
        } else if d > T::zero() {
            if self.a + self.c < T::zero() {
                2
            } else {
                0
            }
        } else {
            usize::from(self.a + self.c < T::zero())
        }
    }

    fn mul(self, x: [T; 2]) -> [T; 2] {
        [self.a * x[0] + self.b * x[1], self.b * x[0] + self.c * x[1]]
    }
}

/// Block `LDLᵀ` of `A − σI` in the folded ordering, storing the inverses
/// of the block pivots.
struct FoldedFactor<T> {
    inv: Vec<Sym2<T>>,
    negatives: usize,
}

impl<T: Real> CyclicTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.len() < 4 || !diag.len().is_multiple_of(2) || diag.len() != off.len() {
            return Err(Error::DegenerateGrid(format!(
                "cyclic tridiagonal needs an even size n >= 4 and matching lengths (got {} and {})",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let r = self.off[i].abs() + self.off[(i + n - 1) % n].abs();
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> T {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(T::min_positive_value())
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                self.diag[i] * x[i] + self.off[i] * x[(i + 1) % n] + self.off[(i + n - 1) % n] * x[(i + n - 1) % n]
            })
            .collect()
    }

    /// `xᵀ A x`, accumulated edge by edge so that positive semidefinite
    /// parts stay non-negative under round-off.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let n = self.len();
        let mut s = T::zero();
        for i in 0..n {
            s += self.diag[i] * sq(x[i]) + T::two() * self.off[i] * x[i] * x[(i + 1) % n];
        }
        s
    }

    /// Folding pairs index `k` with `n − 1 − k`; the ring then becomes a
    /// chain of 2×2 blocks with diagonal couplings and no wraparound.
    fn block(&self, k: usize, sigma: T) -> Sym2<T> {
        let n = self.len();
        let m = n / 2;
        let (i, j) = (k, n - 1 - k);
        let b = if k == 0 {
            self.off[n - 1]
        } else if k == m - 1 {
            self.off[m - 1]
        } else {
            T::zero()
        };
        Sym2 { a: self.diag[i] - sigma, b, c: self.diag[j] - sigma }
    }

    /// Couplings between block `k − 1` and block `k`.
    fn coupling(&self, k: usize) -> [T; 2] {
        let n = self.len();
        [self.off[k - 1], self.off[n - 1 - k]]
    }

    fn factor(&self, sigma: T) -> FoldedFactor<T> {
        let m = self.len() / 2;
        let tiny = sq(T::epsilon() * self.norm_bound());
        let mut inv = Vec::with_capacity(m);
        let mut negatives = 0;
        let mut prev: Option<Sym2<T>> = None;
        for k in 0..m {
            let mut s = self.block(k, sigma);
            if let Some(p) = prev {
                let [c1, c2] = self.coupling(k);
                s.a -= c1 * c1 * p.a;
                s.b -= c1 * c2 * p.b;
                s.c -= c2 * c2 * p.c;
            }
            negatives += s.negatives();
            let mut d = s.det();
            if d.abs() < tiny {
                d = if d < T::zero() { -tiny } else { tiny };
            }
            let si = Sym2 { a: s.c / d, b: -s.b / d, c: s.a / d };
            inv.push(si);
            prev = Some(si);
        }
        FoldedFactor { inv, negatives }
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia).
    pub fn count_below(&self, sigma: T) -> usize {
        self.factor(sigma).negatives
    }

    /// Solves `(A − σI) x = rhs` in place.
    fn solve_factored(&self, f: &FoldedFactor<T>, x: &mut [T]) {
        let n = self.len();
        let m = n / 2;
        let mut y: Vec<[T; 2]> = (0..m).map(|k| [x[k], x[n - 1 - k]]).collect();
        for k in 1..m {
            let [c1, c2] = self.coupling(k);
            let z = f.inv[k - 1].mul(y[k - 1]);
            y[k][0] -= c1 * z[0];
            y[k][1] -= c2 * z[1];
        }
        let mut next = f.inv[m - 1].mul(y[m - 1]);
        x[m - 1] = next[0];
        x[n - m] = next[1];
        for k in (0..m - 1).rev() {
            let [c1, c2] = self.coupling(k + 1);
            let r = [y[k][0] - c1 * next[0], y[k][1] - c2 * next[1]];
            next = f.inv[k].mul(r);
            x[k] = next[0];
            x[n - 1 - k] = next[1];
        }
    }

    /// The `count` smallest eigenvalues, by bisection to full precision.
    pub fn smallest_eigenvalues(&self, count: usize) -> Vec<T> {
        let (glo, ghi) = self.gershgorin();
        let scale = self.norm_bound();
        let mut out = Vec::with_capacity(count);
        let mut lo_prev = glo;
        for k in 0..count.min(self.len()) {
            let (mut lo, mut hi) = (lo_prev, ghi);
            // invariant: count_below(lo) <= k < count_below(hi)
            for _ in 0..200 {
                let mid = (lo + hi) * T::half();
                if hi - lo <= T::epsilon() * T::two() * scale || mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let lam = (lo + hi) * T::half();
            out.push(lam);
            lo_prev = lo;
        }
        out
    }

    /// The `count` smallest eigenpairs. Eigenvectors are orthonormal in the
    /// Euclidean inner product; clusters are resolved by block inverse
    /// iteration followed by Rayleigh–Ritz.
    pub fn smallest_eigenpairs(&self, count: usize) -> Result<(Vec<T>, Vec<Vec<T>>)> {
        let n = self.len();
        let count = count.min(n);
        let scale = self.norm_bound();
        let cluster_gap = T::lit(1e-8) * scale;
        // enough eigenvalues that the cluster containing the last requested
        // one is followed by a gap, i.e. is complete
        let mut want = (count + 1).min(n);
        let guesses = loop {
            let g = self.smallest_eigenvalues(want);
            let mut end = count;
            while end < g.len() && g[end] - g[end - 1] <= cluster_gap {
                end += 1;
            }
            if end < g.len() || want == n {
                break g;
            }
            want = (2 * want).min(n);
        };

        let mut values = Vec::with_capacity(count);
        let mut vectors: Vec<Vec<T>> = Vec::with_capacity(count);
        let mut start = 0;
        while start < count {
            let mut end = start + 1;
            while end < guesses.len() && guesses[end] - guesses[end - 1] <= cluster_gap {
                end += 1;
            }
            let block = &guesses[start..end];
            let (vals, vecs) = self.resolve_cluster(block, start, scale)?;
            values.extend(vals);
            vectors.extend(vecs);
            start = end;
        }
        values.truncate(count);
        vectors.truncate(count);
        Ok((values, vectors))
    }

    fn resolve_cluster(&self, block: &[T], offset: usize, scale: T) -> Result<(Vec<T>, Vec<Vec<T>>)> {
        let n = self.len();
        let m = block.len();
        let mean = block.iter().copied().sum::<T>() / T::from_usize_lossy(m);
        // shift a hair below the cluster so the factorisation is regular
        let sigma = mean - T::lit(64.0) * T::epsilon() * scale;
        let f = self.factor(sigma);
        let mut x: Vec<Vec<T>> = (0..m).map(|j| start_vector(n, offset + j)).collect();
        orthonormalize(&mut x)?;
        let tol = T::lit(1e3) * T::epsilon() * scale;
        for _ in 0..12 {
            for v in x.iter_mut() {
                self.solve_factored(&f, v);
            }
            orthonormalize(&mut x)?;
            let (vals, vecs) = self.rayleigh_ritz(&x);
            x = vecs;
            let residual = x
                .iter()
                .zip(&vals)
                .map(|(v, &lam)| {
                    let av = self.apply(v);
                    av.iter().zip(v).map(|(a, b)| sq(*a - lam * *b)).sum::<T>().sqrt()
                })
                .fold(T::zero(), T::max);
            if residual <= tol {
                return Ok((vals, x));
            }
        }
        let (vals, vecs) = self.rayleigh_ritz(&x);
        let residual = vecs
            .iter()
            .zip(&vals)
            .map(|(v, &lam)| {
                let av = self.apply(v);
                av.iter().zip(v).map(|(a, b)| sq(*a - lam * *b)).sum::<T>().sqrt()
            })
            .fold(T::zero(), T::max);
        if residual <= T::lit(1e6) * T::epsilon() * scale {
            Ok((vals, vecs))
        } else {
            Err(Error::ConvergenceFailure(format!(
                "inverse iteration near λ = {} stalled with residual {}",
                mean.to_f64_lossy(),
                residual.to_f64_lossy()
            )))
        }
    }

    /// Rayleigh–Ritz on an orthonormal basis: returns Ritz values in
    /// ascending order with their Ritz vectors.
    pub fn rayleigh_ritz(&self, basis: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
        let m = basis.len();
        let images: Vec<Vec<T>> = basis.iter().map(|v| self.apply(v)).collect();
        let mut h = DenseSymmetric::zeros(m);
        for i in 0..m {
            for j in 0..=i {
                let v = dot(&basis[i], &images[j]);
                h.set(i, j, v);
                h.set(j, i, v);
            }
        }
        let (vals, z) = h.eigen();
        let vecs = (0..m).map(|k| combine(basis, |i| z.get(i, k))).collect();
        (vals, vecs)
    }
}

/// Deterministic, well-spread start vector for inverse iteration.
fn start_vector<T: Real>(n: usize, seed: usize) -> Vec<T> {
    let s = (seed + 1) as f64;
    (0..n)
        .map(|i| {
            let x = i as f64;
            T::lit((x * 0.618_033_988_749_894_9 * s + 0.3).sin() + 0.5 * (x * 1.324_717_957_244_746 / s).cos())
        })
        .collect()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `Σ_i c(i) · basis[i]`.
pub fn combine<T: Real>(basis: &[Vec<T>], c: impl Fn(usize) -> T) -> Vec<T> {
    let n = basis.first().map_or(0, Vec::len);
    let mut out = vec![T::zero(); n];
    for (i, v) in basis.iter().enumerate() {
        let ci = c(i);
        for (o, x) in out.iter_mut().zip(v) {
            *o += ci * *x;
        }
    }
    out
}

/// Modified Gram–Schmidt, applied twice for stability.
pub fn orthonormalize<T: Real>(vs: &mut [Vec<T>]) -> Result<()> {
    for _ in 0..2 {
        for i in 0..vs.len() {
            let (done, rest) = vs.split_at_mut(i);
            let v = &mut rest[0];
            for u in done.iter() {
                let c = dot(u, v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * *y;
                }
            }
            let nv = norm(v);
            if !(nv > T::zero()) || !nv.is_finite() {
                return Err(Error::ConvergenceFailure("basis lost rank during orthonormalisation".into()));
            }
            for x in v.iter_mut() {
                *x /= nv;
            }
        }
    }
    Ok(())
}

/// Row-major dense symmetric matrix for small projected problems.
#[derive(Debug, Clone)]
pub struct DenseSymmetric<T> {
    n: usize,
    a: Vec<T>,
}

impl<T: Real> DenseSymmetric<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![T::zero(); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.a[i * self.n + j] = v;
    }

    /// Cyclic Jacobi: eigenvalues ascending, eigenvectors as the columns of
    /// the returned matrix.
    pub fn eigen(&self) -> (Vec<T>, DenseSymmetric<T>) {
        let n = self.n;
        let mut a = self.clone();
        let mut v = DenseSymmetric::zeros(n);
        for i in 0..n {
            v.set(i, i, T::one());
        }
        let total: T = a.a.iter().map(|x| sq(*x)).sum::<T>();
        for _sweep in 0..100 {
            let mut off = T::zero();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off += sq(a.get(i, j));
                    }
                }
            }
            if off <= sq(T::epsilon()) * total || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= T::epsilon() * (a.get(p, p) * a.get(q, q)).abs().sqrt() {
                        // negligible against both pivots: rotating only churns
                        a.set(p, q, T::zero());
                        a.set(q, p, T::zero());
                        continue;
                    }
                    let theta = (a.get(q, q) - a.get(p, p)) / (T::two() * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap_or(std::cmp::Ordering::Equal));
        let vals = order.iter().map(|&i| a.get(i, i)).collect();
        let mut vecs = DenseSymmetric::zeros(n);
        for (new, &old) in order.iter().enumerate() {
            for k in 0..n {
                vecs.set(k, new, v.get(k, old));
            }
        }
        (vals, vecs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn laplacian_ring(n: usize, sign: f64) -> CyclicTridiagonal<f64> {
        let mut off = vec![-1.0; n];
        off[n - 1] = -sign;
        CyclicTridiagonal::new(vec![2.0; n], off).unwrap()
    }

    #[test]
    fn ring_laplacian_eigenvalues() {
        let n = 64;
        let m = laplacian_ring(n, 1.0);
        let vals = m.smallest_eigenvalues(7);
        let mut exact: Vec<f64> =
            (0..n).map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()).collect();
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, e) in vals.iter().zip(&exact) {
            assert_abs_diff_eq!(*v, *e, epsilon = 1e-12);
        }
        // antiperiodic ring: k + 1/2 modes, all doubly degenerate
        let m = laplacian_ring(n, -1.0);
        let vals = m.smallest_eigenvalues(4);
        let e0 = 2.0 - 2.0 * (std::f64::consts::PI / n as f64).cos();
        assert_abs_diff_eq!(vals[0], e0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], e0, epsilon = 1e-12);
    }

    #[test]
    fn eigenpairs_are_orthonormal_with_small_residual() {
        let n = 50usize;
        let diag: Vec<f64> = (0..n).map(|i| 3.0 + (i as f64 * 0.7).sin()).collect();
        let off: Vec<f64> = (0..n).map(|i| -1.0 - 0.3 * (i as f64 * 0.2).cos()).collect();
        let m = CyclicTridiagonal::new(diag, off).unwrap();
        let (vals, vecs) = m.smallest_eigenpairs(10).unwrap();
        for (i, v) in vecs.iter().enumerate() {
            let av = m.apply(v);
            let r: f64 = av.iter().zip(v).map(|(a, b)| (a - vals[i] * b).powi(2)).sum::<f64>().sqrt();
            assert!(r < 1e-10, "residual {r}");
            for (j, u) in vecs.iter().enumerate() {
                assert_abs_diff_eq!(dot(u, v), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn degenerate_pairs_resolve() {
        let m = laplacian_ring(40, 1.0);
        let (vals, vecs) = m.smallest_eigenpairs(5).unwrap();
        assert_abs_diff_eq!(vals[1], vals[2], epsilon = 1e-12);
        assert_abs_diff_eq!(dot(&vecs[1], &vecs[2]), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_small_matrix() {
        let mut a = DenseSymmetric::zeros(3);
        let entries = [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, entries[i][j]);
            }
        }
        let (vals, _) = a.eigen();
        let r2 = 2f64.sqrt();
        assert_abs_diff_eq!(vals[0], 2.0 - r2, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[2], 2.0 + r2, epsilon = 1e-14);
    }
}
