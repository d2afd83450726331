//! Brute-force cross-check: the Laplacian of the bipolar torus discretised
//! directly on the `(α, t)` parameter grid, without separating variables.
//!
//! The operator `−(1/cos²φ) ∂²_α − ∂_t(4π² cos²φ ∂_t)` is self-adjoint for
//! the uniform measure `dα dt`. It is discretised through its quadratic form
//!
//! ```text
//! Σ_ij [ (δ_α f)² / cos²φ_j  +  4π² cos²φ_{j+½} (D_t f)²_{j+½} ] Δα Δt
//! ```
//!
//! with the centred second-order difference `δ_α` and the staggered
//! fourth-order difference `D_t f_{j+½} = (f_{j−1} − 27f_j + 27f_{j+1} − f_{j+2}) / 24Δt`,
//! so the matrix is symmetric positive semidefinite by construction. The
//! `t` direction carries the stiffness `4π²` and fast rotation of `θ` near
//! the turning points, hence the higher order there.
//!
//! Eigenvalues come from block Lanczos on `(A − σ)⁻¹` over the whole grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesic::GeodesicProfile;
use crate::immersion::bipolar_from_angles;
use crate::linalg::{combine, dot, DenseSymmetric};
use crate::scalar::{sq, Real};
use crate::spectrum::ModeTable;

/// Reach of the `t` stencil of `D_tᵀ K D_t`.
const STENCIL: usize = 3;
const STAGGERED: [f64; 4] = [1.0 / 24.0, -27.0 / 24.0, 27.0 / 24.0, -1.0 / 24.0];

/// Uniform periodic grid on `[0, 2π) × [0, t0)`, stored `t`-major.
#[derive(Debug, Clone)]
pub struct TorusGrid<T> {
    pub n_alpha: usize,
    pub n_t: usize,
    pub t0: T,
    pub d_alpha: T,
    pub d_t: T,
    /// `cos²φ(t_j)`
    pub cos2_node: Vec<T>,
    /// `cos²φ(t_j + Δt/2)`
    pub cos2_mid: Vec<T>,
    pub even_q: bool,
}

impl<T: Real> TorusGrid<T> {
    pub fn new(profile: &GeodesicProfile<T>, n_alpha: usize, n_t: usize) -> Result<Self> {
        if n_alpha < 32 || n_t < 32 || !n_alpha.is_multiple_of(2) || !n_t.is_multiple_of(2) {
            return Err(Error::DegenerateGrid(format!(
                "torus grid {n_alpha} x {n_t}: both sizes must be even and at least 32"
            )));
        }
        let t0 = profile.t0();
        let d_t = t0 / T::from_usize_lossy(n_t);
        let at = |x: T| profile.bipolar.cos2_phi(x);
        Ok(Self {
            n_alpha,
            n_t,
            t0,
            d_alpha: T::two() * T::PI() / T::from_usize_lossy(n_alpha),
            d_t,
            cos2_node: (0..n_t).map(|j| at(d_t * T::from_usize_lossy(j))).collect(),
            cos2_mid: (0..n_t).map(|j| at(d_t * (T::from_usize_lossy(j) + T::half()))).collect(),
            even_q: profile.solution.rotation.q_is_even(),
        })
    }

    pub fn len(&self) -> usize {
        self.n_alpha * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i_alpha: usize, j_t: usize) -> usize {
        j_t * self.n_alpha + i_alpha
    }

    pub fn alpha(&self, i: usize) -> T {
        self.d_alpha * T::from_usize_lossy(i)
    }

    pub fn t(&self, j: usize) -> T {
        self.d_t * T::from_usize_lossy(j)
    }

    /// Samples `f(α, t)` at every node.
    pub fn sample(&self, f: impl Fn(T, T) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n_t {
            for i in 0..self.n_alpha {
                out.push(f(self.alpha(i), self.t(j)));
            }
        }
        out
    }

    /// Rows of `D_tᵀ K D_t` as `(column, value)` lists.
    fn t_stiffness(&self) -> Vec<Vec<(usize, T)>> {
        let nt = self.n_t;
        let mut dense = vec![[T::zero(); 2 * STENCIL + 1]; nt];
        let k0 = T::lit(4.0) * sq(T::PI()) / sq(self.d_t);
        for m in 0..nt {
            let k = k0 * self.cos2_mid[m];
            for (r, dr) in STAGGERED.iter().enumerate() {
                for (c, dc) in STAGGERED.iter().enumerate() {
                    // rows m−1+r, columns m−1+c
                    let row = (m + nt + r - 1) % nt;
                    dense[row][STENCIL + c - r] += k * T::lit(dr * dc);
                }
            }
        }
        dense
            .iter()
            .enumerate()
            .map(|(j, band)| band.iter().enumerate().map(|(o, v)| ((j + nt + o - STENCIL) % nt, *v)).collect())
            .collect()
    }

    /// `A f`.
    pub fn apply(&self, f: &[T]) -> Vec<T> {
        let (na, nt) = (self.n_alpha, self.n_t);
        let stiffness = self.t_stiffness();
        let mut out = vec![T::zero(); f.len()];
        for j in 0..nt {
            let ka = T::one() / (self.cos2_node[j] * sq(self.d_alpha));
            for i in 0..na {
                let (ip, im) = ((i + 1) % na, (i + na - 1) % na);
                let c = f[self.index(i, j)];
                let lap_a = f[self.index(ip, j)] - T::two() * c + f[self.index(im, j)];
                let lap_t: T = stiffness[j].iter().map(|&(jj, v)| v * f[self.index(i, jj)]).sum();
                out[self.index(i, j)] = lap_t - ka * lap_a;
            }
        }
        out
    }

    /// The deck transformation `(α, t) ↦ (α + π, t + t0/2)` on grid samples.
    pub fn deck(&self, f: &[T]) -> Vec<T> {
        let (ha, ht) = (self.n_alpha / 2, self.n_t / 2);
        let mut out = vec![T::zero(); f.len()];
        for j in 0..self.n_t {
            for i in 0..self.n_alpha {
                out[self.index(i, j)] = f[self.index((i + ha) % self.n_alpha, (j + ht) % self.n_t)];
            }
        }
        out
    }

    /// The five coordinate functions of the immersion on this grid.
    pub fn coordinates(&self, profile: &GeodesicProfile<T>) -> [Vec<T>; 5] {
        let states: Vec<_> = (0..self.n_t).map(|j| profile.bipolar.state(self.t(j))).collect();
        std::array::from_fn(|k| {
            let mut out = Vec::with_capacity(self.len());
            for st in &states {
                for i in 0..self.n_alpha {
                    out.push(bipolar_from_angles(self.alpha(i), st.phi, st.theta)[k]);
                }
            }
            out
        })
    }
}

/// `max_k ‖A x_k − 2 x_k‖∞ / ‖x_k‖∞` over the coordinate functions `x_k`.
pub fn theorem2_residual<T: Real>(profile: &GeodesicProfile<T>, grid: &TorusGrid<T>) -> T {
    grid.coordinates(profile)
        .iter()
        .map(|f| {
            let af = grid.apply(f);
            let num = af.iter().zip(f).fold(T::zero(), |m, (a, x)| m.max((*a - T::two() * *x).abs()));
            let den = f.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            num / den
        })
        .fold(T::zero(), T::max)
}

// ---------------------------------------------------------------------------
// direct solver for A − σ

/// Small square row-major block.
#[derive(Clone)]
struct Mat<T> {
    n: usize,
    a: Vec<T>,
}

impl<T: Real> Mat<T> {
    fn zeros(n: usize) -> Self {
        Self { n, a: vec![T::zero(); n * n] }
    }

    fn at(&self, i: usize, j: usize) -> T {
        self.a[i * self.n + j]
    }

    fn add(&mut self, i: usize, j: usize, v: T) {
        self.a[i * self.n + j] += v;
    }

    fn transpose(&self) -> Self {
        let mut t = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.a[j * self.n + i] = self.at(i, j);
            }
        }
        t
    }

    fn mul(&self, b: &Self) -> Self {
        let n = self.n;
        let mut c = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.at(i, k);
                for j in 0..n {
                    c.a[i * n + j] += x * b.at(k, j);
                }
            }
        }
        c
    }

    fn sub_assign(&mut self, b: &Self) {
        for (x, y) in self.a.iter_mut().zip(&b.a) {
            *x -= *y;
        }
    }

    /// `L⁻¹` for the Cholesky factor `L` of `self`.
    fn cholesky_inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut l = Mat::zeros(n);
        for j in 0..n {
            let mut d = self.at(j, j);
            for k in 0..j {
                d -= sq(l.at(j, k));
            }
            if !(d > T::zero()) {
                return Err(Error::ConvergenceFailure(format!(
                    "shifted operator is not positive definite (pivot {})",
                    d.to_f64_lossy()
                )));
            }
            let d = d.sqrt();
            l.a[j * n + j] = d;
            for i in j + 1..n {
                let mut s = self.at(i, j);
                for k in 0..j {
                    s -= l.at(i, k) * l.at(j, k);
                }
                l.a[i * n + j] = s / d;
            }
        }
        let mut m = Mat::zeros(n);
        for c in 0..n {
            m.a[c * n + c] = T::one() / l.at(c, c);
            for i in c + 1..n {
                let mut s = T::zero();
                for k in c..i {
                    s += l.at(i, k) * m.at(k, c);
                }
                m.a[i * n + c] = -s / l.at(i, i);
            }
        }
        Ok(m)
    }

    fn mul_vec(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.a[i * self.n..(i + 1) * self.n], x);
        }
    }
}

/// Cholesky factor of a symmetric positive definite matrix that is
/// block-tridiagonal with a cyclic corner: `D_j` on the diagonal,
/// `A_{j+1,j} = E_j` below it and `A_{0,n−1} = E_{n−1}`.
///
/// Stores `M_j = L_jj⁻¹`, `L_{j+1,j} = E_j M_jᵀ` and the last block row
/// `W_j = L_{n−1,j}` filled in by the corner.
struct CyclicBlockCholesky<T> {
    d: usize,
    inv_diag: Vec<Mat<T>>,
    lower: Vec<Mat<T>>,
    border: Vec<Mat<T>>,
}

impl<T: Real> CyclicBlockCholesky<T> {
    fn new(diag: Vec<Mat<T>>, sub: Vec<Mat<T>>) -> Result<Self> {
        let nb = diag.len();
        let d = diag[0].n;
        if nb == 1 {
            return Ok(Self { d, inv_diag: vec![diag[0].cholesky_inverse()?], lower: vec![], border: vec![] });
        }
        debug_assert!(nb >= 3 && sub.len() == nb);
        let last = nb - 1;
        let mut inv_diag: Vec<Mat<T>> = Vec::with_capacity(nb);
        let mut lower: Vec<Mat<T>> = Vec::with_capacity(last);
        let mut border: Vec<Mat<T>> = Vec::with_capacity(last);
        let mut s = diag[0].clone();
        for j in 0..last {
            let m = s.cholesky_inverse()?;
            let mt = m.transpose();
            // A_{n−1,j} − W_{j−1} L_{j,j−1}ᵀ
            let mut x = Mat::zeros(d);
            if j == 0 {
                x = sub[last].transpose();
            }
            if j == last - 1 {
                for (a, b) in x.a.iter_mut().zip(&sub[j].a) {
                    *a += *b;
                }
            }
            if j > 0 {
                x.sub_assign(&border[j - 1].mul(&lower[j - 1].transpose()));
            }
            border.push(x.mul(&mt));
            let l = sub[j].mul(&mt);
            if j + 1 < last {
                let mut next = diag[j + 1].clone();
                next.sub_assign(&l.mul(&l.transpose()));
                s = next;
            }
            lower.push(l);
            inv_diag.push(m);
        }
        let mut s_last = diag[last].clone();
        for w in &border {
            s_last.sub_assign(&w.mul(&w.transpose()));
        }
        inv_diag.push(s_last.cholesky_inverse()?);
        Ok(Self { d, inv_diag, lower, border })
    }

    fn solve(&self, x: &mut [T]) {
        let d = self.d;
        let nb = self.inv_diag.len();
        let mut tmp = vec![T::zero(); d];
        let mut prod = vec![T::zero(); d];
        if nb == 1 {
            tmp.copy_from_slice(x);
            self.inv_diag[0].mul_vec(&tmp, x);
            self.inv_diag[0].transpose().mul_vec(x, &mut tmp);
            x.copy_from_slice(&tmp);
            return;
        }
        let last = nb - 1;
        let blk = |j: usize| j * d..(j + 1) * d;
        let mut y = vec![T::zero(); x.len()];
        for j in 0..last {
            tmp.copy_from_slice(&x[blk(j)]);
            if j > 0 {
                self.lower[j - 1].mul_vec(&y[blk(j - 1)], &mut prod);
                tmp.iter_mut().zip(&prod).for_each(|(t, p)| *t -= *p);
            }
            self.inv_diag[j].mul_vec(&tmp, &mut y[blk(j)]);
        }
        tmp.copy_from_slice(&x[blk(last)]);
        for j in 0..last {
            self.border[j].mul_vec(&y[blk(j)], &mut prod);
            tmp.iter_mut().zip(&prod).for_each(|(t, p)| *t -= *p);
        }
        self.inv_diag[last].mul_vec(&tmp, &mut y[blk(last)]);

        let tr_vec = |m: &Mat<T>, v: &[T], out: &mut [T]| {
            out.iter_mut().for_each(|o| *o = T::zero());
            for (k, vk) in v.iter().enumerate() {
                for (o, r) in out.iter_mut().zip(&m.a[k * d..(k + 1) * d]) {
                    *o += *vk * *r;
                }
            }
        };
        tr_vec(&self.inv_diag[last], &y[blk(last)], &mut x[blk(last)]);
        let x_last = x[blk(last)].to_vec();
        for j in (0..last).rev() {
            tmp.copy_from_slice(&y[blk(j)]);
            tr_vec(&self.border[j], &x_last, &mut prod);
            tmp.iter_mut().zip(&prod).for_each(|(t, p)| *t -= *p);
            if j + 1 < last {
                tr_vec(&self.lower[j], &x[blk(j + 1)], &mut prod);
                tmp.iter_mut().zip(&prod).for_each(|(t, p)| *t -= *p);
            }
            tr_vec(&self.inv_diag[j], &tmp, &mut x[blk(j)]);
        }
    }
}

/// Orthonormal real Fourier basis on the `α` circle: the eigenvectors of
/// the periodic second difference, with eigenvalues `4 sin²(mΔα/2)/Δα²`.
fn fourier_basis<T: Real>(n: usize, d_alpha: T) -> (Vec<Vec<T>>, Vec<T>) {
    let nn = T::from_usize_lossy(n);
    let mut basis = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    let eig = |m: usize| T::lit(4.0) * sq((T::from_usize_lossy(m) * d_alpha * T::half()).sin()) / sq(d_alpha);
    let wave = |m: usize, f: fn(T) -> T, scale: T| -> Vec<T> {
        (0..n).map(|i| scale * f(T::from_usize_lossy(m * i) * d_alpha)).collect()
    };
    basis.push(vec![T::one() / nn.sqrt(); n]);
    mu.push(T::zero());
    let s2 = (T::two() / nn).sqrt();
    for m in 1..n / 2 {
        basis.push(wave(m, T::cos, s2));
        basis.push(wave(m, T::sin, s2));
        mu.push(eig(m));
        mu.push(eig(m));
    }
    basis.push(wave(n / 2, T::cos, T::one() / nn.sqrt()));
    mu.push(eig(n / 2));
    (basis, mu)
}

/// `(A − σ)⁻¹`: the `α`-coefficient of `A` depends on `t` only, so the
/// Fourier basis in `α` splits `A − σ` exactly into `n_alpha` cyclic banded
/// systems in `t`.
struct ShiftInvert<T> {
    n_alpha: usize,
    n_t: usize,
    basis: Vec<Vec<T>>,
    factors: Vec<CyclicBlockCholesky<T>>,
}

impl<T: Real> ShiftInvert<T> {
    fn new(grid: &TorusGrid<T>, sigma: T) -> Result<Self> {
        let (basis, mu) = fourier_basis(grid.n_alpha, grid.d_alpha);
        let nt = grid.n_t;
        // smallest block size covering the stencil that tiles the cycle
        // into at least three blocks; else one dense block
        let d = (STENCIL..=nt / 3).find(|d| nt.is_multiple_of(*d)).unwrap_or(nt);
        let nb = nt / d;
        let stiffness = grid.t_stiffness();
        let factors = mu
            .iter()
            .map(|&m| {
                let mut diag = vec![Mat::zeros(d); nb];
                let mut sub = vec![Mat::zeros(d); nb];
                let mut put = |r: usize, c: usize, v: T| {
                    let (br, bc) = (r / d, c / d);
                    if br == bc {
                        diag[br].add(r % d, c % d, v);
                    } else if bc == (br + nb - 1) % nb && (nb > 1) {
                        sub[bc].add(r % d, c % d, v);
                    }
                };
                for (r, row) in stiffness.iter().enumerate() {
                    for &(c, v) in row {
                        put(r, c, v);
                    }
                    put(r, r, m / grid.cos2_node[r] - sigma);
                }
                CyclicBlockCholesky::new(diag, sub)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_alpha: grid.n_alpha, n_t: nt, basis, factors })
    }

    fn solve(&self, x: &mut [T]) {
        let (na, nt) = (self.n_alpha, self.n_t);
        let mut coeff = vec![vec![T::zero(); nt]; na];
        for j in 0..nt {
            let row = &x[j * na..(j + 1) * na];
            for (k, b) in self.basis.iter().enumerate() {
                coeff[k][j] = dot(b, row);
            }
        }
        for (c, f) in coeff.iter_mut().zip(&self.factors) {
            f.solve(c);
        }
        for j in 0..nt {
            let row = &mut x[j * na..(j + 1) * na];
            row.iter_mut().for_each(|v| *v = T::zero());
            for (k, b) in self.basis.iter().enumerate() {
                let c = coeff[k][j];
                row.iter_mut().zip(b).for_each(|(v, bv)| *v += c * *bv);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// block Lanczos

const BLOCK: usize = 8;
const SHIFT: f64 = -0.5;
const MAX_KRYLOV: usize = 480;

/// Orthogonalises `w` against `basis` (two passes) and returns the norm
/// left over.
fn orthogonalize<T: Real>(w: &mut [T], basis: &[Vec<T>]) -> T {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            for (x, y) in w.iter_mut().zip(q) {
                *x -= c * *y;
            }
        }
    }
    dot(w, w).sqrt()
}

/// One classical Gram–Schmidt pass of a block against `basis`, reading each
/// basis vector once; returns the coefficients `⟨basis_r, w_b⟩`.
fn block_project<T: Real>(ws: &mut [Vec<T>], basis: &[Vec<T>]) -> Vec<Vec<T>> {
    basis
        .iter()
        .map(|qr| {
            let c: Vec<T> = ws.iter().map(|w| dot(qr, w)).collect();
            for (w, cb) in ws.iter_mut().zip(&c) {
                w.iter_mut().zip(qr).for_each(|(x, y)| *x -= *cb * *y);
            }
            c
        })
        .collect()
}

/// Eigenpairs of `A` below `cut`, in ascending order.
///
/// Rayleigh–Ritz on a block Krylov space of `(A − σ)⁻¹` with full
/// reorthogonalisation. Converged once the Ritz values below the cut and
/// the first one above it have settled and every wanted pair has a small
/// true residual.
fn lanczos<T: Real>(grid: &TorusGrid<T>, cut: T) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let sigma = T::lit(SHIFT);
    let factor = ShiftInvert::new(grid, sigma)?;
    let n = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d0f0_b1a5);
    let mut fresh = |basis: &[Vec<T>]| -> Result<Vec<T>> {
        for _ in 0..8 {
            let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.random::<f64>() - 0.5)).collect();
            let nv = orthogonalize(&mut v, basis);
            if nv > T::lit(1e-8) {
                v.iter_mut().for_each(|x| *x /= nv);
                return Ok(v);
            }
        }
        Err(Error::ConvergenceFailure("could not extend the Krylov basis".into()))
    };

    let mut q: Vec<Vec<T>> = Vec::new();
    for _ in 0..BLOCK {
        let v = fresh(&q)?;
        q.push(v);
    }
    let mut h: Vec<Vec<T>> = Vec::new();
    let theta_cut = T::one() / (cut - sigma);
    let mut start = 0;
    let mut previous: Vec<T> = Vec::new();
    loop {
        let end = q.len();
        let mut block: Vec<Vec<T>> = q[start..end].to_vec();
        for w in block.iter_mut() {
            factor.solve(w);
        }
        let scale: Vec<T> = block.iter().map(|w| dot(w, w).sqrt()).collect();
        // first-pass coefficients are the projected matrix entries
        let coeffs = block_project(&mut block, &q);
        for (b, c) in (start..end).enumerate() {
            for (r, row) in coeffs.iter().enumerate() {
                set_sym(&mut h, r, c, row[b]);
            }
        }
        block_project(&mut block, &q);
        for (b, mut w) in block.into_iter().enumerate() {
            let nw = orthogonalize(&mut w, &q[end..]);
            let v = if nw > T::lit(1e-10) * scale[b] {
                w.iter_mut().for_each(|x| *x /= nw);
                w
            } else {
                fresh(&q)?
            };
            q.push(v);
        }
        start = end;

        let k = end;
        let exhausted = q.len() > MAX_KRYLOV;
        if !(k >= 4 * BLOCK && (k / BLOCK).is_multiple_of(2) || exhausted) {
            continue;
        }
        let mut t = DenseSymmetric::zeros(k);
        for i in 0..k {
            for j in 0..k {
                t.set(i, j, h[i][j]);
            }
        }
        let (vals, vecs) = t.eigen();
        // Jacobi returns ascending Ritz values of the inverse: the wanted
        // ones are at the top, followed by the first one past the cut
        let wanted: Vec<usize> = (0..k).filter(|&i| vals[i] > theta_cut).collect();
        let watch: Vec<T> = (k.saturating_sub(wanted.len() + 1)..k).map(|i| vals[i]).collect();
        let settled = previous.len() == watch.len()
            && watch.iter().zip(&previous).all(|(a, b)| (*a - *b).abs() <= T::lit(1e-12) * *a);
        previous = watch;
        if settled {
            let vectors: Vec<Vec<T>> = wanted.iter().map(|&i| combine(&q[..k], |r| vecs.get(r, i))).collect();
            let converged = wanted.iter().zip(&vectors).all(|(&i, x)| {
                let mut ox = x.clone();
                factor.solve(&mut ox);
                let res = ox.iter().zip(x).map(|(a, b)| sq(*a - vals[i] * *b)).sum::<T>().sqrt();
                res <= T::lit(1e-9) * vals[i]
            });
            if converged {
                let mut pairs: Vec<(T, Vec<T>)> = wanted
                    .iter()
                    .zip(vectors)
                    .map(|(&i, mut x)| {
                        let nx = dot(&x, &x).sqrt();
                        x.iter_mut().for_each(|v| *v /= nx);
                        (sigma + T::one() / vals[i], x)
                    })
                    .collect();
                pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
                return Ok(pairs.into_iter().unzip());
            }
        }
        if exhausted {
            return Err(Error::ConvergenceFailure(format!("block Lanczos did not converge in {k} vectors")));
        }
    }
}

fn set_sym<T: Real>(h: &mut Vec<Vec<T>>, r: usize, c: usize, v: T) {
    let need = r.max(c) + 1;
    if h.len() < need {
        for row in h.iter_mut() {
            row.resize(need, T::zero());
        }
        h.resize(need, vec![T::zero(); need]);
    }
    h[r][c] = v;
    h[c][r] = v;
}

// ---------------------------------------------------------------------------
// spectrum

/// Grid points per swing of `φ` below which the oracle's `t` direction
/// no longer resolves the `2q`-zero modes near the threshold.
pub const MIN_POINTS_PER_SWING: usize = 8;

/// Default oracle resolution.
pub const DEFAULT_N_ALPHA: usize = 96;
pub const DEFAULT_N_T: usize = 768;

/// A warning when an `n_t` grid puts fewer than [`MIN_POINTS_PER_SWING`]
/// points on each of the `2q` swings of `φ`.
pub fn resolution_warning(q: u32, n_t: usize) -> Option<String> {
    let swings = 2 * q as usize;
    (n_t < MIN_POINTS_PER_SWING * swings).then(|| {
        format!(
            "n_t = {n_t} gives {:.1} points per swing of phi (2q = {swings} swings); modes near 2 are unresolved, \
             use n_t >= {}",
            n_t as f64 / swings as f64,
            MIN_POINTS_PER_SWING * swings
        )
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleMode<T> {
    pub lambda: T,
    /// Survives the even-`q` identification (always true for odd `q`).
    pub kept: bool,
    /// Lies in the span of the immersion's coordinate functions.
    pub threshold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSpectrum<T> {
    pub n_alpha: usize,
    pub n_t: usize,
    pub lambda_cut: T,
    /// Richardson estimate of the discretisation error, from the same
    /// problem on the half-resolution grid.
    pub epsilon_grid: T,
    pub modes: Vec<OracleMode<T>>,
}

impl<T: Real> OracleSpectrum<T> {
    /// Kept, non-threshold eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: T) -> usize {
        self.modes.iter().filter(|m| m.kept && !m.threshold && m.lambda < lambda).count()
    }

    pub fn threshold_multiplicity(&self) -> usize {
        self.modes.iter().filter(|m| m.kept && m.threshold).count()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.modes.iter().map(|m| m.lambda).fold(T::infinity(), T::min)
    }

    pub fn kept_values_below(&self, lambda: T) -> Vec<T> {
        self.modes.iter().filter(|m| m.kept && !m.threshold && m.lambda < lambda).map(|m| m.lambda).collect()
    }
}

fn clusters<T: Real>(values: &[T], tol: T) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol * values[i].abs().max(T::one()) {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Marks the `count` entries of `range` with the largest `score`.
fn mark_top<T: Real>(range: std::ops::Range<usize>, score: &[T], count: usize, flags: &mut [bool]) {
    let mut idx: Vec<usize> = range.collect();
    idx.sort_by(|a, b| score[*b].partial_cmp(&score[*a]).unwrap_or(std::cmp::Ordering::Equal));
    for i in idx.into_iter().take(count) {
        flags[i] = true;
    }
}

/// Every eigenvalue of the discrete Laplacian below `lambda_cut`, with the
/// even-`q` identification and the coordinate-function modes marked.
///
/// Both classifications are basis-independent: within each cluster of
/// (numerically) equal eigenvalues the number of kept modes is
/// `(m + tr P_deck)/2` and the number of threshold modes is
/// `tr P_coord`, the trace of the projector onto the coordinate span.
pub fn dense_spectrum<T: Real>(
    profile: &GeodesicProfile<T>,
    grid: &TorusGrid<T>,
    lambda_cut: T,
) -> Result<OracleSpectrum<T>> {
    let (values, vectors) = lanczos(grid, lambda_cut)?;
    let m = values.len();

    let mut kept = vec![!grid.even_q; m];
    if grid.even_q {
        let score: Vec<T> = vectors.iter().map(|v| dot(v, &grid.deck(v))).collect();
        for r in clusters(&values, T::lit(1e-6)) {
            let tr: T = r.clone().map(|i| score[i]).sum();
            let count = ((T::from_usize_lossy(r.len()) + tr) * T::half()).round().to_usize().unwrap_or(0);
            mark_top(r, &score, count, &mut kept);
        }
    }

    let mut coords: Vec<Vec<T>> = grid.coordinates(profile).into_iter().collect();
    crate::linalg::orthonormalize(&mut coords)?;
    let sim: Vec<T> = vectors.iter().map(|v| coords.iter().map(|g| sq(dot(v, g))).sum()).collect();
    let mut threshold = vec![false; m];
    // the coordinate modes sit in one group around 2; grid error and
    // neighbouring modes may split it into several clusters
    let near: Vec<usize> = (0..m).filter(|&i| (values[i] - T::two()).abs() < T::lit(0.25)).collect();
    if let (Some(&lo), Some(&hi)) = (near.first(), near.last()) {
        let tr: T = (lo..=hi).map(|i| sim[i]).sum();
        let count = tr.round().to_usize().unwrap_or(0);
        mark_top(lo..hi + 1, &sim, count, &mut threshold);
    }

    let epsilon_grid = if grid.n_alpha >= 64 && grid.n_t >= 64 {
        let coarse = TorusGrid::new(profile, grid.n_alpha / 2, grid.n_t / 2)?;
        let (cv, _) = lanczos(&coarse, lambda_cut)?;
        values.iter().zip(&cv).map(|(a, b)| (*a - *b).abs() / T::lit(3.0)).fold(T::zero(), T::max)
    } else {
        T::nan()
    };

    Ok(OracleSpectrum {
        n_alpha: grid.n_alpha,
        n_t: grid.n_t,
        lambda_cut,
        epsilon_grid,
        modes: (0..m).map(|i| OracleMode { lambda: values[i], kept: kept[i], threshold: threshold[i] }).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck<T> {
    /// Kept non-threshold modes below 2 in the assembled table, with
    /// multiplicity.
    pub table_count: usize,
    pub oracle_count: usize,
    pub max_pair_difference: T,
    pub tolerance: T,
    pub threshold_multiplicity: usize,
    pub min_eigenvalue: T,
    pub counts_agree: bool,
    pub pairwise_pass: bool,
    pub pass: bool,
}

/// Compares the kept modes below 2 of the separated assembly with the
/// brute-force spectrum, pairwise in sorted order, to
/// `max(2 ε_grid, floor)`.
pub fn cross_check<T: Real>(table: &ModeTable<T>, oracle: &OracleSpectrum<T>, floor: T) -> CrossCheck<T> {
    let two = T::two();
    let mut expanded: Vec<T> = Vec::new();
    for e in table.kept().filter(|e| !e.threshold && e.value() < two) {
        expanded.extend(std::iter::repeat_n(e.value(), e.multiplicity));
    }
    expanded.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let found = oracle.kept_values_below(two);
    let diff = expanded.iter().zip(&found).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
    let eps = if oracle.epsilon_grid.is_finite() { oracle.epsilon_grid } else { T::zero() };
    let tolerance = (T::two() * eps).max(floor);
    let counts_agree = expanded.len() == found.len();
    let pairwise_pass = counts_agree && diff <= tolerance;
    CrossCheck {
        table_count: expanded.len(),
        oracle_count: found.len(),
        max_pair_difference: diff,
        tolerance,
        threshold_multiplicity: oracle.threshold_multiplicity(),
        min_eigenvalue: oracle.min_eigenvalue(),
        counts_agree,
        pairwise_pass,
        pass: pairwise_pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::{profile, solve_rotation, RotationNumber};

    fn small() -> (GeodesicProfile<f64>, TorusGrid<f64>) {
        let sol = solve_rotation(RotationNumber::new(3, 5).unwrap()).unwrap();
        let pr = profile(&sol, 16).unwrap();
        let g = TorusGrid::new(&pr, 32, 40).unwrap();
        (pr, g)
    }

    fn solve_error(g: &TorusGrid<f64>) -> f64 {
        let f = ShiftInvert::new(g, -0.5).unwrap();
        let x: Vec<f64> = (0..g.len()).map(|k| ((k * 7919) % 113) as f64 / 113.0 - 0.4).collect();
        let mut b = g.apply(&x);
        for (bv, xv) in b.iter_mut().zip(&x) {
            *bv += 0.5 * xv;
        }
        f.solve(&mut b);
        b.iter().zip(&x).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn shift_invert_solves_the_shifted_system() {
        let (pr, g) = small();
        assert!(solve_error(&g) < 1e-9);
        // 34 = 2·17 has no divisor giving three blocks: one dense block
        let g = TorusGrid::new(&pr, 32, 34).unwrap();
        assert!(solve_error(&g) < 1e-9);
    }

    #[test]
    fn fourier_basis_is_orthonormal() {
        let (basis, mu) = fourier_basis::<f64>(32, std::f64::consts::PI / 16.0);
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - want).abs() < 1e-12);
            }
        }
        assert_eq!(mu[0], 0.0);
        assert!(mu.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn operator_is_symmetric_and_kills_constants() {
        let (_, g) = small();
        let u: Vec<f64> = (0..g.len()).map(|k| ((k * 31) % 17) as f64).collect();
        let v: Vec<f64> = (0..g.len()).map(|k| ((k * 13) % 23) as f64).collect();
        let (a, b) = (dot(&g.apply(&u), &v), dot(&u, &g.apply(&v)));
        assert!((a - b).abs() < 1e-9 * a.abs());
        let ones = vec![1.0; g.len()];
        assert!(g.apply(&ones).iter().all(|x| x.abs() < 1e-9));
    }
}
