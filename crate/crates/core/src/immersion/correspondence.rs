//! Numerical check that the exterior-product surface and the surface over
//! the S⁴-side geodesic coincide.
//!
//! On the branch of the S⁴-side geodesic where `φ` rises from `0` to `b`
//! the two parameters are related by `dτ/dt = sin⁴ν / (sin⁴ν + c²)` with
//! `τ` the arc length on the S³ side. (Differentiating
//! `sin φ = √(cos²ν sin²ν − c²)/sin ν` along the S³-side geodesic gives
//! `φ̇ cos φ = τ̇ (c² − sin⁴ν)/(2π sin⁴ν)`; there is no `cos ν` factor.) The branch starts at the zero of
//! `sin φ` at `t₁ = 3t0/(4q)`, which corresponds to `τ = 0` (`ν = a`).
//! There the wedge has `θ = π/2` and its `θ` decreases while the profile's
//! increases, so the profile is compared through the reflection
//! `θ ↦ π/2 + θ(t₁) − θ`, an isometry of the orbit space.

use serde::Serialize;

use super::{bipolar_from_angles, wedge_from_state, Point5};
use crate::error::Result;
use crate::geodesic::{nu_squares, BipolarCurve, OtsukiCurve, OtsukiSolution};
use crate::ode::DormandPrince;
use crate::scalar::{sq, Real};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrespondenceReport<T> {
    /// `max |sin φ(t) − 2π ν̇ cos ν sin ν|` along the branch.
    pub profile_residual: T,
    /// Drift of the integrated `τ(t)` and `λ(τ(t))` from the S³-side
    /// geodesic evaluated at the integrated phase.
    pub reparam_residual: T,
    /// `max` over both implicit relations for `θ`.
    pub angle_residual: T,
    /// Symmetric Hausdorff distance of the two sampled surfaces, each point
    /// projected onto the other continuous surface.
    pub hausdorff: T,
    pub samples: usize,
    pub tol: T,
    pub pass: bool,
}

/// Wedge coordinates 2..6 in the order matching `(x, y, z, u, v)`.
fn wedge5<T: Real>(w: [T; 6]) -> Point5<T> {
    [w[1], w[3], w[2], w[4], w[5]]
}

struct Sides<T> {
    bipolar: BipolarCurve<T>,
    otsuki: OtsukiCurve<T>,
    theta_shift: T,
}

impl<T: Real> Sides<T> {
    /// Profile-side surface after the aligning reflection.
    fn profile_point(&self, alpha: T, t: T) -> (Point5<T>, [Point5<T>; 2]) {
        let st = self.bipolar.state(t);
        let th = self.theta_shift - st.theta;
        let x = bipolar_from_angles(alpha, st.phi, th);
        let (sa, ca) = alpha.sin_cos();
        let (sp, cp) = st.phi.sin_cos();
        let (stt, ctt) = th.sin_cos();
        let d_alpha = [-sa * cp * stt, ca * cp * stt, -sa * cp * ctt, ca * cp * ctt, T::zero()];
        let d_phi = [-ca * sp * stt, -sa * sp * stt, -ca * sp * ctt, -sa * sp * ctt, cp];
        let d_theta = [ca * cp * ctt, sa * cp * ctt, -ca * cp * stt, -sa * cp * stt, T::zero()];
        let mut d_t = [T::zero(); 5];
        for i in 0..5 {
            d_t[i] = d_phi[i] * st.phi_dot - d_theta[i] * st.theta_dot;
        }
        (x, [d_alpha, d_t])
    }

    fn wedge_point(&self, alpha: T, s: T) -> (Point5<T>, [Point5<T>; 2]) {
        let eval = |s: T| {
            let o = self.otsuki.state(s);
            wedge5(wedge_from_state(alpha, o.nu, o.lambda, o.nu_dot, o.lambda_dot))
        };
        let x = eval(s);
        let (sa, ca) = alpha.sin_cos();
        // the wedge is (cos α P, sin α P, cos α Q, sin α Q, R)
        let (p, q) = if ca.abs() > sa.abs() { (x[0] / ca, x[2] / ca) } else { (x[1] / sa, x[3] / sa) };
        let d_alpha = [-sa * p, ca * p, -sa * q, ca * q, T::zero()];
        let eps = T::lit(1e-6) * self.otsuki.half_period();
        let (xp, xm) = (eval(s + eps), eval(s - eps));
        let mut d_s = [T::zero(); 5];
        for i in 0..5 {
            d_s[i] = (xp[i] - xm[i]) / (T::two() * eps);
        }
        (x, [d_alpha, d_s])
    }
}

/// Gauss–Newton projection of `target` onto a parametrised surface, with
/// step halving so the distance never increases.
fn project<T: Real>(surface: impl Fn(T, T) -> (Point5<T>, [Point5<T>; 2]), target: &Point5<T>, start: (T, T)) -> T {
    let dist_at = |x: &Point5<T>| (0..5).map(|i| sq(x[i] - target[i])).sum::<T>().sqrt();
    let (mut u, mut v) = start;
    let (mut x, mut jac) = surface(u, v);
    let mut dist = dist_at(&x);
    for _ in 0..40 {
        let [du, dv] = jac;
        let r: Point5<T> = std::array::from_fn(|i| x[i] - target[i]);
        let (a11, a12, a22) = (dot5(&du, &du), dot5(&du, &dv), dot5(&dv, &dv));
        let (g1, g2) = (dot5(&du, &r), dot5(&dv, &r));
        let det = a11 * a22 - a12 * a12;
        if !(det.abs() > T::zero()) {
            break;
        }
        let mut step_u = -(a22 * g1 - a12 * g2) / det;
        let mut step_v = -(a11 * g2 - a12 * g1) / det;
        let mut improved = false;
        for _ in 0..30 {
            let (xn, jn) = surface(u + step_u, v + step_v);
            let dn = dist_at(&xn);
            if dn <= dist {
                u += step_u;
                v += step_v;
                (x, jac, dist) = (xn, jn, dn);
                improved = true;
                break;
            }
            step_u *= T::half();
            step_v *= T::half();
        }
        if !improved || step_u.abs() + step_v.abs() < T::lit(1e-14) {
            break;
        }
    }
    dist
}

fn dot5<T: Real>(a: &Point5<T>, b: &Point5<T>) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Integrates the reparametrisation ODE over one monotone branch and
/// compares both sides of the correspondence; `pass` iff every residual,
/// including the Hausdorff distance, is below `tol`.
pub fn verify_bipolar_correspondence<T: Real>(sol: &OtsukiSolution<T>, tol: T) -> Result<CorrespondenceReport<T>> {
    let bipolar = sol.bipolar_curve()?;
    let otsuki = sol.otsuki_curve()?;
    let a = sol.a;
    let c = sol.c;
    let h = bipolar.half_period();
    let t1 = h * T::lit(1.5);
    let t_end = h * T::two();
    let theta1 = bipolar.state(t1).theta;
    let sides = Sides { bipolar, otsuki, theta_shift: T::FRAC_PI_2() + theta1 };

    // state: (τ, w, λ) with w the phase of the S³-side geodesic
    let rhs = |_t: T, y: &[T; 3]| {
        let (s2, c2) = nu_squares(a, y[1]);
        let sn = s2.sqrt();
        let tau_dot = sq(s2) / (sq(s2) + sq(c));
        let w_dot = tau_dot / (T::PI() * sn);
        let lambda_dot = c / (T::two() * T::PI() * c2 * s2);
        [tau_dot, w_dot, lambda_dot * tau_dot]
    };
    let mut ode = DormandPrince::<T, 3>::new(T::lit(1e-13), T::lit(1e-14));
    let samples = 64;
    let (mut profile_res, mut reparam_res, mut angle_res) = (T::zero(), T::zero(), T::zero());
    let mut y = [T::zero(); 3];
    let mut t_prev = t1;
    for k in 0..=samples {
        let t = t1 + (t_end - t1) * T::from_usize_lossy(k) / T::from_usize_lossy(samples);
        y = ode.integrate(&rhs, t_prev, y, t)?;
        t_prev = t;
        let o = sides.otsuki.state_at_phase(y[0], y[1]);
        reparam_res =
            reparam_res.max((sides.otsuki.arclength_at_phase(y[1]) - y[0]).abs()).max((o.lambda - y[2]).abs());
        let w = wedge5(wedge_from_state(T::zero(), o.nu, o.lambda, o.nu_dot, o.lambda_dot));
        let st = sides.bipolar.state(t);
        let th = sides.theta_shift - st.theta;
        let cp = st.phi.cos();
        profile_res = profile_res.max((st.phi.sin() - w[4]).abs());
        angle_res = angle_res.max((cp * th.sin() - w[0]).abs()).max((cp * th.cos() - w[2]).abs());
    }

    let hausdorff = hausdorff(&sides, sol)?;
    let pass = profile_res < tol && reparam_res < tol && angle_res < tol && hausdorff < tol;
    Ok(CorrespondenceReport {
        profile_residual: profile_res,
        reparam_residual: reparam_res,
        angle_residual: angle_res,
        hausdorff,
        samples: samples + 1,
        tol,
        pass,
    })
}

/// Parameters along `[0, len)` at which successive points of `curve` are
/// between `chord/4` and `chord` apart.
fn chord_params<T: Real>(curve: impl Fn(T) -> Point5<T>, len: T, chord: T) -> Vec<T> {
    let dist = |a: &Point5<T>, b: &Point5<T>| (0..5).map(|i| sq(a[i] - b[i])).sum::<T>().sqrt();
    let mut out = vec![T::zero()];
    let (mut s, mut x) = (T::zero(), curve(T::zero()));
    let mut ds = len * T::lit(1e-3);
    while s + ds < len {
        let y = curve(s + ds);
        let d = dist(&x, &y);
        if d > chord && ds > len * T::lit(1e-12) {
            ds *= T::half();
            continue;
        }
        s += ds;
        x = y;
        out.push(s);
        if d < chord * T::lit(0.25) {
            ds *= T::two();
        }
    }
    out
}

const SEEDS: usize = 12;

/// Smallest projected distance over `seeds`, stopping at the first that
/// lands on the surface to rounding accuracy.
fn closest<T: Real>(seeds: &[(T, T)], project: impl Fn((T, T)) -> T) -> T {
    let mut best = T::infinity();
    for &s in seeds {
        best = best.min(project(s));
        if best < T::epsilon().sqrt() * T::lit(1e-4) {
            break;
        }
    }
    best
}

fn hausdorff<T: Real>(sides: &Sides<T>, sol: &OtsukiSolution<T>) -> Result<T> {
    type Sample<T> = ((T, T), Point5<T>);
    let two_pi = T::two() * T::PI();
    let chord = T::lit(0.05);
    // Candidates are spaced by chord length along each generating curve, so
    // that slow stretches of either parametrisation are still resolved.
    let t_cands = chord_params(|t| sides.profile_point(T::zero(), t).0, sol.t0, chord);
    let s_cands = chord_params(|s| sides.wedge_point(T::zero(), s).0, sol.s_total, chord);
    let n_alpha = 24;
    let grid = |params: &[T], point: &dyn Fn(T, T) -> Point5<T>| -> Vec<Sample<T>> {
        let mut out = Vec::with_capacity(params.len() * n_alpha);
        for i in 0..n_alpha {
            let al = two_pi * T::from_usize_lossy(i) / T::from_usize_lossy(n_alpha);
            out.extend(params.iter().map(|&u| ((al, u), point(al, u))));
        }
        out
    };
    let profile_cands = grid(&t_cands, &|al, t| sides.profile_point(al, t).0);
    let wedge_cands = grid(&s_cands, &|al, s| sides.wedge_point(al, s).0);
    // Several nearby seeds guard against converging onto a different sheet
    // where the surface passes close to itself.
    let seeds = |x: &Point5<T>, set: &[Sample<T>]| {
        let mut best: Vec<(T, (T, T))> = Vec::with_capacity(SEEDS + 1);
        for (uv, y) in set {
            let d: T = (0..5).map(|i| sq(y[i] - x[i])).sum();
            if best.len() < SEEDS || d < best[best.len() - 1].0 {
                let at = best.iter().position(|b| d < b.0).unwrap_or(best.len());
                best.insert(at, (d, *uv));
                best.truncate(SEEDS);
            }
        }
        best.into_iter().map(|b| b.1).collect::<Vec<_>>()
    };
    // Sparse targets at parameters off the candidate lattice.
    let q = sol.rotation.q() as usize;
    let (n_ta, n_tp) = (7, 2 * q * 5);
    let mut worst = T::zero();
    for i in 0..n_ta {
        let al = two_pi * T::from_usize_lossy(2 * i + 1) / T::from_usize_lossy(2 * n_ta);
        for j in 0..n_tp {
            let frac = (T::from_usize_lossy(j) + T::lit(0.37)) / T::from_usize_lossy(n_tp);
            let x = sides.wedge_point(al, frac * sol.s_total).0;
            let d = closest(&seeds(&x, &profile_cands), |st| project(|u, v| sides.profile_point(u, v), &x, st));
            worst = worst.max(d);
            let x = sides.profile_point(al, frac * sol.t0).0;
            let d = closest(&seeds(&x, &wedge_cands), |st| project(|u, v| sides.wedge_point(u, v), &x, st));
            worst = worst.max(d);
        }
    }
    Ok(worst)
}
