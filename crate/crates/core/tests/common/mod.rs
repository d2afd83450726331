//! Test-only reference computations, deliberately independent of the
//! library's own quadrature and closed forms.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`.
///
/// The integrand receives `(x, x − a, b − x)`, with both endpoint
/// distances formed without cancellation, so inverse-square-root
/// singularities at either end can be written accurately.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let t_max = 4.0;
    let eval = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        // 1 − tanh|s| = 2 / (1 + e^{2|s|})
        let gap = half * 2.0 / (1.0 + (2.0 * s.abs()).exp());
        if gap <= 0.0 {
            return 0.0;
        }
        let (lo, hi) = if s >= 0.0 { (2.0 * half - gap, gap) } else { (gap, 2.0 * half - gap) };
        let x = if s >= 0.0 { b - gap } else { a + gap };
        half * w * f(x, lo, hi)
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let next = h * sum;
        if (next - estimate).abs() <= tol * next.abs().max(1.0) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Fourth-order central difference.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// `K(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ)`.
pub fn elliptic_k(k: f64) -> f64 {
    tanh_sinh(|x, _, _| 1.0 / (1.0 - (k * x.sin()).powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-15)
}

/// `E(k) = ∫₀^{π/2} √(1 − k² sin²θ) dθ`.
pub fn elliptic_e(k: f64) -> f64 {
    tanh_sinh(|x, _, _| (1.0 - (k * x.sin()).powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-15)
}

/// `Π(n, k) = ∫₀^{π/2} dθ / ((1 − n sin²θ) √(1 − k² sin²θ))`.
pub fn elliptic_pi(n: f64, k: f64) -> f64 {
    tanh_sinh(
        |x, _, _| {
            let s2 = x.sin().powi(2);
            1.0 / ((1.0 - n * s2) * (1.0 - k * k * s2).sqrt())
        },
        0.0,
        FRAC_PI_2,
        1e-15,
    )
}

/// Half-period angle advance of the S³-side geodesic, straight from its
/// defining integral over `ν ∈ [a, π/2 − a]`.
pub fn omega_direct(a: f64) -> f64 {
    let c = a.sin() * a.cos();
    // sin²ν cos²ν − c² = ¼(sin 2ν − sin 2a)(sin 2ν + sin 2a), and
    // sin 2ν − sin 2a = 2 sin(ν − a) cos(ν + a) with cos(ν + a) = sin(π/2 − a − ν)
    let f = |nu: f64, lo: f64, hi: f64| {
        let gap = 2.0 * lo.sin() * hi.sin();
        let rad = 0.25 * gap * ((2.0 * nu).sin() + (2.0 * a).sin());
        1.0 / (nu.cos() * rad.sqrt())
    };
    c * tanh_sinh(f, a, FRAC_PI_2 - a, 1e-14)
}

/// Half-period angle advance of the S⁴-side geodesic:
/// `cos²b ∫_{−b}^{b} dφ / (cos φ √(cos⁴φ − cos⁴b))`.
pub fn xi_direct(b: f64) -> f64 {
    let cb2 = b.cos().powi(2);
    let f = |phi: f64, lo: f64, hi: f64| {
        // cos²φ − cos²b = sin(b − φ) sin(b + φ)
        let gap = hi.sin() * lo.sin();
        1.0 / (phi.cos() * (gap * (phi.cos().powi(2) + cb2)).sqrt())
    };
    cb2 * tanh_sinh(f, -b, b, 1e-14)
}

/// `∫_{−b}^{b} cosᵐφ / √(cos⁴φ − cos⁴b) dφ` for `m = 5` (I₁) or `m = 3` (I₂).
pub fn i_direct(m: i32, b: f64) -> f64 {
    let cb2 = b.cos().powi(2);
    let f = |phi: f64, lo: f64, hi: f64| {
        let gap = hi.sin() * lo.sin();
        phi.cos().powi(m) / (gap * (phi.cos().powi(2) + cb2)).sqrt()
    };
    tanh_sinh(f, -b, b, 1e-14)
}

/// Cyclic sign changes of `v`, ignoring samples below `1e−9·max|v|`.
pub fn sign_changes(v: &[f64]) -> usize {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let signs: Vec<bool> = v.iter().filter(|x| x.abs() > 1e-9 * max).map(|x| *x > 0.0).collect();
    (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count()
}

/// `|⟨u, v⟩|² / (|u|² |v|²)` summed over an orthonormal family `basis`:
/// the squared cosine of the angle between `u` and its span.
pub fn similarity(u: &[f64], basis: &[Vec<f64>]) -> f64 {
    let uu: f64 = u.iter().map(|x| x * x).sum();
    basis.iter().map(|g| u.iter().zip(g).map(|(a, b)| a * b).sum::<f64>().powi(2) / uu).sum()
}

/// Gram–Schmidt, twice.
pub fn orthonormalize(vs: &mut [Vec<f64>]) {
    for i in 0..vs.len() {
        for _ in 0..2 {
            for j in 0..i {
                let d: f64 = vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b).sum();
                let (head, tail) = vs.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= d * y;
                }
            }
        }
        let n = vs[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        vs[i].iter_mut().for_each(|x| *x /= n);
    }
}

pub const CASES: [(u32, u32); 5] = [(3, 5), (5, 8), (4, 7), (5, 9), (7, 10)];

pub fn pi_over(p: u32, q: u32) -> f64 {
    PI * f64::from(p) / f64::from(q)
}
