//! Closed geodesics of the two orbit-space metrics: the S³ side
//! `4π² sin²ν (dν² + cos²ν dλ²)` and the S⁴ side
//! `4π² cos²φ (dφ² + cos²φ dθ²)`.
//!
//! Turning points are square-root singularities of every period integral.
//! They are removed by the phase substitutions
//!
//! ```text
//! S³ side:  cos 2ν = cos 2a · cos w      (ν = a at w = 0, ν = π/2 − a at w = π)
//! S⁴ side:  sin φ  = sin b  · cos u      (φ = b at u = 0, φ = −b at u = π)
//! ```
//!
//! after which every integrand is smooth in the phase variable.

mod curve;
mod profile;

pub use curve::{BipolarCurve, BipolarState, OtsukiCurve, OtsukiState};
pub use profile::{profile, GeodesicProfile};

use serde::Serialize;

use crate::elliptic::{complete_e, complete_k, complete_pi, Characteristic, Modulus};
use crate::error::{domain, Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::scalar::{sq, Real};

pub(crate) fn quad_tol<T: Real>() -> T {
    T::epsilon() * T::lit(64.0)
}

/// Reduced fraction `p/q` with `1/2 < p/q < √2/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RotationNumber {
    p: u32,
    q: u32,
}

impl RotationNumber {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidRotation { p, q, reason: "p and q must be positive" });
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidRotation { p, q, reason: "gcd(p, q) != 1" });
        }
        let (p64, q64) = (u64::from(p), u64::from(q));
        // 1/2 < p/q  <=>  q < 2p;   p/q < √2/2  <=>  2p² < q²
        if q64 >= 2 * p64 || 2 * p64 * p64 >= q64 * q64 {
            return Err(Error::InvalidRotation { p, q, reason: "p/q outside (1/2, √2/2)" });
        }
        Ok(Self { p, q })
    }

    pub fn p(self) -> u32 {
        self.p
    }

    pub fn q(self) -> u32 {
        self.q
    }

    pub fn q_is_even(self) -> bool {
        self.q.is_multiple_of(2)
    }

    /// `pπ/q`, the closing half-period angle.
    pub fn angle<T: Real>(self) -> T {
        T::PI() * T::lit(f64::from(self.p)) / T::lit(f64::from(self.q))
    }

    /// Extremal index `N(2)`: `2q + 4p − 2` for odd `q`, `q + 2p − 2` for even `q`.
    pub fn expected_n2(self) -> usize {
        let (p, q) = (self.p as usize, self.q as usize);
        if self.q_is_even() {
            q + 2 * p - 2
        } else {
            2 * q + 4 * p - 2
        }
    }
}

impl std::fmt::Display for RotationNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Solved data of one Otsuki torus and its bipolar surface.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OtsukiSolution<T> {
    pub rotation: RotationNumber,
    /// Minimal `ν` on the S³-side geodesic.
    pub a: T,
    /// Maximal `|φ|` on the S⁴-side geodesic.
    pub b: T,
    /// Angular momentum `sin a cos a`.
    pub c: T,
    /// Length of the S⁴-side closed geodesic.
    pub t0: T,
    /// Length of the S³-side closed geodesic.
    pub s_total: T,
    /// `Ω(a) − pπ/q`.
    pub omega_residual: T,
}

/// `sin²ν` and `cos²ν` on the S³ side, written without cancellation.
pub(crate) fn nu_squares<T: Real>(a: T, w: T) -> (T, T) {
    let sa2 = sq(a.sin());
    let c2a = (T::two() * a).cos();
    let sh = sq((w * T::half()).sin());
    let ch = sq((w * T::half()).cos());
    (sa2 + c2a * sh, sa2 + c2a * ch)
}

/// `cos²φ` on the S⁴ side as a function of the phase `u`.
pub(crate) fn cos2_phi<T: Real>(b: T, u: T) -> T {
    sq(b.cos()) + sq(b.sin() * u.sin())
}

pub(crate) fn check_a<T: Real>(func: &'static str, a: T) -> Result<()> {
    if a > T::zero() && a <= T::FRAC_PI_4() {
        Ok(())
    } else {
        Err(domain(func, format!("a = {a} outside (0, π/4]")))
    }
}

fn check_b_open<T: Real>(func: &'static str, b: T) -> Result<()> {
    if b > T::zero() && b < T::FRAC_PI_2() {
        Ok(())
    } else {
        Err(domain(func, format!("b = {b} outside (0, π/2)")))
    }
}

/// Half-period angle advance `Ω(a)` of the S³-side geodesic.
///
/// For small `a` the integrand peaks like a Lorentzian of width `a` at
/// `w = π`, where `π − w` cannot be formed accurately; the integral is
/// therefore folded onto `[0, π/2]` with both halves written in exact
/// half-angles.
pub fn omega<T: Real>(a: T) -> Result<T> {
    check_a("omega", a)?;
    let c = a.sin() * a.cos();
    let folded = |w: T| {
        let (s2, c2) = nu_squares(a, w);
        c / (T::two() * c2 * s2.sqrt()) + c / (T::two() * s2 * c2.sqrt())
    };
    integrate_adaptive(&folded, T::zero(), T::FRAC_PI_2(), quad_tol())
}

/// `b(a) = arccos((4 sin²a cos²a)^{1/4})`, i.e. `cos⁴b = sin²2a`.
pub fn b_of_a<T: Real>(a: T) -> Result<T> {
    check_a("b_of_a", a)?;
    Ok((T::two() * a).sin().sqrt().min(T::one()).acos())
}

/// Half-period angle advance `Ξ(b)` of the S⁴-side geodesic, via
/// `Ξ = 2(1−n)/√(2−n) · Π(n, √(n/(2−n)))` with `n = sin²b`.
pub fn xi<T: Real>(b: T) -> Result<T> {
    check_b_open("xi", b)?;
    let n = sq(b.sin());
    let k = (n / (T::two() - n)).sqrt();
    let pi = complete_pi(Characteristic::new(n)?, Modulus::new(k)?);
    Ok(T::two() * (T::one() - n) / (T::two() - n).sqrt() * pi)
}

/// `Ξ(b)` by quadrature over the smooth phase integrand.
pub fn xi_quadrature<T: Real>(b: T) -> Result<T> {
    check_b_open("xi_quadrature", b)?;
    let cb2 = sq(b.cos());
    integrate_adaptive(
        &|u| {
            let c2 = cos2_phi(b, u);
            cb2 / (c2 * (c2 + cb2).sqrt())
        },
        T::zero(),
        T::PI(),
        quad_tol(),
    )
}

/// `dΞ/dn = (E(κ) − K(κ)) / (n√(2−n))` with `κ = √(n/(2−n))`, where
/// `Ξ` is read as a function of `n = sin²b`. Negative on `(0, 1)`.
pub fn xi_derivative<T: Real>(n: T) -> Result<T> {
    if !(n > T::zero() && n < T::one()) {
        return Err(domain("xi_derivative", format!("n = {n} outside (0, 1)")));
    }
    let kappa = (n / (T::two() - n)).sqrt();
    let e = complete_e(kappa)?;
    let k = complete_k(Modulus::new(kappa)?);
    Ok((e - k) / (n * (T::two() - n).sqrt()))
}

fn i_modulus<T: Real>(func: &'static str, b: T) -> Result<T> {
    if !(b >= T::zero() && b < T::FRAC_PI_2()) {
        return Err(domain(func, format!("b = {b} outside [0, π/2)")));
    }
    Ok((sq(b.sin()) / (T::one() + sq(b.cos()))).sqrt())
}

/// `I₁(b) = ∫_{−b}^{b} cos⁵φ / √(cos⁴φ − cos⁴b) dφ` in closed form.
pub fn i1<T: Real>(b: T) -> Result<T> {
    let k = i_modulus("i1", b)?;
    let k2 = sq(k);
    let e = complete_e(k)?;
    let kk = complete_k(Modulus::new(k)?);
    let pre = T::lit(4.0) / T::lit(3.0) * (T::two() / (T::one() + k2)).sqrt();
    Ok(pre * (e - (T::one() - k2) * (T::one() + T::lit(3.0) * k2) / (T::lit(4.0) * (T::one() + k2)) * kk))
}

/// `I₂(b) = ∫_{−b}^{b} cos³φ / √(cos⁴φ − cos⁴b) dφ` in closed form.
pub fn i2<T: Real>(b: T) -> Result<T> {
    let k = i_modulus("i2", b)?;
    let k2 = sq(k);
    let e = complete_e(k)?;
    let kk = complete_k(Modulus::new(k)?);
    Ok(T::two() * (T::two() / (T::one() + k2)).sqrt() * (e - (T::one() - k2) * T::half() * kk))
}

/// `π² I₁(b) / I₂(b)³`, which stays below 2 on `(0, π/2)`.
pub fn i_ratio<T: Real>(b: T) -> Result<T> {
    check_b_open("i_ratio", b)?;
    let d = i2(b)?;
    Ok(sq(T::PI()) * i1(b)? / (d * d * d))
}

/// Finds the Otsuki geodesic closing after `q` oscillations with total
/// angle `2pπ`, i.e. `Ω(a) = pπ/q`.
///
/// Bisection on the monotone `Ω` safeguards secant steps; the bracket
/// never leaves `(0, π/4)`.
pub fn solve_rotation<T: Real>(r: RotationNumber) -> Result<OtsukiSolution<T>> {
    let target: T = r.angle();
    let f = |a: T| omega(a).map(|v| v - target);
    let mut lo = T::lit(1e-9);
    let mut hi = T::FRAC_PI_4();
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if !(f_lo < T::zero() && f_hi > T::zero()) {
        return Err(Error::NoRoot { target: target.to_f64_lossy() });
    }
    let tol = T::epsilon() * T::lit(8.0);
    let mut a = (lo + hi) * T::half();
    let mut fa = f(a)?;
    for iter in 0..200 {
        if fa.abs() <= tol || (hi - lo) <= T::epsilon() * T::lit(4.0) * hi {
            break;
        }
        if fa < T::zero() {
            lo = a;
            f_lo = fa;
        } else {
            hi = a;
            f_hi = fa;
        }
        // secant on the bracket, with a plain bisection every third step
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        a = if iter % 3 == 2 || !(secant > lo && secant < hi) { (lo + hi) * T::half() } else { secant };
        fa = f(a)?;
    }
    let b = b_of_a(a)?;
    let c = a.sin() * a.cos();
    let q = T::from_u32(r.q()).unwrap();
    let half_s = integrate_adaptive(&|w| T::PI() * nu_squares(a, w).0.sqrt(), T::zero(), T::PI(), quad_tol())?;
    Ok(OtsukiSolution {
        rotation: r,
        a,
        b,
        c,
        t0: T::lit(4.0) * q * T::PI() * i2(b)?,
        s_total: T::two() * q * half_s,
        omega_residual: fa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    #[test]
    fn rotation_number_validation() {
        assert!(RotationNumber::new(3, 5).is_ok());
        assert!(RotationNumber::new(7, 10).is_ok());
        assert!(RotationNumber::new(1, 2).is_err());
        assert!(RotationNumber::new(2, 4).is_err());
        assert!(RotationNumber::new(5, 7).is_err()); // 5/7 > √2/2
        assert!(RotationNumber::new(0, 3).is_err());
        assert_eq!(RotationNumber::new(3, 5).unwrap().expected_n2(), 20);
        assert_eq!(RotationNumber::new(5, 8).unwrap().expected_n2(), 16);
    }

    #[test]
    fn omega_endpoint_values() {
        assert_abs_diff_eq!(omega(FRAC_PI_4).unwrap(), PI / SQRT_2, epsilon = 1e-12);
        assert!((omega(1e-6).unwrap() - FRAC_PI_2).abs() < 1e-3);
        assert!(omega(0.0).is_err());
        assert!(omega(0.8).is_err());
    }

    #[test]
    fn b_of_a_limits() {
        assert_abs_diff_eq!(b_of_a(FRAC_PI_4).unwrap(), 0.0, epsilon = 1e-7);
        assert!((b_of_a(1e-12).unwrap() - FRAC_PI_2).abs() < 1e-5);
        let b = b_of_a(0.3f64).unwrap();
        assert_abs_diff_eq!(b.cos().powi(4), (0.6f64).sin().powi(2), epsilon = 1e-14);
    }

    #[test]
    fn xi_closed_form_matches_phase_quadrature() {
        for &b in &[0.05, 0.3, 0.7, 1.2, 1.5] {
            assert_abs_diff_eq!(xi(b).unwrap(), xi_quadrature(b).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn i_values_at_zero() {
        assert_abs_diff_eq!(i2(0.0).unwrap(), PI / SQRT_2, epsilon = 1e-14);
        let r = PI * PI * i1(0.0).unwrap() / i2(0.0f64).unwrap().powi(3);
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-13);
        assert!(i2(FRAC_PI_2).is_err());
    }

    #[test]
    fn solve_three_fifths() {
        let r = RotationNumber::new(3, 5).unwrap();
        let sol = solve_rotation::<f64>(r).unwrap();
        assert!(sol.a > 0.0 && sol.a < FRAC_PI_4);
        assert!((omega(sol.a).unwrap() - 0.6 * PI).abs() < 1e-11);
        let half = sol.bipolar_curve().unwrap().half_period();
        assert_abs_diff_eq!(sol.t0, 10.0 * half, epsilon = 1e-10);
    }
}
