//! Complete elliptic integrals of the first, second and third kind and
//! their closed-form derivatives.
//!
//! Everything is evaluated through Carlson's symmetric integrals
//! `R_F`, `R_D` and `R_J` using the duplication theorem:
//!
//! ```text
//! K(k)    = R_F(0, 1−k², 1)
//! E(k)    = R_F(0, 1−k², 1) − k²/3 · R_D(0, 1−k², 1)
//! Π(n, k) = R_F(0, 1−k², 1) + n/3 · R_J(0, 1−k², 1, 1−n)
//! ```
//!
//! Moduli are accepted up to `1 − 1e−12`. Beyond `k = 0.9999` the values
//! stay finite but the relative accuracy degrades with the logarithmic
//! blow-up of `K`.

use crate::error::{domain, Result};
use crate::scalar::{sq, Real};

/// Largest accepted modulus / characteristic.
pub const MAX_ARGUMENT: f64 = 1.0 - 1e-12;

/// Elliptic modulus `k` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Modulus<T>(T);

impl<T: Real> Modulus<T> {
    pub fn new(k: T) -> Result<Self> {
        if !(k >= T::zero() && k <= T::lit(MAX_ARGUMENT)) {
            return Err(domain("Modulus::new", format!("k = {k} outside [0, 1)")));
        }
        Ok(Self(k))
    }

    pub fn value(self) -> T {
        self.0
    }

    /// Complementary modulus `k' = √(1 − k²)`.
    pub fn complement(self) -> T {
        (T::one() - sq(self.0)).sqrt()
    }
}

/// Third-kind characteristic `n` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Characteristic<T>(T);

impl<T: Real> Characteristic<T> {
    pub fn new(n: T) -> Result<Self> {
        if !(n >= T::zero() && n <= T::lit(MAX_ARGUMENT)) {
            return Err(domain("Characteristic::new", format!("n = {n} outside [0, 1)")));
        }
        Ok(Self(n))
    }

    pub fn value(self) -> T {
        self.0
    }
}

fn errtol<T: Real>() -> T {
    T::lit(0.6) * T::epsilon().powf(T::one() / T::lit(6.0))
}

/// Carlson's `R_F(x, y, z)`; at most one argument may vanish.
pub fn carlson_rf<T: Real>(x: T, y: T, z: T) -> T {
    let (mut x, mut y, mut z) = (x, y, z);
    let tol = errtol::<T>();
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = (x + lambda) * T::lit(0.25);
        y = (y + lambda) * T::lit(0.25);
        z = (z + lambda) * T::lit(0.25);
        let ave = (x + y + z) / T::lit(3.0);
        let dx = (ave - x) / ave;
        let dy = (ave - y) / ave;
        let dz = (ave - z) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= tol {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (T::one() + (e2 / T::lit(24.0) - T::lit(0.1) - T::lit(3.0 / 44.0) * e3) * e2 + e3 / T::lit(14.0))
                / ave.sqrt();
        }
    }
}

/// Carlson's `R_D(x, y, z)`, symmetric in `x, y`; requires `z > 0`.
pub fn carlson_rd<T: Real>(x: T, y: T, z: T) -> T {
    let (mut x, mut y, mut z) = (x, y, z);
    let tol = errtol::<T>();
    let mut sum = T::zero();
    let mut fac = T::one();
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lambda));
        fac *= T::lit(0.25);
        x = (x + lambda) * T::lit(0.25);
        y = (y + lambda) * T::lit(0.25);
        z = (z + lambda) * T::lit(0.25);
        let ave = (x + y + T::lit(3.0) * z) * T::lit(0.2);
        let dx = (ave - x) / ave;
        let dy = (ave - y) / ave;
        let dz = (ave - z) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= tol {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - T::lit(6.0) * eb;
            let ee = ed + ec + ec;
            let c1 = T::lit(3.0 / 14.0);
            let c2 = T::lit(1.0 / 6.0);
            let c3 = T::lit(9.0 / 22.0);
            let c4 = T::lit(3.0 / 26.0);
            let c5 = T::lit(0.25 * 9.0 / 22.0);
            let c6 = T::lit(1.5 * 3.0 / 26.0);
            return T::lit(3.0) * sum
                + fac
                    * (T::one()
                        + ed * (-c1 + c5 * ed - c6 * dz * ee)
                        + dz * (c2 * ee + dz * (-c3 * ec + dz * c4 * ea)))
                    / (ave * ave.sqrt());
        }
    }
}

/// Carlson's `R_J(x, y, z, p)` for `p > 0`.
pub fn carlson_rj<T: Real>(x: T, y: T, z: T, p: T) -> T {
    let (mut x, mut y, mut z, mut p) = (x, y, z, p);
    let tol = errtol::<T>();
    let mut sum = T::zero();
    let mut fac = T::one();
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        let alpha = sq(p * (sx + sy + sz) + sx * sy * sz);
        let beta = p * sq(p + lambda);
        sum += fac * carlson_rc(alpha, beta);
        fac *= T::lit(0.25);
        x = (x + lambda) * T::lit(0.25);
        y = (y + lambda) * T::lit(0.25);
        z = (z + lambda) * T::lit(0.25);
        p = (p + lambda) * T::lit(0.25);
        let ave = (x + y + z + p + p) * T::lit(0.2);
        let dx = (ave - x) / ave;
        let dy = (ave - y) / ave;
        let dz = (ave - z) / ave;
        let dp = (ave - p) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dp.abs()) <= tol {
            let ea = dx * (dy + dz) + dy * dz;
            let eb = dx * dy * dz;
            let ec = dp * dp;
            let ed = ea - T::lit(3.0) * ec;
            let ee = eb + T::two() * dp * (ea - ec);
            let c1 = T::lit(3.0 / 14.0);
            let c2 = T::lit(1.0 / 3.0);
            let c3 = T::lit(3.0 / 22.0);
            let c4 = T::lit(3.0 / 26.0);
            let c5 = T::lit(0.75 * 3.0 / 22.0);
            let c6 = T::lit(1.5 * 3.0 / 26.0);
            let c7 = T::lit(0.5 * 1.0 / 3.0);
            let c8 = T::lit(3.0 / 11.0);
            return T::lit(3.0) * sum
                + fac
                    * (T::one()
                        + ed * (-c1 + c5 * ed - c6 * ee)
                        + eb * (c7 + dp * (-c8 + dp * c4))
                        + dp * ea * (c2 - dp * c3)
                        - c2 * dp * ec)
                    / (ave * ave.sqrt());
        }
    }
}

/// Carlson's degenerate `R_C(x, y)` for `y > 0`.
pub fn carlson_rc<T: Real>(x: T, y: T) -> T {
    let (mut x, mut y) = (x, y);
    let tol = errtol::<T>();
    loop {
        let lambda = T::two() * x.sqrt() * y.sqrt() + y;
        x = (x + lambda) * T::lit(0.25);
        y = (y + lambda) * T::lit(0.25);
        let ave = (x + y + y) / T::lit(3.0);
        let s = (y - ave) / ave;
        if s.abs() <= tol {
            let poly = T::one()
                + s * s * (T::lit(0.3) + s * (T::lit(1.0 / 7.0) + s * (T::lit(0.375) + s * T::lit(9.0 / 22.0))));
            return poly / ave.sqrt();
        }
    }
}

/// Complete integral of the first kind `K(k)`.
pub fn complete_k<T: Real>(k: Modulus<T>) -> T {
    carlson_rf(T::zero(), T::one() - sq(k.0), T::one())
}

/// Complete integral of the second kind `E(k)`, defined on `[0, 1]`.
pub fn complete_e<T: Real>(k: T) -> Result<T> {
    if !(k >= T::zero() && k <= T::one()) {
        return Err(domain("complete_e", format!("k = {k} outside [0, 1]")));
    }
    if k == T::one() {
        return Ok(T::one());
    }
    let kc2 = T::one() - sq(k);
    Ok(carlson_rf(T::zero(), kc2, T::one()) - sq(k) / T::lit(3.0) * carlson_rd(T::zero(), kc2, T::one()))
}

/// Complete integral of the third kind `Π(n, k)`.
pub fn complete_pi<T: Real>(n: Characteristic<T>, k: Modulus<T>) -> T {
    let kc2 = T::one() - sq(k.0);
    let rf = carlson_rf(T::zero(), kc2, T::one());
    if n.0 == T::zero() {
        return rf;
    }
    rf + n.0 / T::lit(3.0) * carlson_rj(T::zero(), kc2, T::one(), T::one() - n.0)
}

fn open_unit<T: Real>(func: &'static str, name: &str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(domain(func, format!("{name} = {x} outside (0, 1)")))
    }
}

/// `dE/dk = (E − K)/k` on `(0, 1)`.
pub fn de_dk<T: Real>(k: T) -> Result<T> {
    open_unit("de_dk", "k", k)?;
    let m = Modulus::new(k)?;
    Ok((complete_e(k)? - complete_k(m)) / k)
}

/// `dK/dk = E/(k(1 − k²)) − K/k` on `(0, 1)`.
pub fn dk_dk<T: Real>(k: T) -> Result<T> {
    open_unit("dk_dk", "k", k)?;
    let m = Modulus::new(k)?;
    Ok(complete_e(k)? / (k * (T::one() - sq(k))) - complete_k(m) / k)
}

fn check_pi_derivative_args<T: Real>(func: &'static str, n: T, k: T) -> Result<()> {
    open_unit(func, "n", n)?;
    open_unit(func, "k", k)?;
    if (sq(k) - n).abs() <= T::epsilon() * T::lit(16.0) {
        return Err(domain(func, format!("n = k² = {n}: derivative formula is singular")));
    }
    Ok(())
}

/// `∂Π/∂n = [E + (k² − n)K/n + (n² − k²)Π/n] / (2(k² − n)(n − 1))`.
pub fn dpi_dn<T: Real>(n: T, k: T) -> Result<T> {
    check_pi_derivative_args("dpi_dn", n, k)?;
    let (e, kk, pi) = pieces(n, k)?;
    let k2 = sq(k);
    Ok((e + (k2 - n) * kk / n + (sq(n) - k2) * pi / n) / (T::two() * (k2 - n) * (n - T::one())))
}

/// `∂Π/∂k = k/(n − k²) · (E/(k² − 1) + Π)`.
pub fn dpi_dk<T: Real>(n: T, k: T) -> Result<T> {
    check_pi_derivative_args("dpi_dk", n, k)?;
    let (e, _, pi) = pieces(n, k)?;
    let k2 = sq(k);
    Ok(k / (n - k2) * (e / (k2 - T::one()) + pi))
}

fn pieces<T: Real>(n: T, k: T) -> Result<(T, T, T)> {
    let m = Modulus::new(k)?;
    let c = Characteristic::new(n)?;
    Ok((complete_e(k)?, complete_k(m), complete_pi(c, m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn m(k: f64) -> Modulus<f64> {
        Modulus::new(k).unwrap()
    }

    #[test]
    fn zero_modulus_values() {
        assert_abs_diff_eq!(complete_k(m(0.0)), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(complete_e(0.0).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(complete_e(1.0).unwrap(), 1.0, epsilon = 0.0);
        let n0 = Characteristic::new(0.0).unwrap();
        assert_abs_diff_eq!(complete_pi(n0, m(0.0)), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(complete_pi(n0, m(0.37)), complete_k(m(0.37)));
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(Modulus::new(1.0).is_err());
        assert!(Modulus::new(-0.1).is_err());
        assert!(Modulus::new(f64::NAN).is_err());
        assert!(Characteristic::new(1.0).is_err());
        assert!(complete_e(1.01).is_err());
        assert!(de_dk(0.0).is_err());
        assert!(dk_dk(1.0).is_err());
        assert!(dpi_dn(0.25, 0.5).is_err());
        assert!(dpi_dk(0.3, 0.0).is_err());
    }

    #[test]
    fn carlson_special_values() {
        // R_F(0,1,2) and R_D(0,2,1) reference values from DLMF 19.20 tables
        assert_abs_diff_eq!(carlson_rf(1.0, 2.0, 0.0), 1.3110287771461, epsilon = 1e-12);
        assert_abs_diff_eq!(carlson_rd(0.0, 2.0, 1.0), 1.7972103521034, epsilon = 1e-12);
        assert_abs_diff_eq!(carlson_rc(0.0, 0.25), std::f64::consts::PI, epsilon = 1e-14);
        // R_J(x,y,z,z) = R_D(x,y,z)
        assert_abs_diff_eq!(carlson_rj(0.5, 2.0, 1.5, 1.5), carlson_rd(0.5, 2.0, 1.5), epsilon = 1e-14);
    }

    #[test]
    fn near_unit_modulus_stays_finite() {
        let k = complete_k(m(MAX_ARGUMENT));
        assert!(k.is_finite() && k > 10.0);
        let e = complete_e(MAX_ARGUMENT).unwrap();
        assert!((e - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vanishing_limit_of_de_dk() {
        assert!(de_dk(1e-6f64).unwrap().abs() < 1e-5);
    }

    #[test]
    fn single_precision_instantiation() {
        let k = complete_k(Modulus::new(0.5f32).unwrap());
        assert!((k - 1.685_750_4).abs() < 1e-5);
    }
}
