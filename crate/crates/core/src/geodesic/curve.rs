//! Arc-length parametrised closed geodesics, evaluated at arbitrary
//! parameter values through their phase variables.

use std::sync::Arc;

use super::{cos2_phi, nu_squares, quad_tol, OtsukiSolution};
use crate::error::Result;
use crate::quadrature::ReflectedIntegral;
use crate::scalar::{sq, Real};

/// Point and velocity of the S⁴-side geodesic at parameter `t`.
#[derive(Debug, Clone, Copy)]
pub struct BipolarState<T> {
    pub t: T,
    /// Phase with `sin φ = sin b cos u`.
    pub u: T,
    pub phi: T,
    /// Unwrapped, increasing.
    pub theta: T,
    pub phi_dot: T,
    pub theta_dot: T,
    pub cos2_phi: T,
}

/// The geodesic `(φ(t), θ(t))` with `φ(0) = b`, `θ(0) = 0`.
#[derive(Clone)]
pub struct BipolarCurve<T> {
    b: T,
    time: ReflectedIntegral<T>,
    angle: ReflectedIntegral<T>,
}

impl<T: Real> BipolarCurve<T> {
    pub fn new(b: T) -> Result<Self> {
        let cb2 = sq(b.cos());
        let time = ReflectedIntegral::new(
            Arc::new(move |u| {
                let c2 = cos2_phi(b, u);
                T::two() * T::PI() * c2 / (c2 + cb2).sqrt()
            }),
            quad_tol(),
        )?;
        let angle = ReflectedIntegral::new(
            Arc::new(move |u| {
                let c2 = cos2_phi(b, u);
                cb2 / (c2 * (c2 + cb2).sqrt())
            }),
            quad_tol(),
        )?;
        Ok(Self { b, time, angle })
    }

    pub fn b(&self) -> T {
        self.b
    }

    /// Parameter length of one swing from `φ = b` to `φ = −b`, i.e. `t0/(2q)`.
    pub fn half_period(&self) -> T {
        self.time.cell()
    }

    /// `θ` advance over one swing.
    pub fn xi(&self) -> T {
        self.angle.cell()
    }

    pub fn state(&self, t: T) -> BipolarState<T> {
        let u = self.time.invert(t);
        self.state_at_phase(t, u)
    }

    pub fn state_at_phase(&self, t: T, u: T) -> BipolarState<T> {
        let b = self.b;
        let cb2 = sq(b.cos());
        let c2 = cos2_phi(b, u);
        let phi = (b.sin() * u.cos()).asin();
        let u_dot = (c2 + cb2).sqrt() / (T::two() * T::PI() * c2);
        BipolarState {
            t,
            u,
            phi,
            theta: self.angle.eval(u),
            phi_dot: -b.sin() * u.sin() * u_dot / c2.sqrt(),
            theta_dot: cb2 / (T::two() * T::PI() * c2 * c2),
            cos2_phi: c2,
        }
    }

    /// `cos²φ(t)` only; this is what the Sturm–Liouville coefficients need.
    pub fn cos2_phi(&self, t: T) -> T {
        cos2_phi(self.b, self.time.invert(t))
    }
}

/// Point and velocity of the S³-side geodesic at parameter `s`.
#[derive(Debug, Clone, Copy)]
pub struct OtsukiState<T> {
    pub s: T,
    /// Phase with `cos 2ν = cos 2a cos w`.
    pub w: T,
    pub nu: T,
    /// Unwrapped, increasing.
    pub lambda: T,
    pub nu_dot: T,
    pub lambda_dot: T,
}

/// The geodesic `(ν(s), λ(s))` with `ν(0) = a`, `λ(0) = 0`.
#[derive(Clone)]
pub struct OtsukiCurve<T> {
    a: T,
    c: T,
    arclength: ReflectedIntegral<T>,
    angle: ReflectedIntegral<T>,
}

impl<T: Real> OtsukiCurve<T> {
    pub fn new(a: T) -> Result<Self> {
        let c = a.sin() * a.cos();
        let arclength = ReflectedIntegral::new(Arc::new(move |w| T::PI() * nu_squares(a, w).0.sqrt()), quad_tol())?;
        let angle = ReflectedIntegral::new(
            Arc::new(move |w| {
                let (s2, c2) = nu_squares(a, w);
                c / (T::two() * c2 * s2.sqrt())
            }),
            quad_tol(),
        )?;
        Ok(Self { a, c, arclength, angle })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn c(&self) -> T {
        self.c
    }

    /// Arc length from `ν = a` to `ν = π/2 − a`.
    pub fn half_period(&self) -> T {
        self.arclength.cell()
    }

    /// `Ω(a)`.
    pub fn omega(&self) -> T {
        self.angle.cell()
    }

    pub fn state(&self, s: T) -> OtsukiState<T> {
        let w = self.arclength.invert(s);
        self.state_at_phase(s, w)
    }

    pub fn state_at_phase(&self, s: T, w: T) -> OtsukiState<T> {
        let (s2, c2) = nu_squares(self.a, w);
        let (sn, cn) = (s2.sqrt(), c2.sqrt());
        let cos2a = (T::two() * self.a).cos();
        let dnu_dw = cos2a * w.sin() / (T::lit(4.0) * sn * cn);
        OtsukiState {
            s,
            w,
            nu: sn.atan2(cn),
            lambda: self.angle.eval(w),
            nu_dot: dnu_dw / (T::PI() * sn),
            lambda_dot: self.c / (T::two() * T::PI() * c2 * s2),
        }
    }

    /// Arc length at phase `w`.
    pub fn arclength_at_phase(&self, w: T) -> T {
        self.arclength.eval(w)
    }
}

impl<T: Real> OtsukiSolution<T> {
    pub fn bipolar_curve(&self) -> Result<BipolarCurve<T>> {
        BipolarCurve::new(self.b)
    }

    pub fn otsuki_curve(&self) -> Result<OtsukiCurve<T>> {
        OtsukiCurve::new(self.a)
    }
}
