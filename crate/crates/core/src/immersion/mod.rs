//! Explicit immersions of the torus and its bipolar surface.
//!
//! * [`immerse_otsuki`]: the SO(2)-invariant torus in S³ over `(ν(s), λ(s))`.
//! * [`bipolar_wedge`]: the exterior product `I ∧ I*`, a point of S⁴ ⊂ S⁵ ⊂ ℝ⁶
//!   whose first coordinate vanishes.
//! * [`immerse_bipolar`]: the same surface written over the S⁴-side geodesic,
//!   `(cos α cos φ sin θ, sin α cos φ sin θ, cos α cos φ cos θ, sin α cos φ cos θ, sin φ)`.

mod correspondence;
mod mesh;

pub use correspondence::{verify_bipolar_correspondence, CorrespondenceReport};
pub use mesh::{export_mesh, mesh, read_mesh_csv, MeshFormat, SurfaceMesh};

use crate::geodesic::{GeodesicProfile, OtsukiSolution};
use crate::scalar::{sq, Real};

pub type Point4<T> = [T; 4];
pub type Point5<T> = [T; 5];
pub type Point6<T> = [T; 6];

/// Point of the torus in S³ at `(α, s)`.
pub fn immerse_otsuki<T: Real>(profile: &GeodesicProfile<T>, alpha: T, s: T) -> Point4<T> {
    let st = profile.otsuki.state(s);
    let (sn, cn) = st.nu.sin_cos();
    let (sl, cl) = st.lambda.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    [ca * sn, sa * sn, cn * cl, cn * sl]
}

/// Point of the bipolar surface `I ∧ I*` at `(α, s)`.
pub fn bipolar_wedge<T: Real>(profile: &GeodesicProfile<T>, alpha: T, s: T) -> Point6<T> {
    wedge_at(profile, alpha, s)
}

pub(crate) fn wedge_at<T: Real>(profile: &GeodesicProfile<T>, alpha: T, s: T) -> Point6<T> {
    let st = profile.otsuki.state(s);
    wedge_from_state(alpha, st.nu, st.lambda, st.nu_dot, st.lambda_dot)
}

pub(crate) fn wedge_from_state<T: Real>(alpha: T, nu: T, lambda: T, nu_dot: T, lambda_dot: T) -> Point6<T> {
    let (sn, cn) = nu.sin_cos();
    let (sl, cl) = lambda.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    let k = T::two() * T::PI() * sn;
    let pa = k * (lambda_dot * cl * cn - nu_dot * sl * sn);
    let qa = k * (lambda_dot * sl * cn + nu_dot * cl * sn);
    [T::zero(), ca * pa, ca * qa, sa * pa, sa * qa, k * nu_dot * cn]
}

/// Point of the bipolar surface over the S⁴-side geodesic at `(α, t)`.
pub fn immerse_bipolar<T: Real>(profile: &GeodesicProfile<T>, alpha: T, t: T) -> Point5<T> {
    let st = profile.bipolar.state(t);
    bipolar_from_angles(alpha, st.phi, st.theta)
}

pub(crate) fn bipolar_from_angles<T: Real>(alpha: T, phi: T, theta: T) -> Point5<T> {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    [ca * cp * st, sa * cp * st, ca * cp * ct, sa * cp * ct, sp]
}

/// First fundamental form of [`immerse_bipolar`]:
/// `cos²φ dα² + dt² / (4π² cos²φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedMetric<T> {
    pub g_alpha_alpha: T,
    pub g_tt: T,
}

impl<T: Real> InducedMetric<T> {
    pub fn at(profile: &GeodesicProfile<T>, t: T) -> Self {
        Self::from_cos2_phi(profile.bipolar.cos2_phi(t))
    }

    pub fn from_cos2_phi(c2: T) -> Self {
        Self { g_alpha_alpha: c2, g_tt: T::one() / (T::lit(4.0) * sq(T::PI()) * c2) }
    }

    pub fn det(&self) -> T {
        self.g_alpha_alpha * self.g_tt
    }
}

/// Area of the bipolar torus. The density `√det = 1/(2π)` makes the
/// parameter domain `[0, 2π) × [0, t0)` contribute `t0`; for even `q` the
/// immersion is a double cover and the area is `t0/2`.
pub fn area<T: Real>(sol: &OtsukiSolution<T>) -> T {
    if sol.rotation.q_is_even() {
        sol.t0 * T::half()
    } else {
        sol.t0
    }
}

pub fn norm<T: Real, const N: usize>(x: &[T; N]) -> T {
    x.iter().map(|v| sq(*v)).sum::<T>().sqrt()
}
