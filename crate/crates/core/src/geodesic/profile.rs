use super::{BipolarCurve, OtsukiCurve, OtsukiSolution};
use crate::error::{domain, Error, Result};
use crate::scalar::{sq, Real};

/// Uniform samples of both generating geodesics over one full period,
/// together with the continuous curves they were drawn from.
#[derive(Clone)]
pub struct GeodesicProfile<T> {
    pub solution: OtsukiSolution<T>,
    pub bipolar: BipolarCurve<T>,
    pub otsuki: OtsukiCurve<T>,
    pub t_grid: Vec<T>,
    pub phi: Vec<T>,
    pub theta: Vec<T>,
    pub phi_dot: Vec<T>,
    pub theta_dot: Vec<T>,
    pub s_grid: Vec<T>,
    pub nu: Vec<T>,
    pub lambda_angle: Vec<T>,
    pub nu_dot: Vec<T>,
    pub lambda_dot: Vec<T>,
    /// Largest deviation of the squared speed from 1 over all samples.
    pub unit_speed_residual: T,
}

impl<T: Real> GeodesicProfile<T> {
    pub fn samples_per_period(&self) -> usize {
        self.t_grid.len()
    }

    pub fn t0(&self) -> T {
        self.solution.t0
    }
}

/// Samples `2q · samples_per_half_period` points of each geodesic, so every
/// turning point lands on a grid node.
pub fn profile<T: Real>(sol: &OtsukiSolution<T>, samples_per_half_period: usize) -> Result<GeodesicProfile<T>> {
    if samples_per_half_period < 16 {
        return Err(domain("profile", format!("{samples_per_half_period} samples per half period (need >= 16)")));
    }
    let bipolar = sol.bipolar_curve()?;
    let otsuki = sol.otsuki_curve()?;
    let q = sol.rotation.q() as usize;
    let n = 2 * q * samples_per_half_period;
    let nf = T::from_usize_lossy(n);
    let two_pi = T::two() * T::PI();

    let mut out = GeodesicProfile {
        solution: *sol,
        t_grid: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        phi_dot: Vec::with_capacity(n),
        theta_dot: Vec::with_capacity(n),
        s_grid: Vec::with_capacity(n),
        nu: Vec::with_capacity(n),
        lambda_angle: Vec::with_capacity(n),
        nu_dot: Vec::with_capacity(n),
        lambda_dot: Vec::with_capacity(n),
        unit_speed_residual: T::zero(),
        bipolar,
        otsuki,
    };
    let mut residual = T::zero();
    for j in 0..n {
        let jf = T::from_usize_lossy(j);
        let t = sol.t0 * jf / nf;
        let st = out.bipolar.state(t);
        let c2 = st.cos2_phi;
        let speed = sq(two_pi) * c2 * (sq(st.phi_dot) + sq(st.theta_dot) * c2);
        residual = residual.max((speed - T::one()).abs());
        out.t_grid.push(t);
        out.phi.push(st.phi);
        out.theta.push(st.theta);
        out.phi_dot.push(st.phi_dot);
        out.theta_dot.push(st.theta_dot);

        let s = sol.s_total * jf / nf;
        let so = out.otsuki.state(s);
        let (sn, cn) = (so.nu.sin(), so.nu.cos());
        let speed = sq(two_pi) * sq(sn) * (sq(so.nu_dot) + sq(cn * so.lambda_dot));
        residual = residual.max((speed - T::one()).abs());
        out.s_grid.push(s);
        out.nu.push(so.nu);
        out.lambda_angle.push(so.lambda);
        out.nu_dot.push(so.nu_dot);
        out.lambda_dot.push(so.lambda_dot);
    }
    out.unit_speed_residual = residual;
    if residual > T::lit(1e-5) {
        return Err(Error::ResolutionTooCoarse { residual: residual.to_f64_lossy() });
    }
    Ok(out)
}
