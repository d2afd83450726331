//! Embedded Dormand–Prince 5(4) integrator for small autonomous-in-form
//! systems `y' = f(t, y)` with a fixed state dimension.

use crate::error::{Error, Result};
use crate::scalar::Real;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

const MAX_STEPS: usize = 200_000;

/// Adaptive integrator state; `step` carries over between calls so that
/// dense output at many points costs little more than one sweep.
pub struct DormandPrince<T, const N: usize> {
    pub rtol: T,
    pub atol: T,
    step: T,
}

impl<T: Real, const N: usize> DormandPrince<T, N> {
    pub fn new(rtol: T, atol: T) -> Self {
        Self { rtol, atol, step: T::zero() }
    }

    /// Advances `y` from `t` to `t_end`.
    pub fn integrate<F>(&mut self, f: &F, t: T, y: [T; N], t_end: T) -> Result<[T; N]>
    where
        F: Fn(T, &[T; N]) -> [T; N],
    {
        let span = t_end - t;
        if span == T::zero() {
            return Ok(y);
        }
        let dir = span.signum();
        if self.step == T::zero() {
            self.step = span.abs() * T::lit(1e-3);
        }
        let (mut t, mut y) = (t, y);
        let c: [T; 7] = C.map(T::lit);
        let b5: [T; 7] = B5.map(T::lit);
        let b4: [T; 7] = B4.map(T::lit);
        let a: [[T; 6]; 7] = A.map(|row| row.map(T::lit));
        for _ in 0..MAX_STEPS {
            let remaining = (t_end - t) * dir;
            if remaining <= T::epsilon() * t_end.abs().max(T::one()) {
                return Ok(y);
            }
            let h = self.step.min(remaining) * dir;
            let mut k = [[T::zero(); N]; 7];
            for s in 0..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    for i in 0..N {
                        ys[i] += h * a[s][j] * kj[i];
                    }
                }
                k[s] = f(t + c[s] * h, &ys);
            }
            let mut y5 = y;
            let mut err = T::zero();
            for i in 0..N {
                let mut d5 = T::zero();
                let mut d4 = T::zero();
                for s in 0..7 {
                    d5 += b5[s] * k[s][i];
                    d4 += b4[s] * k[s][i];
                }
                y5[i] += h * d5;
                let scale = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                err = err.max((h * (d5 - d4)).abs() / scale);
            }
            if !err.is_finite() {
                return Err(Error::IntegrationFailure(format!("non-finite state at t = {}", t.to_f64_lossy())));
            }
            let factor = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
            };
            if err <= T::one() {
                t += h;
                y = y5;
                self.step = h.abs() * factor;
            } else {
                self.step = h.abs() * factor;
                if self.step <= T::epsilon() * t.abs().max(T::one()) {
                    return Err(Error::IntegrationFailure(format!("step size underflow at t = {}", t.to_f64_lossy())));
                }
            }
        }
        Err(Error::IntegrationFailure(format!("more than {MAX_STEPS} steps before t = {}", t_end.to_f64_lossy())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn harmonic_oscillator_period() {
        let mut ode = DormandPrince::<f64, 2>::new(1e-12, 1e-12);
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = ode.integrate(&f, 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI).unwrap();
        assert_abs_diff_eq!(y[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn exponential_in_pieces() {
        let mut ode = DormandPrince::<f64, 1>::new(1e-12, 1e-14);
        let f = |_t: f64, y: &[f64; 1]| [-2.0 * y[0]];
        let mut y = [1.0];
        for k in 0..10 {
            y = ode.integrate(&f, k as f64 * 0.1, y, (k + 1) as f64 * 0.1).unwrap();
        }
        assert_abs_diff_eq!(y[0], (-2.0f64).exp(), epsilon = 1e-12);
    }
}
