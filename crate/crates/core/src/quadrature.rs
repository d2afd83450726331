//! Gauss–Legendre quadrature, adaptive panel refinement and cumulative
//! integrals of smooth positive integrands.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fixed-order Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes are computed by Newton iteration on the Legendre recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let nf = T::from_usize_lossy(n);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let guess = (T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::half())).cos();
            let mut x = guess;
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != T::zero() { d } else { dp };
            let w = T::two() / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(T) -> T + ?Sized>(&self, f: &F, a: T, b: T) -> T {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + half * *x);
        }
        acc * half
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::two() * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

const PANEL_ORDER: usize = 20;
const MAX_DEPTH: usize = 60;
const MAX_PANELS: usize = 100_000;

/// One accepted panel of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Panel<T> {
    pub start: T,
    pub end: T,
    pub value: T,
}

/// Adaptive bisection of `[a, b]` until every panel's Gauss–Legendre
/// estimate agrees with the sum over its two halves to within its share
/// of `tol`.
pub fn adaptive_panels<T, F>(f: &F, a: T, b: T, tol: T) -> Result<Vec<Panel<T>>>
where
    T: Real,
    F: Fn(T) -> T + ?Sized,
{
    let rule = GaussLegendre::<T>::new(PANEL_ORDER);
    let width = b - a;
    let mut out = Vec::new();
    let mut stack = vec![(a, b, rule.integrate(f, a, b), 0usize)];
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = (lo + hi) * T::half();
        let left = rule.integrate(f, lo, mid);
        let right = rule.integrate(f, mid, hi);
        let fine = left + right;
        let share = tol * ((hi - lo) / width).abs();
        // roundoff in a 20-point rule is a few dozen ulps of the panel value
        let floor = T::epsilon() * T::lit(64.0) * fine.abs();
        if (fine - coarse).abs() <= share.max(floor) {
            out.push(Panel { start: lo, end: hi, value: fine });
        } else if depth >= MAX_DEPTH || out.len() + stack.len() >= MAX_PANELS {
            return Err(Error::IntegrationFailure(format!(
                "adaptive quadrature failed to converge near x = {}",
                mid.to_f64_lossy()
            )));
        } else {
            // right pushed first so panels come out in ascending order
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(out)
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_adaptive<T, F>(f: &F, a: T, b: T, tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T + ?Sized,
{
    if a == b {
        return Ok(T::zero());
    }
    Ok(adaptive_panels(f, a, b, tol)?.iter().map(|p| p.value).sum())
}

pub type Integrand<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// `F(x) = ∫_0^x f` for a smooth positive `f` on `[0, π]`, stored as
/// adaptive panels so partial integrals cost one fixed-order rule.
#[derive(Clone)]
pub struct CumulativeIntegral<T> {
    f: Integrand<T>,
    rule: GaussLegendre<T>,
    breaks: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Real> CumulativeIntegral<T> {
    pub fn new(f: Integrand<T>, upper: T, tol: T) -> Result<Self> {
        let panels = adaptive_panels(&*f, T::zero(), upper, tol)?;
        let mut breaks = Vec::with_capacity(panels.len() + 1);
        let mut cumulative = Vec::with_capacity(panels.len() + 1);
        breaks.push(T::zero());
        cumulative.push(T::zero());
        let mut acc = T::zero();
        for p in &panels {
            acc += p.value;
            breaks.push(p.end);
            cumulative.push(acc);
        }
        Ok(Self { f, rule: GaussLegendre::new(PANEL_ORDER), breaks, cumulative })
    }

    pub fn upper(&self) -> T {
        *self.breaks.last().unwrap()
    }

    pub fn total(&self) -> T {
        *self.cumulative.last().unwrap()
    }

    pub fn integrand(&self, x: T) -> T {
        (self.f)(x)
    }

    /// `F(x)` for `x` in `[0, upper]` (clamped).
    pub fn eval(&self, x: T) -> T {
        let x = x.max(T::zero()).min(self.upper());
        let k = match self.breaks.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(k) => return self.cumulative[k],
            Err(k) => k - 1,
        };
        self.cumulative[k] + self.rule.integrate(&*self.f, self.breaks[k], x)
    }

    /// Solves `F(x) = y` for `x` in `[0, upper]`.
    pub fn invert(&self, y: T) -> T {
        let total = self.total();
        if y <= T::zero() {
            return T::zero();
        }
        if y >= total {
            return self.upper();
        }
        let k = match self.cumulative.binary_search_by(|c| c.partial_cmp(&y).unwrap()) {
            Ok(k) => return self.breaks[k],
            Err(k) => k - 1,
        };
        let (mut lo, mut hi) = (self.breaks[k], self.breaks[k + 1]);
        let (c_lo, c_hi) = (self.cumulative[k], self.cumulative[k + 1]);
        let mut x = lo + (hi - lo) * (y - c_lo) / (c_hi - c_lo);
        for _ in 0..100 {
            let r = self.cumulative[k] + self.rule.integrate(&*self.f, self.breaks[k], x) - y;
            if r > T::zero() {
                hi = x;
            } else {
                lo = x;
            }
            let d = (self.f)(x);
            let mut next = x - r / d;
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::half();
            }
            let step = (next - x).abs();
            x = next;
            if step <= T::epsilon() * T::lit(4.0) * (T::one() + x.abs()) {
                break;
            }
        }
        x
    }
}

/// Cumulative integral of an integrand defined on `[0, π]` and continued
/// to the whole line by reflection at every multiple of π, i.e.
/// `f(mπ + r) = f(r)` for even `m` and `f(π − r)` for odd `m`.
/// Both geodesic phase variables have integrands of this form.
#[derive(Clone)]
pub struct ReflectedIntegral<T> {
    base: CumulativeIntegral<T>,
}

impl<T: Real> ReflectedIntegral<T> {
    pub fn new(f: Integrand<T>, tol: T) -> Result<Self> {
        Ok(Self { base: CumulativeIntegral::new(f, T::PI(), tol)? })
    }

    /// Integral over one reflection cell `[0, π]`.
    pub fn cell(&self) -> T {
        self.base.total()
    }

    fn split(x: T) -> (T, T) {
        let m = (x / T::PI()).floor();
        (m, x - m * T::PI())
    }

    fn is_odd(m: T) -> bool {
        (m * T::half()).floor() * T::two() != m
    }

    pub fn integrand(&self, x: T) -> T {
        let (m, r) = Self::split(x);
        if Self::is_odd(m) {
            self.base.integrand(T::PI() - r)
        } else {
            self.base.integrand(r)
        }
    }

    pub fn eval(&self, x: T) -> T {
        let (m, r) = Self::split(x);
        let cell = self.cell();
        if Self::is_odd(m) {
            (m + T::one()) * cell - self.base.eval(T::PI() - r)
        } else {
            m * cell + self.base.eval(r)
        }
    }

    pub fn invert(&self, y: T) -> T {
        let cell = self.cell();
        let m = (y / cell).floor();
        let r = y - m * cell;
        if Self::is_odd(m) {
            (m + T::one()) * T::PI() - self.base.invert(cell - r)
        } else {
            m * T::PI() + self.base.invert(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(8);
        // degree 15 is the exactness limit of an 8-point rule
        let v = rule.integrate(&|x: f64| x.powi(14) + 3.0 * x.powi(3), -1.0, 1.0);
        assert_abs_diff_eq!(v, 2.0 / 15.0, epsilon = 1e-14);
        let s: f64 = rule.weights().iter().sum();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn odd_order_has_centre_node() {
        let rule = GaussLegendre::<f64>::new(5);
        assert_eq!(rule.nodes()[2], 0.0);
        assert_abs_diff_eq!(rule.weights()[2], 128.0 / 225.0, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_resolves_narrow_peak() {
        let w = 1e-5;
        let f = |x: f64| w / (w * w + x * x);
        let v = integrate_adaptive(&f, -1.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 2.0 * (1.0 / w).atan(), epsilon = 1e-10);
    }

    #[test]
    fn cumulative_eval_and_invert_roundtrip() {
        let f: Integrand<f64> = Arc::new(|x: f64| 2.0 + x.cos());
        let c = CumulativeIntegral::new(f, std::f64::consts::PI, 1e-14).unwrap();
        for &x in &[0.0, 0.3, 1.0, 2.5, std::f64::consts::PI] {
            assert_abs_diff_eq!(c.eval(x), 2.0 * x + x.sin(), epsilon = 1e-13);
            assert_abs_diff_eq!(c.invert(c.eval(x)), x, epsilon = 1e-12);
        }
    }

    #[test]
    fn reflected_integral_continues_symmetrically() {
        // cos x is reflection-symmetric at multiples of π in the required sense
        let f: Integrand<f64> = Arc::new(|x: f64| 1.5 + x.cos());
        let r = ReflectedIntegral::new(f, 1e-14).unwrap();
        for &x in &[-4.0, -0.5, 0.7, 3.5, 7.1, 12.0] {
            assert_abs_diff_eq!(r.eval(x), 1.5 * x + x.sin(), epsilon = 1e-12);
            assert_abs_diff_eq!(r.invert(r.eval(x)), x, epsilon = 1e-11);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let rule = GaussLegendre::<f32>::new(10);
        let v = rule.integrate(&|x: f32| x.exp(), 0.0, 1.0);
        assert!((v - (1f32.exp() - 1.0)).abs() < 1e-5);
    }
}
