//! Composite Gauss–Legendre quadrature with global adaptive bisection.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::{Error, Real, Result};

/// Values that can be integrated: real scalars and complex numbers.
pub trait QuadValue<T>:
    Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self>
{
    fn magnitude(&self) -> T;
}

impl<T: Real> QuadValue<T> for T {
    fn magnitude(&self) -> T {
        self.abs()
    }
}

impl<T: Real> QuadValue<T> for Complex<T> {
    fn magnitude(&self) -> T {
        self.norm()
    }
}

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton iteration on `P_n`, weights from `P_n'`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::lit(n as f64);
        let two = T::lit(2.0);
        let eps = T::epsilon();
        for i in 0..n.div_ceil(2) {
            let mut x = (T::PI() * (T::lit(i as f64) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= eps * T::lit(4.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = two / ((T::one() - x * x) * dp * dp);
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

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }

    pub fn integrate<V, F>(&self, f: &F, a: T, b: T) -> V
    where
        V: QuadValue<T>,
        F: Fn(T) -> V,
    {
        self.mapped(a, b)
            .fold(V::zero(), |acc, (x, w)| acc + f(x) * w)
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::lit(k as f64);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::lit(n as f64);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Absolute/relative tolerance pair: accept when `err <= max(abs, rel·|I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self { abs, rel }
    }

    fn target(&self, magnitude: T) -> T {
        self.abs.max(self.rel * magnitude)
    }
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            abs: T::lit(1e-13),
            rel: T::lit(1e-13),
        }
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<V, T> {
    pub value: V,
    pub error: T,
    pub panels: usize,
}

struct Panel<V, T> {
    a: T,
    b: T,
    value: V,
    error: T,
}

/// Adaptive integrator: the error of a panel is the difference between the
/// rule applied to the whole panel and to its two halves; the panel with the
/// largest error is bisected until the global estimate meets the tolerance.
#[derive(Debug, Clone)]
pub struct Integrator<T> {
    rule: GaussLegendre<T>,
    pub tolerance: Tolerance<T>,
    pub max_panels: usize,
}

impl<T: Real> Integrator<T> {
    pub fn new(order: usize, tolerance: Tolerance<T>) -> Self {
        Self {
            rule: GaussLegendre::new(order),
            tolerance,
            max_panels: 20_000,
        }
    }

    pub fn rule(&self) -> &GaussLegendre<T> {
        &self.rule
    }

    /// Integrates `f` over the partition given by sorted `breakpoints`
    /// (at least two entries).
    pub fn integrate<V, F>(&self, f: F, breakpoints: &[T]) -> Result<Estimate<V, T>>
    where
        V: QuadValue<T>,
        F: Fn(T) -> V,
    {
        if breakpoints.len() < 2 {
            return Err(Error::domain("integration needs at least two breakpoints"));
        }
        let mut panels: Vec<Panel<V, T>> = Vec::new();
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0]) {
                continue;
            }
            panels.push(self.panel(&f, w[0], w[1]));
        }
        if panels.is_empty() {
            return Ok(Estimate {
                value: V::zero(),
                error: T::zero(),
                panels: 0,
            });
        }
        loop {
            let value = panels.iter().fold(V::zero(), |acc, p| acc + p.value);
            let error: T = panels.iter().map(|p| p.error).sum();
            if error <= self.tolerance.target(value.magnitude()) {
                return Ok(Estimate {
                    value,
                    error,
                    panels: panels.len(),
                });
            }
            if panels.len() >= self.max_panels {
                return Err(Error::QuadratureNotConverged {
                    achieved: error.as_f64(),
                    requested: self.tolerance.target(value.magnitude()).as_f64(),
                });
            }
            let worst = panels
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let p = panels.swap_remove(worst);
            let mid = (p.a + p.b) * T::lit(0.5);
            if !(mid > p.a && mid < p.b) {
                return Err(Error::QuadratureNotConverged {
                    achieved: error.as_f64(),
                    requested: self.tolerance.target(value.magnitude()).as_f64(),
                });
            }
            panels.push(self.panel(&f, p.a, mid));
            panels.push(self.panel(&f, mid, p.b));
        }
    }

    fn panel<V, F>(&self, f: &F, a: T, b: T) -> Panel<V, T>
    where
        V: QuadValue<T>,
        F: Fn(T) -> V,
    {
        let mid = (a + b) * T::lit(0.5);
        let coarse = self.rule.integrate(f, a, b);
        let fine = self.rule.integrate(f, a, mid) + self.rule.integrate(f, mid, b);
        Panel {
            a,
            b,
            value: fine,
            error: (fine - coarse).magnitude(),
        }
    }
}

impl<T: Real> Default for Integrator<T> {
    fn default() -> Self {
        Self::new(20, Tolerance::default())
    }
}

/// Sorts, deduplicates and clips breakpoints to `[lo, hi]`, always
/// including both ends.
pub fn partition<T: Real>(lo: T, hi: T, interior: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut pts: Vec<T> = interior
        .into_iter()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * (T::one() + b.abs()));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::<f64>::new(5);
        // degree 9 is the highest exact degree for 5 nodes
        let v: f64 = rule.integrate(&|x: f64| x.powi(8) + x.powi(9), -1.0, 1.0);
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let s: f64 = rule.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn odd_rule_has_zero_node() {
        let rule = GaussLegendre::<f64>::new(7);
        assert_eq!(rule.nodes()[3], 0.0);
    }

    #[test]
    fn adaptive_resolves_a_narrow_peak() {
        let gamma = 1e-3;
        let f = |x: f64| gamma / std::f64::consts::PI / (x * x + gamma * gamma);
        let exact = 2.0 / std::f64::consts::PI * (1.0 / gamma).atan();
        let est = Integrator::default().integrate(f, &[-1.0, 1.0]).unwrap();
        assert!((est.value - exact).abs() < 1e-12, "{} vs {}", est.value, exact);
    }

    #[test]
    fn complex_oscillatory_integral() {
        // ∫_0^1 e^{-i 40 x} dx
        let k = 40.0;
        let f = |x: f64| Complex::new(0.0, -k * x).exp();
        let exact = (Complex::new(0.0, -k).exp() - 1.0) / Complex::new(0.0, -k);
        let est = Integrator::default().integrate(f, &[0.0, 1.0]).unwrap();
        assert!((est.value - exact).norm() < 1e-13);
    }

    #[test]
    fn exhausted_panels_report_error() {
        let mut q = Integrator::<f64>::new(2, Tolerance::new(0.0, 0.0));
        q.max_panels = 4;
        let err = q.integrate(|x: f64| x.sqrt(), &[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }

    #[test]
    fn works_in_single_precision() {
        let est = Integrator::<f32>::new(10, Tolerance::new(1e-6, 1e-6))
            .integrate(|x: f32| x.cos(), &[0.0, 1.0])
            .unwrap();
        assert!((est.value - 1f32.sin()).abs() < 1e-5);
    }
}
