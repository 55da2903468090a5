//! Gauss–Legendre panels with adaptive halving for complex-valued integrands
//! of one real variable.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule; nodes are found by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::from_usize_lossy(n);
        for i in 0..n.div_ceil(2) {
            let guess = (T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
            let mut x = guess;
            let mut dp = T::one();
            for _ in 0..100 {
                // three-term recurrence for P_n(x) and its derivative
                let mut p0 = T::one();
                let mut p1 = x;
                for k in 2..=n {
                    let kf = T::from_usize_lossy(k);
                    let p2 = ((kf + kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pn1 = if n == 1 { T::one() } else { p0 };
                dp = nf * (x * pn - pn1) / (x * x - T::one());
                let step = pn / dp;
                x = x - step;
                if step.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            if n == 1 {
                dp = T::one();
                x = T::zero();
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
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

    /// Fixed-rule integral over `[a, b]`.
    pub fn integrate<F>(&self, f: &F, a: T, b: T) -> Result<Complex<T>>
    where
        F: Fn(T) -> Result<Complex<T>>,
    {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x)? * w;
        }
        Ok(acc * half)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions<T> {
    /// Absolute tolerance for the whole interval.
    pub abs_tol: T,
    pub rel_tol: T,
    /// Width of the initial uniform panels.
    pub initial_width: T,
    pub max_depth: usize,
    pub order: usize,
}

impl<T: Real> Default for AdaptiveOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-12),
            initial_width: T::lit(0.25),
            max_depth: 40,
            order: 16,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: Complex<T>,
    /// Sum over accepted panels of `|whole - halves|`.
    pub error_estimate: T,
    pub evaluations: usize,
}

struct Panel<T> {
    a: T,
    b: T,
    whole: Complex<T>,
    depth: usize,
}

fn refine_panel<T, F>(
    f: &F,
    rule: &GaussLegendre<T>,
    first: Panel<T>,
    total_width: T,
    opts: &AdaptiveOptions<T>,
) -> Result<Quadrature<T>>
where
    T: Real,
    F: Fn(T) -> Result<Complex<T>>,
{
    let mut out = Quadrature {
        value: Complex::new(T::zero(), T::zero()),
        error_estimate: T::zero(),
        evaluations: 0,
    };
    let mut stack = vec![first];
    while let Some(p) = stack.pop() {
        let m = (p.a + p.b) / T::lit(2.0);
        let left = rule.integrate(f, p.a, m)?;
        let right = rule.integrate(f, m, p.b)?;
        out.evaluations += 2 * rule.len();
        let halves = left + right;
        let err = (halves - p.whole).norm();
        let share = (p.b - p.a) / total_width;
        let tol = (opts.abs_tol * share).max(opts.rel_tol * halves.norm());
        if err <= tol {
            out.value = out.value + halves;
            out.error_estimate = out.error_estimate + err;
        } else if p.depth >= opts.max_depth {
            return Err(Error::Resolution(format!(
                "quadrature did not converge on [{}, {}]",
                p.a, p.b
            )));
        } else {
            stack.push(Panel { a: m, b: p.b, whole: right, depth: p.depth + 1 });
            stack.push(Panel { a: p.a, b: m, whole: left, depth: p.depth + 1 });
        }
    }
    Ok(out)
}

/// Adaptive integral of `f` over `[a, b]`. Initial panels are processed in
/// parallel and summed in order, so results are deterministic.
pub fn integrate_adaptive<T, F>(f: F, a: T, b: T, opts: &AdaptiveOptions<T>) -> Result<Quadrature<T>>
where
    T: Real,
    F: Fn(T) -> Result<Complex<T>> + Sync,
{
    let zero = Complex::new(T::zero(), T::zero());
    if b == a {
        return Ok(Quadrature { value: zero, error_estimate: T::zero(), evaluations: 0 });
    }
    let rule = GaussLegendre::<T>::new(opts.order);
    let width = b - a;
    let count = (width.abs() / opts.initial_width).ceil().to_usize().unwrap_or(1).max(1);
    let step = width / T::from_usize_lossy(count);
    let parts: Vec<Result<Quadrature<T>>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let pa = a + step * T::from_usize_lossy(k);
            let pb = if k + 1 == count { b } else { pa + step };
            let whole = rule.integrate(&f, pa, pb)?;
            let mut q = refine_panel(&f, &rule, Panel { a: pa, b: pb, whole, depth: 0 }, width.abs(), opts)?;
            q.evaluations += rule.len();
            Ok(q)
        })
        .collect();
    let mut total = Quadrature { value: zero, error_estimate: T::zero(), evaluations: 0 };
    for p in parts {
        let p = p?;
        total.value = total.value + p.value;
        total.error_estimate = total.error_estimate + p.error_estimate;
        total.evaluations += p.evaluations;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::<f64>::new(10);
        let s: f64 = rule.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 19 is the highest exactly integrated degree
        let v = rule.integrate(&|x: f64| Ok(Complex::new(x.powi(18), 0.0)), -1.0, 1.0).unwrap();
        assert!((v.re - 2.0 / 19.0).abs() < 1e-14);
        let one = GaussLegendre::<f64>::new(1);
        assert_eq!(one.nodes(), &[0.0]);
        assert!((one.weights()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_gaussian_and_oscillatory() {
        let opts = AdaptiveOptions::default();
        let q = integrate_adaptive(|x: f64| Ok(Complex::new((-x * x).exp(), 0.0)), -10.0, 10.0, &opts).unwrap();
        assert!((q.value.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        // ∫_0^{2π} e^{i 7 x} dx = 0
        let q = integrate_adaptive(
            |x: f64| Ok(Complex::new(0.0, 7.0 * x).exp()),
            0.0,
            2.0 * std::f64::consts::PI,
            &opts,
        )
        .unwrap();
        assert!(q.value.norm() < 1e-11);
    }

    #[test]
    fn single_precision_rule() {
        let rule = GaussLegendre::<f32>::new(8);
        let v = rule.integrate(&|x: f32| Ok(Complex::new(x * x, 0.0)), 0.0, 3.0).unwrap();
        assert!((v.re - 9.0).abs() < 1e-4);
    }

    #[test]
    fn integrand_errors_propagate() {
        let opts = AdaptiveOptions::default();
        let r = integrate_adaptive(|_x: f64| Err(Error::Singular { re: 0.0, im: 0.0 }), 0.0, 1.0, &opts);
        assert!(matches!(r, Err(Error::Singular { .. })));
    }
}
