//! Gaussian trace identity and the Weyl counting experiment.
//!
//! For `y1 < Y` and `y2 > 0`, with the lower line traversed left to right
//! and the upper line right to left,
//!
//! ```text
//! 2 pi i sum_z g(z) = int g(x + i y1) f'/f dx - int g(x + i y2) f'/f dx
//!                   = -int g Tr[U'(Id - U)^{-1}] (x + i y1) dx
//!                     + int g Tr[U'(Id - U)^{-1}] (x + i y2) dx.
//! ```

use std::fmt::Write as _;

use num_complex::Complex;

use crate::bounds::{jensen_n0, strip_depth};
use crate::error::{Error, Result};
use crate::finder::{locate_with, winding_count_with, ContourOptions, FinderOptions, Rectangle, ResonanceSet};
use crate::graph::{GraphClassParams, QuantumGraph};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions};
use crate::scalar::{erfc, imag_unit, Real};
use crate::secular::Secular;

/// `g(z) = exp(-a (z - anchor)^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTest<T> {
    pub a: T,
    pub anchor: Complex<T>,
}

impl<T: Real> GaussianTest<T> {
    /// Gaussian centred at `x0` with anchor `x0 + i y_anchor`.
    pub fn new(a: T, x0: T, y_anchor: T) -> Result<Self> {
        if !(a > T::zero() && a.is_finite()) {
            return Err(Error::Parameter(format!("Gaussian width parameter {a} must be positive")));
        }
        Ok(Self { a, anchor: Complex::new(x0, y_anchor) })
    }

    pub fn x0(&self) -> T {
        self.anchor.re
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let d = z - self.anchor;
        (-(d * d) * self.a).exp()
    }

    /// `int_R |g(x + i y)| dx`.
    pub fn line_mass(&self, y: T) -> T {
        let dy = y - self.anchor.im;
        (self.a * dy * dy).exp() * (T::PI() / self.a).sqrt()
    }

    /// `int_{|x - x0| > t} |g(x + i y)| dx`.
    pub fn tail_mass(&self, y: T, t: T) -> T {
        self.line_mass(y) * erfc(self.a.sqrt() * t)
    }
}

/// Sum of two Gaussians; used to check additivity of both sides.
#[derive(Debug, Clone, Copy)]
pub enum TestFunction<T> {
    Gaussian(GaussianTest<T>),
    Sum(GaussianTest<T>, GaussianTest<T>),
}

impl<T: Real> TestFunction<T> {
    fn parts(&self) -> Vec<GaussianTest<T>> {
        match *self {
            Self::Gaussian(g) => vec![g],
            Self::Sum(g, h) => vec![g, h],
        }
    }
}

impl<T: Real> From<GaussianTest<T>> for TestFunction<T> {
    fn from(g: GaussianTest<T>) -> Self {
        Self::Gaussian(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIntegrals<T> {
    /// `bottom - top`; equals `2 pi i` times the resonance sum.
    pub value: Complex<T>,
    /// `int g f'/f` along `Im z = y1` over the window.
    pub bottom: Complex<T>,
    /// `int g f'/f` along `Im z = y2` over the window.
    pub top: Complex<T>,
    pub truncation_bound: T,
    pub quadrature_error: T,
    pub y1: T,
    pub y2: T,
    pub half_width: T,
}

fn tightest<T: Real>(graph: &QuantumGraph<T>) -> Result<GraphClassParams<T>> {
    GraphClassParams::tightest(graph).map_err(|_| Error::Rejected("graph has no edges".into()))
}

/// Sup of `|f'/f|` on the lines `Im z = y1` and `Im z = y2`.
fn line_sups<T: Real>(graph: &QuantumGraph<T>, y1: T, y2: T) -> Result<(T, T)> {
    let params = tightest(graph)?;
    let y = strip_depth(&params);
    if !(y1 < y) {
        return Err(Error::Domain(format!("lower line y1 = {y1} must lie below Y = {y}")));
    }
    if !(y2 > T::zero()) {
        return Err(Error::Domain(format!("upper line y2 = {y2} must be positive")));
    }
    let two_l = graph.total_length() * T::lit(2.0);
    let p = (-y2 * params.l_min).exp();
    let q = ((y1 - y) * params.l_min).exp();
    Ok((two_l + two_l * q / (T::one() - q), two_l * p / (T::one() - p)))
}

/// Bound on the part of both line integrals outside `|x - x0| <= half_width`.
pub fn truncation_bound<T: Real>(
    graph: &QuantumGraph<T>,
    g: &GaussianTest<T>,
    y1: T,
    y2: T,
    half_width: T,
) -> Result<T> {
    let (sup1, sup2) = line_sups(graph, y1, y2)?;
    Ok(sup1 * g.tail_mass(y1, half_width) + sup2 * g.tail_mass(y2, half_width))
}

/// Smallest `t` on a bisection grid with `bound(t) <= target`.
fn smallest_width<T: Real>(target: T, bound: impl Fn(T) -> Result<T>) -> Result<T> {
    let mut hi = T::one();
    for _ in 0..200 {
        if bound(hi)? <= target {
            break;
        }
        hi = hi + hi;
    }
    if bound(hi)? > target {
        return Err(Error::Truncation { bound: bound(hi)?.as_f64(), tol: target.as_f64() });
    }
    let mut lo = T::zero();
    for _ in 0..60 {
        let mid = (lo + hi) / T::lit(2.0);
        if bound(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn quad_options<T: Real>(tol: T, l_max: T) -> AdaptiveOptions<T> {
    AdaptiveOptions {
        abs_tol: tol,
        rel_tol: T::lit(1e-14),
        initial_width: T::lit(0.25).min(T::lit(0.5) / l_max),
        max_depth: 40,
        order: 16,
    }
}

/// Both line integrals over `|x - x0| <= half_width`, with the truncation
/// bound for the omitted tails. Fails with [`Error::Truncation`] when that
/// bound exceeds `tol`.
pub fn boundary_integral<T: Real>(
    graph: &QuantumGraph<T>,
    g: &GaussianTest<T>,
    y1: T,
    y2: T,
    half_width: T,
    tol: T,
) -> Result<LineIntegrals<T>> {
    let sec = Secular::new(graph);
    boundary_integral_with(&sec, graph, &TestFunction::Gaussian(*g), y1, y2, half_width, tol)
}

fn boundary_integral_with<T: Real>(
    sec: &Secular<T>,
    graph: &QuantumGraph<T>,
    g: &TestFunction<T>,
    y1: T,
    y2: T,
    half_width: T,
    tol: T,
) -> Result<LineIntegrals<T>> {
    let mut truncation = T::zero();
    for part in g.parts() {
        truncation = truncation + truncation_bound(graph, &part, y1, y2, half_width)?;
    }
    if truncation > tol {
        return Err(Error::Truncation { bound: truncation.as_f64(), tol: tol.as_f64() });
    }
    let l_max = graph.max_length().unwrap_or(T::one());
    let opts = quad_options(tol / T::lit(10.0), l_max);
    let parts = g.parts();
    // the window covers `half_width` around every centre
    let x_lo = parts.iter().map(|p| p.x0()).fold(T::infinity(), T::min) - half_width;
    let x_hi = parts.iter().map(|p| p.x0()).fold(T::neg_infinity(), T::max) + half_width;
    let line = |y: T| {
        integrate_adaptive(
            |x: T| {
                let z = Complex::new(x, y);
                let e = sec.evaluate(z);
                if e.singular {
                    return Err(Error::Singular { re: x.as_f64(), im: y.as_f64() });
                }
                let gz = parts.iter().fold(Complex::new(T::zero(), T::zero()), |acc, p| acc + p.eval(z));
                Ok(gz * e.fprime_over_f)
            },
            x_lo,
            x_hi,
            &opts,
        )
    };
    let bottom = line(y1)?;
    let top = line(y2)?;
    Ok(LineIntegrals {
        value: bottom.value - top.value,
        bottom: bottom.value,
        top: top.value,
        truncation_bound: truncation,
        quadrature_error: bottom.error_estimate + top.error_estimate,
        y1,
        y2,
        half_width,
    })
}

/// As [`boundary_integral`], choosing the window so the truncation bound is
/// a quarter of `tol`.
pub fn boundary_integral_auto<T: Real>(
    graph: &QuantumGraph<T>,
    g: &GaussianTest<T>,
    y1: T,
    y2: T,
    tol: T,
) -> Result<LineIntegrals<T>> {
    let t = smallest_width(tol / T::lit(4.0), |t| truncation_bound(graph, g, y1, y2, t))?;
    boundary_integral(graph, g, y1, y2, t, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceSum<T> {
    /// `2 pi i sum g(z)` over the located resonances, with multiplicity.
    pub value: Complex<T>,
    /// Bound on the contribution of resonances outside the region.
    pub tail_bound: T,
    pub count: usize,
}

/// Bound on `2 pi |sum g(z)|` over resonances with real part outside
/// `[x_lo, x_hi]`: each vertical strip of width `1/Lmin` holds at most `N0`
/// of them, and `|g|` is bounded there by its value at the nearest edge.
pub fn resonance_tail_bound<T: Real>(graph: &QuantumGraph<T>, g: &GaussianTest<T>, x_lo: T, x_hi: T) -> Result<T> {
    let params = tightest(graph)?;
    let y = strip_depth(&params);
    let n0 = jensen_n0(&params, graph.total_length());
    let dy = (g.anchor.im - y).abs().max(g.anchor.im.abs());
    let lift = (g.a * dy * dy).exp();
    let w = T::one() / params.l_min;
    let x0 = g.x0();
    let mut sum = T::zero();
    for side in [x_hi - x0, x0 - x_lo] {
        for n in 0..100_000usize {
            let d = (side + w * T::from_usize_lossy(n)).max(T::zero());
            let term = (-g.a * d * d).exp();
            sum = sum + term;
            if d > T::zero() && term <= T::epsilon() * sum.max(T::min_positive_value()) {
                break;
            }
        }
    }
    Ok((T::PI() + T::PI()) * n0 * lift * sum)
}

/// `2 pi i sum g(z)` over the given resonances.
pub fn resonance_sum_from<T: Real>(
    graph: &QuantumGraph<T>,
    g: &GaussianTest<T>,
    set: &ResonanceSet<T>,
) -> Result<ResonanceSum<T>> {
    let params = tightest(graph)?;
    let y = strip_depth(&params);
    if set.region.y_lo > y || set.region.y_hi < T::zero() {
        return Err(Error::Domain("region does not cover the resonance strip".into()));
    }
    let two_pi_i = imag_unit::<T>() * (T::PI() + T::PI());
    let value = set.entries.iter().fold(Complex::new(T::zero(), T::zero()), |acc, e| {
        acc + g.eval(e.z) * T::from_usize_lossy(e.multiplicity)
    }) * two_pi_i;
    Ok(ResonanceSum {
        value,
        tail_bound: resonance_tail_bound(graph, g, set.region.x_lo, set.region.x_hi)?,
        count: set.total,
    })
}

/// Locates the resonances of `rect` and sums `g` over them.
pub fn resonance_sum<T: Real>(
    graph: &QuantumGraph<T>,
    g: &GaussianTest<T>,
    rect: &Rectangle<T>,
    opts: &FinderOptions<T>,
) -> Result<ResonanceSum<T>> {
    let set = locate_with(&Secular::new(graph), rect, opts)?;
    resonance_sum_from(graph, g, &set)
}

/// Strip window around `g` whose resonance tail is below `tol`.
pub fn resonance_window<T: Real>(graph: &QuantumGraph<T>, g: &GaussianTest<T>, tol: T) -> Result<Rectangle<T>> {
    let y = strip_depth(&tightest(graph)?);
    let x0 = g.x0();
    let w = smallest_width(tol, |w| resonance_tail_bound(graph, g, x0 - w, x0 + w))?;
    let margin = T::lit(0.1);
    Rectangle::new(x0 - w, x0 + w, y - margin, margin)
}

/// Locates resonances in `rect`, widening it slightly when a zero sits on a
/// vertical edge.
pub fn locate_nudged<T: Real>(sec: &Secular<T>, rect: &Rectangle<T>, opts: &FinderOptions<T>) -> Result<ResonanceSet<T>> {
    let mut last = None;
    for k in 0..16 {
        let d = T::lit(0.0137) * T::from_usize_lossy(k);
        let r = Rectangle::new(rect.x_lo - d, rect.x_hi + d * T::lit(1.3), rect.y_lo, rect.y_hi)?;
        match locate_with(sec, &r, opts) {
            Err(e @ Error::BoundaryProximity { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceCheckReport<T> {
    pub lhs: Complex<T>,
    pub rhs: Complex<T>,
    pub residual: T,
    /// `tol * max(1, |lhs|)`.
    pub budget: T,
    pub truncation_bound: T,
    pub resonance_tail_bound: T,
    pub quadrature_error_estimate: T,
    pub y1: T,
    pub y2: T,
    pub half_width: T,
    pub region: Rectangle<T>,
    pub resonance_count: usize,
    pub pass: bool,
}

impl<T: Real> TraceCheckReport<T> {
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        use crate::io::fmt17;
        vec![
            ("lhs_re", fmt17(self.lhs.re)),
            ("lhs_im", fmt17(self.lhs.im)),
            ("rhs_re", fmt17(self.rhs.re)),
            ("rhs_im", fmt17(self.rhs.im)),
            ("residual", fmt17(self.residual)),
            ("budget", fmt17(self.budget)),
            ("truncation_bound", fmt17(self.truncation_bound)),
            ("resonance_tail_bound", fmt17(self.resonance_tail_bound)),
            ("quadrature_error_estimate", fmt17(self.quadrature_error_estimate)),
            ("y1", fmt17(self.y1)),
            ("y2", fmt17(self.y2)),
            ("half_width", fmt17(self.half_width)),
            ("region_x_lo", fmt17(self.region.x_lo)),
            ("region_x_hi", fmt17(self.region.x_hi)),
            ("resonance_count", self.resonance_count.to_string()),
            ("pass", self.pass.to_string()),
        ]
    }
}

fn require_unbalanced<T: Real>(graph: &QuantumGraph<T>) -> Result<()> {
    if graph.edge_count() == 0 {
        return Err(Error::Rejected("graph has no edges".into()));
    }
    if !graph.is_unbalanced() {
        return Err(Error::Rejected("graph is balanced at some vertex (n(v) = d(v))".into()));
    }
    Ok(())
}

/// Evaluates both sides of the trace identity for `g`.
pub fn trace_check<T: Real>(
    graph: &QuantumGraph<T>,
    g: &GaussianTest<T>,
    y1: T,
    y2: T,
    tol: T,
    opts: &FinderOptions<T>,
) -> Result<TraceCheckReport<T>> {
    require_unbalanced(graph)?;
    let sec = Secular::new(graph);
    let rect = resonance_window(graph, g, tol / T::lit(10.0))?;
    let set = locate_nudged(&sec, &rect, opts)?;
    trace_check_with(graph, g, y1, y2, tol, &set)
}

/// As [`trace_check`], with resonances already located in a region wide
/// enough for `g`.
pub fn trace_check_with<T: Real>(
    graph: &QuantumGraph<T>,
    g: &GaussianTest<T>,
    y1: T,
    y2: T,
    tol: T,
    set: &ResonanceSet<T>,
) -> Result<TraceCheckReport<T>> {
    require_unbalanced(graph)?;
    let sec = Secular::new(graph);
    let lhs = resonance_sum_from(graph, g, set)?;
    let t = smallest_width(tol / T::lit(10.0), |t| truncation_bound(graph, g, y1, y2, t))?;
    let rhs = boundary_integral_with(&sec, graph, &TestFunction::Gaussian(*g), y1, y2, t, tol / T::lit(10.0))?;
    let residual = (lhs.value - rhs.value).norm();
    let budget = tol * lhs.value.norm().max(T::one());
    Ok(TraceCheckReport {
        lhs: lhs.value,
        rhs: rhs.value,
        residual,
        budget,
        truncation_bound: rhs.truncation_bound,
        resonance_tail_bound: lhs.tail_bound,
        quadrature_error_estimate: rhs.quadrature_error,
        y1,
        y2,
        half_width: t,
        region: set.region,
        resonance_count: lhs.count,
        pass: residual <= budget,
    })
}

/// Right-hand side for a sum of Gaussians, over a common window.
pub fn boundary_integral_sum<T: Real>(
    graph: &QuantumGraph<T>,
    g: &GaussianTest<T>,
    h: &GaussianTest<T>,
    y1: T,
    y2: T,
    half_width: T,
    tol: T,
) -> Result<LineIntegrals<T>> {
    let sec = Secular::new(graph);
    boundary_integral_with(&sec, graph, &TestFunction::Sum(*g, *h), y1, y2, half_width, tol)
}

/// `x,re,im` samples of `g f'/f` along `Im z = y`.
pub fn integrand_samples_csv<T: Real>(graph: &QuantumGraph<T>, g: &GaussianTest<T>, y: T, xs: &[T]) -> String {
    use crate::io::fmt17;
    let sec = Secular::new(graph);
    let mut out = String::from("x,re,im\n");
    for &x in xs {
        let z = Complex::new(x, y);
        let v = g.eval(z) * sec.evaluate(z).fprime_over_f;
        let _ = writeln!(out, "{},{},{}", fmt17(x), fmt17(v.re), fmt17(v.im));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Largest deviation of a count from the fitted line.
    pub intercept_band: T,
    /// `(R actually used, count with |Re z| <= R)`.
    pub samples: Vec<(T, usize)>,
}

/// Counts resonances with `|Re z| <= R` (whole strip) for each `R` and fits
/// `N(R) = slope R + intercept` by least squares.
///
/// Counts use real-part windows rather than disks; the difference is bounded
/// because every resonance lies in the strip. Consecutive windows share
/// their vertical edges, so only the new slabs are integrated. An `R` whose
/// edge passes through a resonance is moved outward by a few thousandths and
/// the moved value is recorded.
pub fn weyl_fit<T: Real>(graph: &QuantumGraph<T>, r_values: &[T], opts: &ContourOptions<T>) -> Result<WeylFit<T>> {
    require_unbalanced(graph)?;
    if r_values.len() < 2 || r_values.windows(2).any(|w| !(w[0] < w[1])) || !(r_values[0] > T::zero()) {
        return Err(Error::Parameter("R values must be positive and strictly increasing".into()));
    }
    let sec = Secular::new(graph);
    let y = strip_depth(&tightest(graph)?);
    let margin = T::lit(0.1);
    let (y_lo, y_hi) = (y - margin, margin);
    let nudge = |r: T, k: usize| r + T::lit(0.0031) * T::from_usize_lossy(k);
    let mut samples = Vec::with_capacity(r_values.len());
    let mut prev: Option<T> = None;
    let mut total = 0usize;
    for &r in r_values {
        let mut last = None;
        let mut done = false;
        for k in 0..16 {
            let rk = nudge(r, k);
            let counted = (|| -> Result<usize> {
                match prev {
                    None => winding_count_with(&sec, &Rectangle::new(-rk, rk, y_lo, y_hi)?, opts),
                    Some(p) => {
                        let right = winding_count_with(&sec, &Rectangle::new(p, rk, y_lo, y_hi)?, opts)?;
                        let left = winding_count_with(&sec, &Rectangle::new(-rk, -p, y_lo, y_hi)?, opts)?;
                        Ok(right + left)
                    }
                }
            })();
            match counted {
                Ok(n) => {
                    total += n;
                    samples.push((rk, total));
                    prev = Some(rk);
                    done = true;
                    break;
                }
                Err(e @ Error::BoundaryProximity { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        if !done {
            return Err(last.unwrap());
        }
    }
    let n = T::from_usize_lossy(samples.len());
    let mean_r = samples.iter().map(|s| s.0).sum::<T>() / n;
    let mean_n = samples.iter().map(|s| T::from_usize_lossy(s.1)).sum::<T>() / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for &(r, c) in &samples {
        let dx = r - mean_r;
        sxy = sxy + dx * (T::from_usize_lossy(c) - mean_n);
        sxx = sxx + dx * dx;
    }
    let slope = sxy / sxx;
    let intercept = mean_n - slope * mean_r;
    let intercept_band = samples
        .iter()
        .map(|&(r, c)| (T::from_usize_lossy(c) - slope * r - intercept).abs())
        .fold(T::zero(), T::max);
    Ok(WeylFit { slope, intercept, intercept_band, samples })
}
