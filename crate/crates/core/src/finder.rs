//! Argument-principle search for zeros of the secular determinant.
//!
//! Every box carries the four directed edge integrals of `f'/f`, so a
//! split only integrates the new dividing segment and the halves of the two
//! cut sides. Each accepted quadrature panel is checked against the change of
//! `ln f` between its endpoints, which catches spikes from nearby zeros that
//! slip between the Gauss nodes.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{GraphClassParams, QuantumGraph};
use crate::quadrature::GaussLegendre;
use crate::scalar::{wrap_angle, Real};
use crate::secular::{Secular, SecularEvaluation};

/// Closed axis-parallel rectangle `[x_lo, x_hi] x [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle<T> {
    pub x_lo: T,
    pub x_hi: T,
    pub y_lo: T,
    pub y_hi: T,
}

impl<T: Real> Rectangle<T> {
    pub fn new(x_lo: T, x_hi: T, y_lo: T, y_hi: T) -> Result<Self> {
        if !(x_lo < x_hi && y_lo < y_hi) || ![x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!(
                "degenerate rectangle [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]"
            )));
        }
        Ok(Self { x_lo, x_hi, y_lo, y_hi })
    }

    pub fn width(&self) -> T {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> T {
        self.y_hi - self.y_lo
    }

    pub fn diameter(&self) -> T {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex<T> {
        let two = T::lit(2.0);
        Complex::new((self.x_lo + self.x_hi) / two, (self.y_lo + self.y_hi) / two)
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        z.re >= self.x_lo && z.re <= self.x_hi && z.im >= self.y_lo && z.im <= self.y_hi
    }

    /// Corners in counter-clockwise order starting at `(x_lo, y_lo)`.
    fn corners(&self) -> [Complex<T>; 4] {
        [
            Complex::new(self.x_lo, self.y_lo),
            Complex::new(self.x_hi, self.y_lo),
            Complex::new(self.x_hi, self.y_hi),
            Complex::new(self.x_lo, self.y_hi),
        ]
    }
}

/// `[x_lo, x_hi] x [Y - margin, margin]`.
pub fn strip_region<T: Real>(params: &GraphClassParams<T>, x_lo: T, x_hi: T, margin: T) -> Result<Rectangle<T>> {
    let y = crate::bounds::strip_depth(params);
    if margin < T::zero() {
        return Err(Error::Domain("margin must be non-negative".into()));
    }
    Rectangle::new(x_lo, x_hi, y - margin, margin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceEntry<T> {
    pub z: Complex<T>,
    pub multiplicity: usize,
    /// `|f(z)|` at the reported point.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceSet<T> {
    /// Sorted by real part, then imaginary part.
    pub entries: Vec<ResonanceEntry<T>>,
    pub region: Rectangle<T>,
    /// Sum of multiplicities; equals the winding count of `region`.
    pub total: usize,
}

impl<T: Real> ResonanceSet<T> {
    pub fn to_csv(&self) -> String {
        use crate::io::fmt17;
        let mut out = String::from("re,im,multiplicity,abs_f_residual\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt17(e.z.re),
                fmt17(e.z.im),
                e.multiplicity,
                fmt17(e.residual)
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ContourOptions<T> {
    pub order: usize,
    /// Initial panel length along a segment.
    pub initial_width: T,
    /// Absolute tolerance on a whole segment integral.
    pub abs_tol: T,
    /// Allowed mismatch between a panel integral and the change of `ln f`
    /// across the panel (imaginary part taken modulo `2 pi`).
    pub phase_tol: T,
    pub max_depth: usize,
}

impl<T: Real> Default for ContourOptions<T> {
    fn default() -> Self {
        Self {
            order: 12,
            initial_width: T::lit(0.25),
            abs_tol: T::lit(1e-6),
            phase_tol: T::lit(0.05),
            max_depth: 40,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FinderOptions<T> {
    /// Target accuracy of reported locations.
    pub tol: T,
    /// Maximal number of boxes examined before giving up.
    pub max_boxes: usize,
    /// Boxes below this diameter try Newton from their center.
    pub newton_diameter: T,
    /// Half-width of the square used to confirm a multiple zero; distinct
    /// zeros closer than this are reported as one cluster.
    pub cluster_radius: T,
    pub contour: ContourOptions<T>,
}

impl<T: Real> Default for FinderOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_boxes: 200_000,
            newton_diameter: T::lit(0.5),
            cluster_radius: T::lit(1e-6),
            contour: ContourOptions::default(),
        }
    }
}

impl<T: Real> FinderOptions<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }
}

/// Directed integral of `f'/f` along a straight segment.
#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    value: Complex<T>,
    error: T,
}

impl<T: Real> std::ops::Neg for Segment<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: -self.value, error: self.error }
    }
}

/// Shared state for contour work on one graph.
pub struct Contour<'a, T> {
    sec: &'a Secular<T>,
    rule: GaussLegendre<T>,
    opts: ContourOptions<T>,
}

struct Panel<T> {
    t0: T,
    t1: T,
    e0: SecularEvaluation<T>,
    e1: SecularEvaluation<T>,
    whole: Complex<T>,
    depth: usize,
}

fn arg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

impl<'a, T: Real> Contour<'a, T> {
    pub fn new(sec: &'a Secular<T>, opts: ContourOptions<T>) -> Self {
        Self { sec, rule: GaussLegendre::new(opts.order), opts }
    }

    fn eval(&self, z: Complex<T>) -> Result<SecularEvaluation<T>> {
        let e = self.sec.evaluate(z);
        if e.singular || !e.fprime_over_f.re.is_finite() || !e.fprime_over_f.im.is_finite() {
            return Err(Error::BoundaryProximity { re: z.re.as_f64(), im: z.im.as_f64() });
        }
        Ok(e)
    }

    fn gauss(&self, a: Complex<T>, d: Complex<T>, t0: T, t1: T) -> Result<Complex<T>> {
        let half = (t1 - t0) / T::lit(2.0);
        let mid = (t0 + t1) / T::lit(2.0);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (&x, &w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            let z = a + d * (mid + half * x);
            acc = acc + self.eval(z)?.fprime_over_f * w;
        }
        Ok(acc * d * half)
    }

    fn consistent(&self, value: Complex<T>, e0: &SecularEvaluation<T>, e1: &SecularEvaluation<T>) -> bool {
        let dlog = e1.log_abs_f - e0.log_abs_f;
        let darg = arg(e1.phase) - arg(e0.phase);
        (value.re - dlog).abs() <= self.opts.phase_tol && wrap_angle(value.im - darg).abs() <= self.opts.phase_tol
    }

    fn segment(&self, a: Complex<T>, b: Complex<T>) -> Result<Segment<T>> {
        let d = b - a;
        let len = d.norm();
        let count = (len / self.opts.initial_width).ceil().to_usize().unwrap_or(1).max(1);
        let nf = T::from_usize_lossy(count);
        let parts: Vec<Result<Segment<T>>> = (0..count)
            .into_par_iter()
            .map(|k| {
                let t0 = T::from_usize_lossy(k) / nf;
                let t1 = if k + 1 == count { T::one() } else { T::from_usize_lossy(k + 1) / nf };
                let e0 = self.eval(a + d * t0)?;
                let e1 = self.eval(a + d * t1)?;
                let whole = self.gauss(a, d, t0, t1)?;
                self.refine(a, d, Panel { t0, t1, e0, e1, whole, depth: 0 })
            })
            .collect();
        let mut out = Segment { value: Complex::new(T::zero(), T::zero()), error: T::zero() };
        for p in parts {
            let p = p?;
            out.value = out.value + p.value;
            out.error = out.error + p.error;
        }
        Ok(out)
    }

    fn refine(&self, a: Complex<T>, d: Complex<T>, first: Panel<T>) -> Result<Segment<T>> {
        let mut out = Segment { value: Complex::new(T::zero(), T::zero()), error: T::zero() };
        let mut stack = vec![first];
        while let Some(p) = stack.pop() {
            let tm = (p.t0 + p.t1) / T::lit(2.0);
            let left = self.gauss(a, d, p.t0, tm)?;
            let right = self.gauss(a, d, tm, p.t1)?;
            let halves = left + right;
            let err = (halves - p.whole).norm();
            if err <= self.opts.abs_tol * (p.t1 - p.t0) && self.consistent(halves, &p.e0, &p.e1) {
                out.value = out.value + halves;
                out.error = out.error + err;
                continue;
            }
            let zm = a + d * tm;
            if p.depth >= self.opts.max_depth {
                return Err(Error::BoundaryProximity { re: zm.re.as_f64(), im: zm.im.as_f64() });
            }
            let em = self.eval(zm)?;
            stack.push(Panel { t0: tm, t1: p.t1, e0: em, e1: p.e1, whole: right, depth: p.depth + 1 });
            stack.push(Panel { t0: p.t0, t1: tm, e0: p.e0, e1: em, whole: left, depth: p.depth + 1 });
        }
        Ok(out)
    }

    /// Counter-clockwise edge integrals: bottom, right, top, left.
    fn edges(&self, rect: &Rectangle<T>) -> Result<[Segment<T>; 4]> {
        let c = rect.corners();
        Ok([
            self.segment(c[0], c[1])?,
            self.segment(c[1], c[2])?,
            self.segment(c[2], c[3])?,
            self.segment(c[3], c[0])?,
        ])
    }

    /// Winding count of `rect`.
    pub fn winding(&self, rect: &Rectangle<T>) -> Result<usize> {
        round_count(&self.edges(rect)?)
    }
}

/// `(1/2 pi i) sum` rounded, with the integer-resolution checks.
fn round_count<T: Real>(edges: &[Segment<T>; 4]) -> Result<usize> {
    let mut total = Complex::new(T::zero(), T::zero());
    let mut err = T::zero();
    for e in edges {
        total = total + e.value;
        err = err + e.error;
    }
    let two_pi = T::PI() + T::PI();
    let n = total.im / two_pi;
    let rounded = n.round();
    let quarter = T::lit(0.25);
    if (n - rounded).abs() > quarter || (total.re / two_pi).abs() > quarter || err / two_pi > T::lit(0.1) {
        return Err(Error::Resolution(format!(
            "contour integral / 2 pi i = {} {:+}i (error estimate {})",
            n,
            -total.re / two_pi,
            err / two_pi
        )));
    }
    if rounded < T::zero() {
        return Err(Error::Resolution(format!("negative winding count {rounded}")));
    }
    Ok(rounded.to_usize().unwrap_or(0))
}

/// Number of zeros of `f` inside `rect`, counted with multiplicity.
pub fn winding_count<T: Real>(graph: &QuantumGraph<T>, rect: &Rectangle<T>) -> Result<usize> {
    let sec = Secular::new(graph);
    winding_count_with(&sec, rect, &ContourOptions::default())
}

/// As [`winding_count`], reusing a prepared [`Secular`]. An unresolved
/// count is retried with tighter panel tolerances.
pub fn winding_count_with<T: Real>(sec: &Secular<T>, rect: &Rectangle<T>, opts: &ContourOptions<T>) -> Result<usize> {
    let mut o = *opts;
    let mut last = None;
    for _ in 0..3 {
        match Contour::new(sec, o).winding(rect) {
            Err(e @ Error::Resolution(_)) => last = Some(e),
            other => return other,
        }
        o.abs_tol = o.abs_tol * T::lit(1e-2);
        o.phase_tol = o.phase_tol * T::lit(0.5);
    }
    Err(last.unwrap())
}

struct SearchBox<T> {
    rect: Rectangle<T>,
    edges: [Segment<T>; 4],
    count: usize,
}

enum Outcome<T> {
    Found(ResonanceEntry<T>),
    Split(Vec<SearchBox<T>>),
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic offset in `[-1, 1]` from the box coordinates and a salt.
fn jitter<T: Real>(rect: &Rectangle<T>, salt: u64) -> T {
    let mut h = splitmix(salt);
    for v in [rect.x_lo, rect.x_hi, rect.y_lo, rect.y_hi] {
        h = splitmix(h ^ v.as_f64().to_bits());
    }
    T::lit((h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
}

struct Search<'a, T> {
    contour: Contour<'a, T>,
    opts: FinderOptions<T>,
}

impl<T: Real> Search<'_, T> {
    fn newton(&self, rect: &Rectangle<T>, m: usize) -> Option<(Complex<T>, SecularEvaluation<T>)> {
        let mf = T::from_usize_lossy(m);
        let mut z = rect.center();
        for _ in 0..100 {
            let e = self.contour.sec.evaluate(z);
            if e.singular {
                return Some((z, e));
            }
            let step = Complex::new(mf, T::zero()) / e.fprime_over_f;
            if !(step.re.is_finite() && step.im.is_finite()) {
                return None;
            }
            z = z - step;
            if !rect.contains(z) {
                return None;
            }
            let floor = T::epsilon() * T::lit(8.0) * z.norm().max(T::one());
            if step.norm() <= (self.opts.tol * T::lit(0.1)).max(floor) {
                let e = self.contour.sec.evaluate(z);
                return Some((z, e));
            }
        }
        None
    }

    fn entry(z: Complex<T>, m: usize, e: &SecularEvaluation<T>) -> ResonanceEntry<T> {
        let residual = if e.singular { T::zero() } else { e.log_abs_f.exp() };
        ResonanceEntry { z, multiplicity: m, residual }
    }

    /// Confirms that all `m` zeros of the box sit in a small square around `z`.
    fn confirm_cluster(&self, rect: &Rectangle<T>, z: Complex<T>, m: usize) -> bool {
        let h = self.opts.cluster_radius.max(self.opts.tol);
        let Ok(sq) = Rectangle::new(z.re - h, z.re + h, z.im - h, z.im + h) else {
            return false;
        };
        let inside = sq.x_lo >= rect.x_lo && sq.x_hi <= rect.x_hi && sq.y_lo >= rect.y_lo && sq.y_hi <= rect.y_hi;
        inside && matches!(self.contour.winding(&sq), Ok(k) if k == m)
    }

    fn process(&self, b: &SearchBox<T>) -> Result<Outcome<T>> {
        let m = b.count;
        let diam = b.rect.diameter();
        if diam <= self.opts.newton_diameter {
            if let Some((z, e)) = self.newton(&b.rect, m) {
                if m == 1 || self.confirm_cluster(&b.rect, z, m) {
                    return Ok(Outcome::Found(Self::entry(z, m, &e)));
                }
            }
        }
        if diam <= self.opts.tol {
            let z = b.rect.center();
            let e = self.contour.sec.evaluate(z);
            return Ok(Outcome::Found(Self::entry(z, m, &e)));
        }
        let mut last = None;
        for salt in 0..8u64 {
            match self.split(b, salt) {
                Ok(children) => return Ok(Outcome::Split(children)),
                Err(e @ (Error::BoundaryProximity { .. } | Error::Resolution(_))) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap())
    }

    fn split(&self, b: &SearchBox<T>, salt: u64) -> Result<Vec<SearchBox<T>>> {
        let r = b.rect;
        let c = &self.contour;
        let two = T::lit(2.0);
        let [bottom, right, top, left] = b.edges;
        let offset = T::lit(0.01) * jitter(&r, salt);
        let pairs = if r.width() >= r.height() {
            let xm = (r.x_lo + r.x_hi) / two + offset * r.width();
            let (p, q) = (Complex::new(xm, r.y_lo), Complex::new(xm, r.y_hi));
            let co = r.corners();
            let bl = c.segment(co[0], p)?;
            let br = c.segment(p, co[1])?;
            let tr = c.segment(co[2], q)?;
            let tl = c.segment(q, co[3])?;
            let mid = c.segment(p, q)?;
            vec![
                (Rectangle::new(r.x_lo, xm, r.y_lo, r.y_hi)?, [bl, mid, tl, left]),
                (Rectangle::new(xm, r.x_hi, r.y_lo, r.y_hi)?, [br, right, tr, -mid]),
            ]
        } else {
            let ym = (r.y_lo + r.y_hi) / two + offset * r.height();
            let (p, q) = (Complex::new(r.x_lo, ym), Complex::new(r.x_hi, ym));
            let co = r.corners();
            let rl = c.segment(co[1], q)?;
            let ru = c.segment(q, co[2])?;
            let lu = c.segment(co[3], p)?;
            let ll = c.segment(p, co[0])?;
            let mid = c.segment(p, q)?;
            vec![
                (Rectangle::new(r.x_lo, r.x_hi, r.y_lo, ym)?, [bottom, rl, -mid, ll]),
                (Rectangle::new(r.x_lo, r.x_hi, ym, r.y_hi)?, [mid, ru, top, lu]),
            ]
        };
        let mut children = Vec::with_capacity(2);
        let mut sum = 0;
        for (rect, edges) in pairs {
            let count = round_count(&edges)?;
            sum += count;
            if count > 0 {
                children.push(SearchBox { rect, edges, count });
            }
        }
        if sum != b.count {
            return Err(Error::Resolution(format!("children count {sum}, parent {}", b.count)));
        }
        Ok(children)
    }
}

/// Locates every zero of `f` in `rect` with its multiplicity.
pub fn locate_resonances<T: Real>(
    graph: &QuantumGraph<T>,
    rect: &Rectangle<T>,
    opts: &FinderOptions<T>,
) -> Result<ResonanceSet<T>> {
    let sec = Secular::new(graph);
    locate_with(&sec, rect, opts)
}

pub fn locate_with<T: Real>(sec: &Secular<T>, rect: &Rectangle<T>, opts: &FinderOptions<T>) -> Result<ResonanceSet<T>> {
    if !(opts.tol >= T::lit(1e3) * T::epsilon()) {
        return Err(Error::Parameter(format!("tolerance {} below 1e3 eps", opts.tol)));
    }
    let search = Search { contour: Contour::new(sec, opts.contour), opts: *opts };
    let edges = search.contour.edges(rect)?;
    let total = round_count(&edges)?;
    let mut entries = Vec::new();
    let mut queue = if total > 0 {
        vec![SearchBox { rect: *rect, edges, count: total }]
    } else {
        Vec::new()
    };
    let mut boxes = 0usize;
    while !queue.is_empty() {
        boxes += queue.len();
        if boxes > opts.max_boxes {
            let mut found: Vec<(f64, f64, usize)> = entries
                .iter()
                .map(|e: &ResonanceEntry<T>| (e.z.re.as_f64(), e.z.im.as_f64(), e.multiplicity))
                .collect();
            found.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return Err(Error::Budget { boxes, found });
        }
        let outcomes: Vec<Result<Outcome<T>>> = queue.par_iter().map(|b| search.process(b)).collect();
        let mut next = Vec::new();
        for o in outcomes {
            match o? {
                Outcome::Found(e) => entries.push(e),
                Outcome::Split(children) => next.extend(children),
            }
        }
        queue = next;
    }
    entries.sort_by(|a, b| {
        a.z.re
            .partial_cmp(&b.z.re)
            .unwrap()
            .then(a.z.im.partial_cmp(&b.z.im).unwrap())
    });
    let found: usize = entries.iter().map(|e| e.multiplicity).sum();
    debug_assert_eq!(found, total);
    Ok(ResonanceSet { entries, region: *rect, total })
}
