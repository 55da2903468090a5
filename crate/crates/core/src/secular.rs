//! The bond scattering matrix `S`, the phase matrix `D(z)`, `U(z) = S D(z)`,
//! and the secular determinant `f(z) = det(Id - U(z))` with its logarithmic
//! derivative.
//!
//! `f` is never formed directly: the LU pivots give `ln|f|` and a unit phase,
//! because `|f|` grows doubly exponentially as `Im z` decreases.

use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Bond, GraphClassParams, QuantumGraph};
use crate::linalg::{CMatrix, Lu};
use crate::scalar::{imag_unit, Real};

/// Value of the secular determinant and its log-derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularEvaluation<T> {
    pub z: Complex<T>,
    /// `det(Id - U(z))`; may overflow to infinity where `log_abs_f` does not.
    pub f: Complex<T>,
    /// `ln|f|`, `-inf` when the factorization is singular.
    pub log_abs_f: T,
    /// `f / |f|`.
    pub phase: Complex<T>,
    /// `f'/f`; infinite when `singular`.
    pub fprime_over_f: Complex<T>,
    /// Ratio of largest to smallest LU pivot.
    pub condition_hint: T,
    /// `z` is a zero of `f` to working precision.
    pub singular: bool,
}

impl<T: Real> SecularEvaluation<T> {
    /// Principal branch of `ln f`.
    pub fn log_f(&self) -> Complex<T> {
        Complex::new(self.log_abs_f, self.phase.im.atan2(self.phase.re))
    }
}

/// Per-graph data shared by all evaluations: bonds, `S` (dense and by rows)
/// and the constants of the tightest class containing the graph.
#[derive(Debug, Clone)]
pub struct Secular<T> {
    bonds: Vec<Bond<T>>,
    lengths: Vec<T>,
    s: CMatrix<T>,
    rows: Vec<Vec<(usize, T)>>,
    total_length: T,
    /// Strip depth of the tightest class, `-ln(D + n0) / Lmin`.
    strip_depth: Option<T>,
    l_min: T,
}

fn sigma<T: Real>(graph: &QuantumGraph<T>, b: &Bond<T>, c: &Bond<T>) -> T {
    if b.origin_index != c.origin_index {
        return T::zero();
    }
    let v = b.origin_index;
    let deg = graph.degree(v) + graph.leads(v) as usize;
    assert!(deg > 0, "bond at a vertex with no attached edges");
    let t = T::lit(2.0) / T::from_usize_lossy(deg);
    if b.id == c.id {
        t - T::one()
    } else {
        t
    }
}

impl<T: Real> Secular<T> {
    pub fn new(graph: &QuantumGraph<T>) -> Self {
        let bonds = graph.bonds();
        let n = bonds.len();
        let mut s = CMatrix::zeros(n);
        let mut rows = vec![Vec::new(); n];
        for b in &bonds {
            for c in &bonds {
                // (S)_{b,b'} = sigma_{b, reverse(b')}; nonzero iff t_{b'} = o_b
                if c.terminus_index != b.origin_index {
                    continue;
                }
                let val = sigma(graph, b, &bonds[c.reverse]);
                s[(b.id, c.id)] = Complex::new(val, T::zero());
                if val != T::zero() {
                    rows[b.id].push((c.id, val));
                }
            }
        }
        let params = GraphClassParams::tightest(graph).ok();
        let strip_depth = params.as_ref().map(|p| crate::bounds::strip_depth(p));
        Self {
            lengths: bonds.iter().map(|b| b.length).collect(),
            bonds,
            s,
            rows,
            total_length: graph.total_length(),
            strip_depth,
            l_min: graph.min_length().unwrap_or(T::one()),
        }
    }

    pub fn bonds(&self) -> &[Bond<T>] {
        &self.bonds
    }

    pub fn dim(&self) -> usize {
        self.bonds.len()
    }

    pub fn total_length(&self) -> T {
        self.total_length
    }

    pub fn s_matrix(&self) -> &CMatrix<T> {
        &self.s
    }

    /// `e^{i z L_b}` for every bond.
    pub fn phases(&self, z: Complex<T>) -> Vec<Complex<T>> {
        let i = imag_unit::<T>();
        self.lengths.iter().map(|&l| (i * z * l).exp()).collect()
    }

    pub fn u_matrix(&self, z: Complex<T>) -> CMatrix<T> {
        let ph = self.phases(z);
        let mut u = CMatrix::zeros(self.dim());
        for (b, row) in self.rows.iter().enumerate() {
            for &(c, s) in row {
                u[(b, c)] = ph[c] * s;
            }
        }
        u
    }

    fn factor(&self, z: Complex<T>) -> (Lu<T>, Vec<Complex<T>>, T) {
        let n = self.dim();
        let ph = self.phases(z);
        let mut m = CMatrix::identity(n);
        let mut scale = T::zero();
        for (b, row) in self.rows.iter().enumerate() {
            let mut row_sum = T::zero();
            for &(c, s) in row {
                let u = ph[c] * s;
                m[(b, c)] = m[(b, c)] - u;
                row_sum = row_sum + u.norm();
            }
            scale = scale.max(row_sum);
        }
        (Lu::factor(&m), ph, scale)
    }

    fn is_singular(lu: &Lu<T>, scale: T) -> bool {
        lu.dim() > 0 && lu.min_pivot() <= T::lit(1e3) * T::epsilon() * scale.max(T::one())
    }

    /// `f(z)`, `ln|f(z)|` and `f'/f(z) = -Tr[U'(z) (Id - U(z))^{-1}]`, the
    /// trace being accumulated from one solve per bond against a single
    /// factorization.
    pub fn evaluate(&self, z: Complex<T>) -> SecularEvaluation<T> {
        let n = self.dim();
        let one = Complex::new(T::one(), T::zero());
        if n == 0 {
            return SecularEvaluation {
                z,
                f: one,
                log_abs_f: T::zero(),
                phase: one,
                fprime_over_f: Complex::new(T::zero(), T::zero()),
                condition_hint: T::one(),
                singular: false,
            };
        }
        let (lu, ph, scale) = self.factor(z);
        let (log_abs_f, phase) = lu.log_det();
        let condition_hint = lu.max_pivot() / lu.min_pivot();
        if Self::is_singular(&lu, scale) {
            return SecularEvaluation {
                z,
                f: Complex::new(T::zero(), T::zero()),
                log_abs_f: T::neg_infinity(),
                phase,
                fprime_over_f: Complex::new(T::infinity(), T::infinity()),
                condition_hint,
                singular: true,
            };
        }
        let trace = self.trace_u_prime_resolvent(&lu, &ph);
        SecularEvaluation {
            z,
            f: phase * log_abs_f.exp(),
            log_abs_f,
            phase,
            fprime_over_f: -trace,
            condition_hint,
            singular: false,
        }
    }

    /// `[U'(z)(Id - U(z))^{-1}]_{b,b}` given column `b` of the resolvent.
    fn diagonal_entry(&self, b: usize, column: &[Complex<T>], ph: &[Complex<T>]) -> Complex<T> {
        let i = imag_unit::<T>();
        self.rows[b].iter().fold(Complex::new(T::zero(), T::zero()), |acc, &(c, s)| {
            acc + ph[c] * i * (s * self.lengths[c]) * column[c]
        })
    }

    fn trace_u_prime_resolvent(&self, lu: &Lu<T>, ph: &[Complex<T>]) -> Complex<T> {
        let n = self.dim();
        let entry = |b: usize| self.diagonal_entry(b, &lu.inverse_column(b), ph);
        let zero = Complex::new(T::zero(), T::zero());
        if n >= 48 {
            let parts: Vec<Complex<T>> = (0..n).into_par_iter().map(entry).collect();
            parts.into_iter().fold(zero, |a, b| a + b)
        } else {
            (0..n).map(entry).fold(zero, |a, b| a + b)
        }
    }

    /// Diagonal entry of `U'(z) (Id - U(z))^{-1}` at bond `b0`, by one solve.
    pub fn f_entry(&self, b0: usize, z: Complex<T>) -> Result<Complex<T>> {
        if b0 >= self.dim() {
            return Err(Error::Domain(format!("bond {b0} out of range")));
        }
        let (lu, ph, scale) = self.factor(z);
        if Self::is_singular(&lu, scale) {
            return Err(Error::Singular { re: z.re.as_f64(), im: z.im.as_f64() });
        }
        Ok(self.diagonal_entry(b0, &lu.inverse_column(b0), &ph))
    }

    /// All diagonal entries of `U'(z) (Id - U(z))^{-1}`.
    pub fn f_entries(&self, z: Complex<T>) -> Result<Vec<Complex<T>>> {
        let (lu, ph, scale) = self.factor(z);
        if Self::is_singular(&lu, scale) {
            return Err(Error::Singular { re: z.re.as_f64(), im: z.im.as_f64() });
        }
        Ok((0..self.dim())
            .map(|b| self.diagonal_entry(b, &lu.inverse_column(b), &ph))
            .collect())
    }

    fn trace_with_lengths(&self, p: &CMatrix<T>) -> Complex<T> {
        (0..self.dim()).fold(Complex::new(T::zero(), T::zero()), |acc, b| acc + p[(b, b)] * self.lengths[b])
    }

    fn sum_series(&self, step: &CMatrix<T>, ratio: T, head: Complex<T>, sign: T) -> Complex<T> {
        // sign * i * sum_{k>=1} Tr[step^k L], stopped by the geometric tail bound
        let i = imag_unit::<T>();
        let two_l = self.total_length + self.total_length;
        let mut power = step.clone();
        let mut sum = Complex::new(T::zero(), T::zero());
        let mut rk = ratio;
        for _ in 0..100_000 {
            sum = sum + self.trace_with_lengths(&power);
            let tail = two_l * rk * ratio / (T::one() - ratio);
            if tail <= T::epsilon() * (sum.norm() + two_l) {
                break;
            }
            power = power.mul(step);
            rk = rk * ratio;
        }
        head + i * sum * sign
    }

    /// Neumann-series evaluation `f'/f = -i Σ_{k≥1} Tr[U^k L]`, valid for `Im z > 0`.
    pub fn log_derivative_neumann(&self, z: Complex<T>) -> Result<Complex<T>> {
        if z.im <= T::zero() {
            return Err(Error::Domain("Neumann series requires Im z > 0".into()));
        }
        let ratio = (-z.im * self.l_min).exp();
        let u = self.u_matrix(z);
        Ok(self.sum_series(&u, ratio, Complex::new(T::zero(), T::zero()), -T::one()))
    }

    /// Inverse-power series `f'/f = 2i L_Q + i Σ_{k≥1} Tr[U^{-k} L]`, valid
    /// below the strip (`Im z < Y` for the tightest class of the graph).
    pub fn log_derivative_inverse_series(&self, z: Complex<T>) -> Result<Complex<T>> {
        let y = self
            .strip_depth
            .ok_or_else(|| Error::Domain("graph has no edges".into()))?;
        if z.im >= y {
            return Err(Error::Domain(format!("inverse series requires Im z < {y}")));
        }
        let n = self.dim();
        let lu = Lu::factor(&self.s);
        let i = imag_unit::<T>();
        let mut inv = CMatrix::zeros(n);
        for c in 0..n {
            let col = lu.inverse_column(c);
            for (b, v) in col.into_iter().enumerate() {
                // U^{-1} = D^{-1} S^{-1}
                inv[(b, c)] = (-i * z * self.lengths[b]).exp() * v;
            }
        }
        let ratio = ((z.im - y) * self.l_min).exp();
        let two_l = self.total_length + self.total_length;
        Ok(self.sum_series(&inv, ratio, i * two_l, T::one()))
    }
}

pub fn build_s<T: Real>(graph: &QuantumGraph<T>) -> CMatrix<T> {
    Secular::new(graph).s_matrix().clone()
}

pub fn build_u<T: Real>(graph: &QuantumGraph<T>, z: Complex<T>) -> CMatrix<T> {
    Secular::new(graph).u_matrix(z)
}

pub fn evaluate<T: Real>(graph: &QuantumGraph<T>, z: Complex<T>) -> SecularEvaluation<T> {
    Secular::new(graph).evaluate(z)
}

/// Closed-form bound on the logarithmic derivative away from the strip.
///
/// For `Im z > 0` this bounds `|f'/f|`; for `Im z < Y` it bounds
/// `|f'/f - 2i L_Q|`. Inside `[Y, 0]` no bound is available.
pub fn log_derivative_series_bound<T: Real>(
    graph: &QuantumGraph<T>,
    z: Complex<T>,
    params: &GraphClassParams<T>,
) -> Result<T> {
    let two_l = graph.total_length() * T::lit(2.0);
    let y = crate::bounds::strip_depth(params);
    let q = if z.im > T::zero() {
        (-z.im * params.l_min).exp()
    } else if z.im < y {
        ((z.im - y) * params.l_min).exp()
    } else {
        return Err(Error::Domain(format!(
            "no series bound for Im z = {} inside [{y}, 0]",
            z.im
        )));
    };
    Ok(two_l * q / (T::one() - q))
}

/// Row-major CSV dump, one matrix row per line as `re,im` pairs.
pub fn matrix_csv<T: Real>(m: &CMatrix<T>) -> String {
    let mut out = String::new();
    for r in 0..m.dim() {
        let line: Vec<String> = m
            .row(r)
            .iter()
            .map(|z| format!("{},{}", crate::io::fmt17(z.re), crate::io::fmt17(z.im)))
            .collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}
