//! Dense complex matrices and a partially pivoted LU factorization whose
//! determinant is kept as log-magnitude plus unit phase.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::scalar::Real;

/// Square, row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Induced infinity norm (max absolute row sum); an upper bound on nothing
    /// in particular but a cheap scale.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Spectral norm estimate by power iteration on `A* A`.
    pub fn operator_norm(&self) -> T {
        let n = self.n;
        if n == 0 {
            return T::zero();
        }
        let adj = self.adjoint();
        // Deterministic, generic starting vector.
        let mut v: Vec<Complex<T>> = (0..n)
            .map(|i| Complex::new(T::one() + T::lit(0.37 * i as f64).sin(), T::lit(0.11 * i as f64).cos()))
            .collect();
        let mut sigma2 = T::zero();
        for _ in 0..500 {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if norm == T::zero() {
                return T::zero();
            }
            v.iter_mut().for_each(|z| *z = *z / norm);
            let w = adj.mul_vec(&self.mul_vec(&v));
            let next = v
                .iter()
                .zip(&w)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
                .re;
            let converged = (next - sigma2).abs() <= T::epsilon() * T::lit(16.0) * next;
            sigma2 = next;
            v = w;
            if converged {
                break;
            }
        }
        sigma2.max(T::zero()).sqrt()
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.n + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.n + c]
    }
}

/// `P A = L U` with unit-diagonal `L`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<Complex<T>>,
    perm: Vec<usize>,
    odd: bool,
}

impl<T: Real> Lu<T> {
    /// Never fails: an exactly zero pivot column is left in place and shows
    /// up through [`Lu::min_pivot`].
    pub fn factor(a: &CMatrix<T>) -> Self {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].norm_sqr();
            for r in k + 1..n {
                let v = lu[r * n + k].norm_sqr();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let pivot = lu[k * n + k];
            if best == T::zero() {
                continue;
            }
            let inv = Complex::new(T::one(), T::zero()) / pivot;
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let prow = &head[k * n..(k + 1) * n];
            for r in 0..n - k - 1 {
                let row = &mut tail[r * n..(r + 1) * n];
                let m = row[k] * inv;
                row[k] = m;
                if m.re == T::zero() && m.im == T::zero() {
                    continue;
                }
                for c in k + 1..n {
                    row[c] = row[c] - m * prow[c];
                }
            }
        }
        Self { n, lu, perm, odd }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn pivots(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        (0..self.n).map(move |i| self.lu[i * self.n + i])
    }

    pub fn min_pivot(&self) -> T {
        self.pivots().map(|p| p.norm()).fold(T::infinity(), T::min)
    }

    pub fn max_pivot(&self) -> T {
        self.pivots().map(|p| p.norm()).fold(T::zero(), T::max)
    }

    /// `(ln|det|, det/|det|)`; the magnitude is `-inf` for a singular matrix.
    pub fn log_det(&self) -> (T, Complex<T>) {
        let mut log_abs = T::zero();
        let mut phase = Complex::new(if self.odd { -T::one() } else { T::one() }, T::zero());
        for p in self.pivots() {
            let r = p.norm();
            if r == T::zero() {
                return (T::neg_infinity(), Complex::new(T::one(), T::zero()));
            }
            log_abs = log_abs + r.ln();
            phase = phase * (p / r);
            // keep the phase on the unit circle
            phase = phase / phase.norm();
        }
        (log_abs, phase)
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex<T>]) {
        let n = self.n;
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let mut s = x[i];
            for (l, xj) in row.iter().zip(&x[..i]) {
                s = s - *l * *xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let mut s = x[i];
            for j in i + 1..n {
                s = s - row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        b.copy_from_slice(&x);
    }

    /// Column `j` of the inverse.
    pub fn inverse_column(&self, j: usize) -> Vec<Complex<T>> {
        let mut e = vec![Complex::new(T::zero(), T::zero()); self.n];
        e[j] = Complex::new(T::one(), T::zero());
        self.solve_in_place(&mut e);
        e
    }
}
