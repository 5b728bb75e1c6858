//! Minimal dense complex linear algebra.
//!
//! The channel model only ever solves systems of size `N <= 16`, so a plain
//! row-major matrix with partially pivoted Gaussian elimination covers every
//! need without pulling in a full linear-algebra stack.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cplx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Cplx<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (k, x) in v.iter().enumerate() {
                acc += self[(i, k)] * *x;
            }
            out[i] = acc;
        }
        out
    }

    /// `self^T * v` (plain transpose, no conjugation).
    pub fn transpose_mul_vec(&self, v: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(self.rows, v.len(), "dimension mismatch");
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.cols];
        for i in 0..self.rows {
            let x = v[i];
            for j in 0..self.cols {
                out[j] += self[(i, j)] * x;
            }
        }
        out
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> CMat<T> {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Scale every entry by a real factor.
    pub fn scale(&mut self, factor: T) {
        for z in &mut self.data {
            *z = Complex::new(z.re * factor, z.im * factor);
        }
    }

    /// Multiply on the right by `diag(d)`, i.e. scale column `j` by `d[j]`.
    pub fn mul_diag(&self, d: &[Cplx<T>]) -> CMat<T> {
        assert_eq!(self.cols, d.len(), "dimension mismatch");
        CMat::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * d[c])
    }

    /// Multiply on the left by `diag(d)`, i.e. scale row `i` by `d[i]`.
    pub fn diag_mul(&self, d: &[Cplx<T>]) -> CMat<T> {
        assert_eq!(self.rows, d.len(), "dimension mismatch");
        CMat::from_fn(self.rows, self.cols, |r, c| d[r] * self[(r, c)])
    }

    /// Entrywise difference `self - rhs`.
    pub fn sub(&self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - rhs[(r, c)])
    }

    /// Entrywise sum `self + rhs`.
    pub fn add(&self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |r, c| self[(r, c)] + rhs[(r, c)])
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        let mut acc = T::zero();
        for z in &self.data {
            acc += z.norm_sqr();
        }
        acc
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMat<T>> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = CMat::identity(n);
        for col in 0..n {
            // Pivot on the largest remaining magnitude in this column.
            let mut pivot = col;
            let mut best = a[(col, col)].norm_sqr();
            for r in col + 1..n {
                let mag = a[(r, col)].norm_sqr();
                if mag > best {
                    best = mag;
                    pivot = r;
                }
            }
            if best == T::zero() {
                return Err(Error::SingularGeometry(
                    "exactly singular matrix in dense solve".to_string(),
                ));
            }
            if pivot != col {
                a.swap_rows(col, pivot);
                inv.swap_rows(col, pivot);
            }
            let p = a[(col, col)];
            let pinv = Complex::new(T::one(), T::zero()) / p;
            for j in 0..n {
                a[(col, j)] = a[(col, j)] * pinv;
                inv[(col, j)] = inv[(col, j)] * pinv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor.re == T::zero() && factor.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let ac = a[(col, j)];
                    let ic = inv[(col, j)];
                    a[(r, j)] = a[(r, j)] - factor * ac;
                    inv[(r, j)] = inv[(r, j)] - factor * ic;
                }
            }
        }
        Ok(inv)
    }

    /// Frobenius condition estimate `||A||_F * ||A^-1||_F` given the inverse.
    pub fn condition_with_inverse(&self, inverse: &CMat<T>) -> T {
        (self.frobenius_norm_sqr() * inverse.frobenius_norm_sqr()).sqrt()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = Cplx<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Cplx<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[r * self.cols + c]
    }
}

/// Squared Euclidean norm of a complex vector.
#[inline]
pub fn vec_norm_sqr<T: Real>(v: &[Cplx<T>]) -> T {
    let mut acc = T::zero();
    for z in v {
        acc += z.norm_sqr();
    }
    acc
}

/// Squared Euclidean distance between complex vectors.
#[inline]
pub fn vec_dist_sqr<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        acc += d.norm_sqr();
    }
    acc
}

/// Real part of the inner product `sum_k a_k * conj(b_k)`.
#[inline]
pub fn re_inner<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x.re * y.re + x.im * y.im;
    }
    acc
}

/// Build `I - M` for a square matrix `M`.
pub fn i_minus<T: Real>(m: &CMat<T>) -> CMat<T> {
    assert_eq!(m.rows(), m.cols());
    CMat::from_fn(m.rows(), m.cols(), |r, c| {
        let id = if r == c {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        };
        id - m[(r, c)]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_round_trip() {
        let a = CMat::from_fn(3, 3, |r, cidx| {
            c(
                (1 + r * 3 + cidx) as f64 + if r == cidx { 5.0 } else { 0.0 },
                (r as f64) - (cidx as f64) * 0.5,
            )
        });
        let inv = a.inverse().unwrap();
        let prod = a.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)].re - expect).abs() < 1e-12);
                assert!(prod[(i, j)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let a: CMat<f64> = CMat::zeros(2, 2);
        assert!(a.inverse().is_err());
    }

    #[test]
    fn transpose_is_plain() {
        let a = CMat::from_fn(2, 3, |r, cidx| c(r as f64, cidx as f64));
        let t = a.transpose();
        assert_eq!(t[(2, 1)], c(1.0, 2.0));
        // No conjugation.
        assert_eq!(t[(2, 1)].im, 2.0);
    }

    #[test]
    fn mul_vec_matches_manual() {
        let a = CMat::from_fn(2, 2, |r, cidx| c((r + cidx) as f64, 1.0));
        let v = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let out = a.mul_vec(&v);
        // Row 0: (0+i)*1 + (1+i)*i = i + i - 1 = -1 + 2i
        assert!((out[0] - c(-1.0, 2.0)).norm() < 1e-15);
    }
}
