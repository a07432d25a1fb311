use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{C64, MAX_QUBITS};
use crate::{Error, Result};

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting a wrong length or
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite { what: "matrix entries" });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dims("matmul", self.shape(), rhs.shape()));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        gemm_acc(&mut out.data, &self.data, &rhs.data, self.rows, self.cols, rhs.cols);
        Ok(out)
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::dims(op, self.shape(), rhs.shape()));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&z| z * factor).collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^H|` entrywise; infinite for non-square input.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Fails with [`Error::NotHermitian`] unless `max |A - A^H| <= tol * max(1, max|A|)`.
    pub(crate) fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::dims("hermitian check", self.shape(), self.shape()));
        }
        if !self.is_finite() {
            return Err(Error::NonFinite {
                what: "Hermitian input",
            });
        }
        let dev = self.hermiticity_error();
        if dev > tol * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(())
    }

    /// `U A U^H`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.checked_mul(self)?.checked_mul(&u.adjoint())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::dims("apply", self.shape(), (v.len(), 1)));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on inner-dimension mismatch; see [`ComplexMatrix::checked_mul`].
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix sum dimension mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix difference dimension mismatch")
    }
}

/// Kronecker product `a ⊗ b`; entry `(i·b.rows + k, j·b.cols + l) = a(i,j)·b(k,l)`.
///
/// Products whose row or column count exceeds the largest supported
/// register (`2^MAX_QUBITS`) are refused.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let limit = 1usize << MAX_QUBITS;
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r <= limit && c <= limit => (r, c),
        _ => {
            let dim = a.rows.max(a.cols).saturating_mul(b.rows.max(b.cols));
            return Err(Error::RegisterTooLarge {
                qubits: usize::BITS as usize - dim.leading_zeros() as usize - 1,
                max: MAX_QUBITS,
            });
        }
    };
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite { what: "kron operand" });
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a.data[i * a.cols + j];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..b.rows {
                let dst = (i * b.rows + k) * cols + j * b.cols;
                let src = &b.data[k * b.cols..(k + 1) * b.cols];
                for (o, &v) in out.data[dst..dst + b.cols].iter_mut().zip(src) {
                    *o = s * v;
                }
            }
        }
    }
    Ok(out)
}

/// `c += a · b` for row-major `a: m×k`, `b: k×n`, `c: m×n`.
///
/// Operands are split into real and imaginary planes so the inner loop is
/// plain `f64` FMA work, and four rows of `c` share each row of `b`.
pub(crate) fn gemm_acc(c: &mut [C64], a: &[C64], b: &[C64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    let br: Vec<f64> = b.iter().map(|z| z.re).collect();
    let bi: Vec<f64> = b.iter().map(|z| z.im).collect();
    let mut cr = vec![0.0; 4 * n];
    let mut ci = vec![0.0; 4 * n];

    let mut i0 = 0;
    while i0 < m {
        let rows = (m - i0).min(4);
        for r in 0..rows {
            for (j, z) in c[(i0 + r) * n..(i0 + r + 1) * n].iter().enumerate() {
                cr[r * n + j] = z.re;
                ci[r * n + j] = z.im;
            }
        }
        if rows == 4 {
            let (cr0, rest) = cr.split_at_mut(n);
            let (cr1, rest) = rest.split_at_mut(n);
            let (cr2, cr3) = rest.split_at_mut(n);
            let (ci0, rest) = ci.split_at_mut(n);
            let (ci1, rest) = rest.split_at_mut(n);
            let (ci2, ci3) = rest.split_at_mut(n);
            for p in 0..k {
                let s = [
                    a[i0 * k + p],
                    a[(i0 + 1) * k + p],
                    a[(i0 + 2) * k + p],
                    a[(i0 + 3) * k + p],
                ];
                let brow = &br[p * n..(p + 1) * n];
                let birow = &bi[p * n..(p + 1) * n];
                for j in 0..n {
                    let (x, y) = (brow[j], birow[j]);
                    cr0[j] += s[0].re * x - s[0].im * y;
                    ci0[j] += s[0].re * y + s[0].im * x;
                    cr1[j] += s[1].re * x - s[1].im * y;
                    ci1[j] += s[1].re * y + s[1].im * x;
                    cr2[j] += s[2].re * x - s[2].im * y;
                    ci2[j] += s[2].re * y + s[2].im * x;
                    cr3[j] += s[3].re * x - s[3].im * y;
                    ci3[j] += s[3].re * y + s[3].im * x;
                }
            }
        } else {
            for r in 0..rows {
                let crow = &mut cr[r * n..(r + 1) * n];
                let cirow = &mut ci[r * n..(r + 1) * n];
                for p in 0..k {
                    let s = a[(i0 + r) * k + p];
                    let brow = &br[p * n..(p + 1) * n];
                    let birow = &bi[p * n..(p + 1) * n];
                    for j in 0..n {
                        crow[j] += s.re * brow[j] - s.im * birow[j];
                        cirow[j] += s.re * birow[j] + s.im * brow[j];
                    }
                }
            }
        }
        for r in 0..rows {
            for (j, z) in c[(i0 + r) * n..(i0 + r + 1) * n].iter_mut().enumerate() {
                *z = C64::new(cr[r * n + j], ci[r * n + j]);
            }
        }
        i0 += rows;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_dimension_law() {
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::zeros(4, 4);
        assert_eq!(kron(&a, &b).unwrap().shape(), (8, 8));
        let r = ComplexMatrix::zeros(2, 3);
        let s = ComplexMatrix::zeros(5, 1);
        assert_eq!(kron(&r, &s).unwrap().shape(), (10, 3));
    }

    #[test]
    fn kron_entry_layout() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c((i * 2 + j) as f64 + 1.0, 0.0));
        let b = ComplexMatrix::from_fn(2, 2, |i, j| c(0.0, (i * 2 + j) as f64 + 1.0));
        let k = kron(&a, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 2 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_zz_on_01_gives_minus_one() {
        let z = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        let zz = kron(&z, &z).unwrap();
        // |01> is basis index 1: qubit 0 in |0>, qubit 1 in |1>.
        let mut ket = vec![c(0.0, 0.0); 4];
        ket[1] = c(1.0, 0.0);
        let out = zz.apply(&ket).unwrap();
        assert_eq!(out[1], c(-1.0, 0.0));
        assert!(out.iter().enumerate().all(|(i, z)| i == 1 || z.norm() == 0.0));
    }

    #[test]
    fn kron_refuses_oversized_registers() {
        let a = ComplexMatrix::identity(64);
        let b = ComplexMatrix::identity(128);
        assert!(matches!(kron(&a, &b), Err(Error::RegisterTooLarge { .. })));
        let ok = ComplexMatrix::identity(32);
        assert!(kron(&ok, &b).is_ok());
    }

    #[test]
    fn from_vec_rejects_nan_and_bad_length() {
        assert!(ComplexMatrix::from_vec(1, 2, vec![c(0.0, 0.0)]).is_err());
        assert!(matches!(
            ComplexMatrix::from_vec(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn adjoint_and_product() {
        let a = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(3.0, 2.0)]).unwrap();
        let ah = a.adjoint();
        assert_eq!(ah[(0, 1)], c(0.0, 1.0));
        let p = &a * &ah;
        assert!(p.hermiticity_error() < 1e-15);
        assert!(a.checked_mul(&ComplexMatrix::zeros(3, 1)).is_err());
    }
}
