//! Dense complex matrices.
//!
//! [`ComplexMatrix`] is the single carrier for operators, density matrices and
//! superoperators. Storage is row-major; products go through ndarray's GEMM.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: Array2<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { data: Array2::zeros((rows, cols)) }
    }

    pub fn identity(n: usize) -> Self {
        Self { data: Array2::eye(n) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut((usize, usize)) -> C64) -> Self {
        Self { data: Array2::from_shape_fn((rows, cols), f) }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let data = Array2::from_shape_vec((rows, cols), entries)
            .expect("shape checked above");
        Self::from_array(data)
    }

    /// Convenience constructor for real-valued literals, mostly used in tests.
    pub fn from_real_rows<const N: usize>(rows: &[[f64; N]]) -> Self {
        Self::from_fn(rows.len(), N, |(i, j)| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |(i, j)| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |(i, j)| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Wraps an ndarray matrix, rejecting NaN or infinite entries.
    pub fn from_array(data: Array2<C64>) -> Result<Self> {
        let m = Self { data };
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn view(&self) -> ArrayView2<'_, C64> {
        self.data.view()
    }

    pub fn into_array(self) -> Array2<C64> {
        self.data
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare { rows: self.rows(), cols: self.cols() })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.data.iter()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols(),
            other.rows(),
            "matmul of {}x{} by {}x{}",
            self.rows(),
            self.cols(),
            other.rows(),
            other.cols()
        );
        Self { data: self.data.dot(&other.data) }
    }

    pub fn adjoint(&self) -> Self {
        Self { data: self.data.t().mapv(|z| z.conj()) }
    }

    pub fn transpose(&self) -> Self {
        Self { data: self.data.t().to_owned() }
    }

    pub fn conj(&self) -> Self {
        Self { data: self.data.mapv(|z| z.conj()) }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { data: &self.data * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: C64, other: &Self) {
        self.data.scaled_add(s, &other.data);
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().iter().sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.data.diag().to_vec()
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Kronecker product; block `(i, j)` of the result is `self[i, j]·other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r1, c1) = (self.rows(), self.cols());
        let (r2, c2) = (other.rows(), other.cols());
        let mut out = Array2::zeros((r1 * r2, c1 * c2));
        for i in 0..r1 {
            for j in 0..c1 {
                let s = self.data[[i, j]];
                if s == ZERO {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        out[[i * r2 + k, j * c2 + l]] = s * other.data[[k, l]];
                    }
                }
            }
        }
        Self { data: out }
    }

    /// Left- and right-multiplication by diagonal matrices:
    /// `diag(left) · self · diag(right)`.
    pub fn scale_rows_cols(&self, left: &[C64], right: &[C64]) -> Self {
        assert_eq!(left.len(), self.rows());
        assert_eq!(right.len(), self.cols());
        Self::from_fn(self.rows(), self.cols(), |(i, j)| left[i] * self.data[[i, j]] * right[j])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.data.dim(), other.data.dim());
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum (the induced ∞-norm).
    pub fn max_row_sum(&self) -> f64 {
        self.data
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry-wise deviation from Hermiticity, `max |m − mᴴ|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.rows().min(self.cols());
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        dev
    }

    /// Leading `n × n` block.
    pub fn top_left(&self, n: usize) -> Self {
        Self::from_fn(n, n, |(i, j)| self.data[[i, j]])
    }

    /// Zero-padded copy of size `n × n`.
    pub fn embed(&self, n: usize) -> Self {
        assert!(n >= self.rows() && n >= self.cols());
        Self::from_fn(n, n, |(i, j)| {
            if i < self.rows() && j < self.cols() {
                self.data[[i, j]]
            } else {
                ZERO
            }
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[[i, j]]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[[i, j]]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix { data: &self.data + &rhs.data }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix { data: &self.data - &rhs.data }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { data: -&self.data }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} {:?}", self.rows(), self.cols(), self.data)
    }
}
