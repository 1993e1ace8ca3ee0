//! Small dense linear algebra: row-major matrices, a cyclic Jacobi
//! eigensolver for symmetric matrices, and Gauss-Jordan inversion.
//!
//! The matrices here are at most a few hundred rows, so plain `Vec<f64>`
//! storage and textbook algorithms are accurate and fast enough.

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = value;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        out
    }

    /// `self - alpha * other`.
    pub fn sub_scaled(&self, other: &Matrix, alpha: f64) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= alpha * y;
        }
        out
    }

    pub fn scale(&self, alpha: f64) -> Matrix {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= alpha;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        let threshold = 1e-12 * self.max_abs().max(1.0);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r1, &r2| a.get(r1, col).abs().total_cmp(&a.get(r2, col).abs()))
                .expect("non-empty range");
            let pivot = a.get(pivot_row, col);
            if pivot.abs() < threshold || !pivot.is_finite() {
                return Err(Error::SingularTransform);
            }
            if pivot_row != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(pivot_row, j));
                    a.set(col, j, y);
                    a.set(pivot_row, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(pivot_row, j));
                    inv.set(col, j, y);
                    inv.set(pivot_row, j, x);
                }
            }
            let inv_pivot = 1.0 / pivot;
            for j in 0..n {
                a.set(col, j, a.get(col, j) * inv_pivot);
                inv.set(col, j, inv.get(col, j) * inv_pivot);
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a.get(row, col);
                if factor == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.set(row, j, a.get(row, j) - factor * a.get(col, j));
                    inv.set(row, j, inv.get(row, j) - factor * inv.get(col, j));
                }
            }
        }
        Ok(inv)
    }
}

/// Maximum number of Jacobi sweeps before giving up.
pub const JACOBI_MAX_SWEEPS: usize = 50;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns unsorted eigenvalues and the matrix whose columns are the
/// corresponding eigenvectors. Follows the classic thresholded scheme of
/// Numerical Recipes §11.1: plane rotations annihilate off-diagonal
/// elements until their sum underflows to zero, which for symmetric input
/// always happens within a handful of sweeps.
pub fn jacobi_eigen_sym(m: &Matrix, max_sweeps: usize) -> Result<(Vec<f64>, Matrix)> {
    assert_eq!(m.rows(), m.cols(), "matrix must be square");
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 0..max_sweeps {
        let mut off_sum = 0.0;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                off_sum += a.get(p, q).abs();
            }
        }
        if off_sum == 0.0 {
            return Ok((d, v));
        }
        let tresh = if sweep < 3 {
            0.2 * off_sum / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let g = 100.0 * a.get(p, q).abs();
                // After a few sweeps, flush elements that no longer affect
                // the diagonal at machine precision.
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a.set(p, q, 0.0);
                } else if a.get(p, q).abs() > tresh {
                    let mut h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        a.get(p, q) / h
                    } else {
                        let theta = 0.5 * h / a.get(p, q);
                        let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            -t
                        } else {
                            t
                        }
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    h = t * a.get(p, q);
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    a.set(p, q, 0.0);
                    let rotate = |a: &mut Matrix, i1: usize, j1: usize, i2: usize, j2: usize| {
                        let g = a.get(i1, j1);
                        let h = a.get(i2, j2);
                        a.set(i1, j1, g - s * (h + g * tau));
                        a.set(i2, j2, h + s * (g - h * tau));
                    };
                    for j in 0..p {
                        rotate(&mut a, j, p, j, q);
                    }
                    for j in (p + 1)..q {
                        rotate(&mut a, p, j, j, q);
                    }
                    for j in (q + 1)..n {
                        rotate(&mut a, p, j, q, j);
                    }
                    for j in 0..n {
                        rotate(&mut v, j, p, j, q);
                    }
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }
    Err(Error::EigenNoConvergence { sweeps: max_sweeps })
}
