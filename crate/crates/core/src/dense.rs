//! Small dense square matrices with LU factorization (partial pivoting).
//!
//! Matrix norms are the induced infinity norm, `max_i sum_j |m_ij|`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Pivots below this fraction of `||M||_inf` are treated as zero.
pub const PIVOT_TOL: f64 = 1e-12;

/// Row-major `k x k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    k: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(k: usize) -> Self {
        DenseMatrix {
            k,
            data: vec![0.0; k * k],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k);
        for i in 0..k {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Panics unless `rows` is square.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let k = rows.len();
        let mut data = Vec::with_capacity(k * k);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), k, "matrix must be square");
            data.extend_from_slice(r);
        }
        DenseMatrix { k, data }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.k).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.k);
        (0..self.k)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.k, other.k);
        DenseMatrix {
            k: self.k,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.k);
        for i in 0..self.k {
            for j in 0..self.k {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        (0..self.k)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::factor(self)
    }

    /// Solves `M y = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.lu()?.solve(b))
    }

    /// Explicit inverse, column by column from unit right-hand sides.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        let lu = self.lu()?;
        let mut inv = Self::zeros(self.k);
        let mut unit = vec![0.0; self.k];
        for j in 0..self.k {
            unit.iter_mut().for_each(|u| *u = 0.0);
            unit[j] = 1.0;
            let col = lu.solve(&unit);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        Ok(inv)
    }

    /// `||M^{-1}||_inf` computed from the explicit inverse.
    pub fn inf_norm_inverse(&self) -> Result<f64> {
        Ok(self.inverse()?.inf_norm())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.k + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.k + j]
    }
}

/// `P M = L U` with unit lower-triangular `L` packed below the diagonal.
#[derive(Debug, Clone)]
pub struct Lu {
    k: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        let k = m.k;
        if !m.is_finite() {
            return Err(Error::NonFinite("matrix"));
        }
        let threshold = PIVOT_TOL * m.inf_norm();
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..k).collect();

        for col in 0..k {
            let (pivot_row, pivot_abs) =
                (col..k)
                    .map(|r| (r, lu[r * k + col].abs()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            // a zero matrix has threshold 0, so compare with <= as well
            if pivot_abs <= threshold || pivot_abs == 0.0 {
                return Err(Error::Singular);
            }
            if pivot_row != col {
                for j in 0..k {
                    lu.swap(col * k + j, pivot_row * k + j);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = lu[col * k + col];
            for r in col + 1..k {
                let factor = lu[r * k + col] / pivot;
                lu[r * k + col] = factor;
                if factor != 0.0 {
                    for j in col + 1..k {
                        lu[r * k + j] -= factor * lu[col * k + j];
                    }
                }
            }
        }
        Ok(Lu { k, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.k;
        assert_eq!(b.len(), k);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..k {
            let s: f64 = (0..i).map(|j| self.lu[i * k + j] * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| self.lu[i * k + j] * y[j]).sum();
            y[i] = (y[i] - s) / self.lu[i * k + i];
        }
        y
    }
}
