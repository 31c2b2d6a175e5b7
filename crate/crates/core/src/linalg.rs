//! Dense real matrices sized for the controlled-system Jacobians.
//!
//! Matrices here are small (dimension at most [`MAX_DIM`]), so everything is
//! a plain row-major `Vec<f64>` with no blocking.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Largest dimension accepted by [`RealMatrix::char_poly_faddeev`].
pub const MAX_DIM: usize = 64;

/// Row-major dense real matrix. Indexing is zero-based: `m[(row, col)]`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest elementwise absolute difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &RealMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Determinant by LU factorisation with partial pivoting.
    pub fn determinant(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::InvalidArgument(format!(
                "determinant of a non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.entries.clone();
        let mut det = 1.0;
        for k in 0..n {
            let pivot_row = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap_or(k);
            let pivot = a[pivot_row * n + k];
            if pivot == 0.0 {
                return Ok(0.0);
            }
            if pivot_row != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot_row * n + c);
                }
                det = -det;
            }
            det *= pivot;
            for i in k + 1..n {
                let factor = a[i * n + k] / pivot;
                if factor != 0.0 {
                    for c in k + 1..n {
                        a[i * n + c] -= factor * a[k * n + c];
                    }
                }
            }
        }
        Ok(det)
    }

    /// Characteristic polynomial `det(λI − M)` by the Faddeev–LeVerrier
    /// trace recursion. Monic, ascending storage.
    ///
    /// With `B_0 = I`, `c_n = 1`, each step computes `A_k = M·B_{k−1}`,
    /// `c_{n−k} = −tr(A_k)/k` and `B_k = A_k + c_{n−k}·I`.
    pub fn char_poly_faddeev(&self) -> Result<Polynomial> {
        if !self.is_square() {
            return Err(Error::InvalidArgument(format!(
                "characteristic polynomial of a non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n > MAX_DIM {
            return Err(Error::DimensionCap {
                dim: n,
                max: MAX_DIM,
            });
        }
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        let mut b = RealMatrix::identity(n);
        for k in 1..=n {
            let mut a = self * &b;
            let c = -a.trace() / k as f64;
            coeffs[n - k] = c;
            for i in 0..n {
                a[(i, i)] += c;
            }
            b = a;
        }
        Ok(Polynomial::new(coeffs))
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &RealMatrix {
    type Output = RealMatrix;

    fn mul(self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = RealMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RealMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faddeev_identity() {
        let p = RealMatrix::identity(2).char_poly_faddeev().unwrap();
        assert_eq!(p.coeffs(), &[1.0, -2.0, 1.0]);
    }

    #[test]
    fn faddeev_companion_2x2() {
        let (a1, a2, mu) = (0.3, 0.7, -1.7);
        let m = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![a2 * mu, a1 * mu]]).unwrap();
        let p = m.char_poly_faddeev().unwrap();
        let expected = [-a2 * mu, -a1 * mu, 1.0];
        for (c, e) in p.coeffs().iter().zip(expected) {
            assert!((c - e).abs() < 1e-15);
        }
    }

    #[test]
    fn faddeev_rejects_oversized() {
        let m = RealMatrix::identity(MAX_DIM + 1);
        assert!(matches!(
            m.char_poly_faddeev(),
            Err(Error::DimensionCap { dim: 65, max: 64 })
        ));
        assert!(RealMatrix::identity(MAX_DIM).char_poly_faddeev().is_ok());
    }

    #[test]
    fn determinant_small() {
        let m = RealMatrix::from_rows(&[
            vec![1.0, 0.0, -1.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
        ])
        .unwrap();
        assert_eq!(m.determinant().unwrap(), -4.0);
        assert_eq!(RealMatrix::zeros(3, 3).determinant().unwrap(), 0.0);
    }

    #[test]
    fn determinant_matches_faddeev_constant_term() {
        // det(M) = (−1)^n · p(0)
        let m = RealMatrix::from_rows(&[
            vec![2.0, -1.0, 0.5],
            vec![0.3, 4.0, 1.0],
            vec![-2.0, 0.7, 1.5],
        ])
        .unwrap();
        let p = m.char_poly_faddeev().unwrap();
        let det = m.determinant().unwrap();
        assert!((det + p.coeffs()[0]).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(RealMatrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
        assert!(RealMatrix::zeros(2, 3).determinant().is_err());
        assert!(RealMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
