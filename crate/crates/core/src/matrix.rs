//! Dense square matrices, row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense `d×d` real matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixDoc", into = "MatrixDoc")]
pub struct Matrix {
    d: usize,
    data: Vec<f64>,
}

/// On-disk shape: `{"d": n, "rows": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct MatrixDoc {
    pub d: usize,
    pub rows: Vec<Vec<f64>>,
}

impl TryFrom<MatrixDoc> for Matrix {
    type Error = Error;

    fn try_from(doc: MatrixDoc) -> Result<Self> {
        let m = Matrix::from_rows(&doc.rows)?;
        if m.d != doc.d {
            return Err(Error::ShapeMismatch {
                left: doc.d,
                right: m.d,
            });
        }
        Ok(m)
    }
}

impl From<Matrix> for MatrixDoc {
    fn from(m: Matrix) -> Self {
        MatrixDoc {
            d: m.d,
            rows: m.to_rows(),
        }
    }
}

impl Matrix {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            data: vec![0.0; d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from rows; every row must have as many entries as
    /// there are rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.len();
        let mut data = Vec::with_capacity(d * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::NotSquare {
                    row: i,
                    len: row.len(),
                    expected: d,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { d, data })
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                data.push(f(i, j));
            }
        }
        Self { d, data }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d.max(1))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.d, |i, j| self[(j, i)])
    }

    pub fn mul(&self, rhs: &Matrix) -> Self {
        assert_eq!(self.d, rhs.d, "matrix product of mismatched shapes");
        let d = self.d;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        out
    }

    /// `self^t` by repeated squaring; `t = 0` gives the identity.
    pub fn pow(&self, mut t: u64) -> Self {
        let mut result = Self::identity(self.d);
        let mut base = self.clone();
        while t > 0 {
            if t & 1 == 1 {
                result = result.mul(&base);
            }
            t >>= 1;
            if t > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d];
        for (i, &vi) in v.iter().enumerate() {
            for j in 0..d {
                out[j] += vi * self.data[i * d + j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            d: self.d,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Matrix) -> Self {
        assert_eq!(self.d, rhs.d);
        Self {
            d: self.d,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix) -> Self {
        assert_eq!(self.d, rhs.d);
        Self {
            d: self.d,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Maximum absolute row sum, `‖A‖∞`.
    pub fn inf_norm(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.d + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.d + j]
    }
}

/// `max_i Σ_j |A(i,j) − B(i,j)|`.
pub fn inf_norm_distance(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(a.rows()
        .zip(b.rows())
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `pivot_floor`.
pub(crate) fn solve_dense(a: &Matrix, b: &[f64], pivot_floor: f64) -> Option<Vec<f64>> {
    let d = a.dim();
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..d {
        let pivot_row = (col..d)
            .max_by(|&x, &y| m[(x, col)].abs().total_cmp(&m[(y, col)].abs()))
            .expect("nonempty range");
        if m[(pivot_row, col)].abs() < pivot_floor {
            return None;
        }
        if pivot_row != col {
            for j in 0..d {
                m.data.swap(col * d + j, pivot_row * d + j);
            }
            rhs.swap(col, pivot_row);
        }
        let p = m[(col, col)];
        for r in col + 1..d {
            let factor = m[(r, col)] / p;
            if factor == 0.0 {
                continue;
            }
            for j in col..d {
                m.data[r * d + j] -= factor * m.data[col * d + j];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|j| m[(i, j)] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[(i, i)];
    }
    Some(x)
}
