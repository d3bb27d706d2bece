//! Dense row-major matrix and vector primitives, plus the SVD-backed
//! minimum-norm least-squares solver used as the global-fit route.
//!
//! Everything here is 64-bit; constructors reject non-finite entries so the
//! algorithms above never have to re-check.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value cutoff for the pseudoinverse.
pub const SVD_RCOND: f64 = 1e-10;

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Dense real column vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnVector {
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

    /// Builds from row-major data. Rejects length mismatch and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {}x{}={} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::RejectedInput(format!(
                "non-finite entry at flat index {i}"
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch(
                    "ragged rows in matrix construction".into(),
                ));
            }
            data.extend_from_slice(row);
        }
        Matrix::from_vec(r, c, data)
    }

    /// Assembles a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[ColumnVector]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        let mut m = Matrix::zeros(r, c);
        for (j, v) in cols.iter().enumerate() {
            if v.len() != r {
                return Err(Error::DimensionMismatch(
                    "column length mismatch in from_columns".into(),
                ));
            }
            for i in 0..r {
                m[(i, j)] = v[i];
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ColumnVector {
        ColumnVector {
            data: (0..self.rows).map(|i| self[(i, j)]).collect(),
        }
    }

    /// Square root of the sum of squared entries.
    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract {}x{} from {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// In-place rank-one update: self -= v * row, with v length N and row length m.
    pub fn sub_outer(&mut self, v: &ColumnVector, row: &[f64]) -> Result<()> {
        if v.len() != self.rows || row.len() != self.cols {
            return Err(Error::DimensionMismatch(
                "rank-one update shape mismatch".into(),
            ));
        }
        for i in 0..self.rows {
            let vi = v[i];
            for j in 0..self.cols {
                self[(i, j)] -= vi * row[j];
            }
        }
        Ok(())
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().copied())
    }

    fn from_nalgebra(m: &DMatrix<f64>) -> Matrix {
        let mut out = Matrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl ColumnVector {
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::RejectedInput(format!(
                "non-finite entry at index {i}"
            )));
        }
        Ok(ColumnVector { data })
    }

    pub fn zeros(n: usize) -> Self {
        ColumnVector { data: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// self -= c * other
    pub fn axpy_sub(&mut self, c: f64, other: &ColumnVector) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a -= c * b;
        }
    }
}

impl std::ops::Index<usize> for ColumnVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for ColumnVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// Euclidean inner product of two equal-length vectors.
pub fn inner(u: &ColumnVector, v: &ColumnVector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "inner product of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.data.iter().zip(&v.data).map(|(a, b)| a * b).sum())
}

/// Back-substitution solve of R X = B for unit upper triangular R.
pub fn solve_unit_upper(r: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = r.rows();
    if r.cols() != n {
        return Err(Error::RejectedInput(format!(
            "triangular solve needs a square matrix, got {}x{}",
            r.rows(),
            r.cols()
        )));
    }
    if b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_unit_upper: R is {n}x{n} but B has {} rows",
            b.rows()
        )));
    }
    for i in 0..n {
        if (r[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::RejectedInput(format!(
                "diagonal entry ({i},{i}) = {} is not 1",
                r[(i, i)]
            )));
        }
    }
    let mut x = b.clone();
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let c = r[(i, k)];
            if c == 0.0 {
                continue;
            }
            for j in 0..b.cols() {
                let t = c * x[(k, j)];
                x[(i, j)] -= t;
            }
        }
    }
    Ok(x)
}

/// Minimum-norm least-squares solution X = A+ B via SVD, with singular values
/// below `SVD_RCOND * s_max` treated as zero.
pub fn lstsq_pinv(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "lstsq_pinv: A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    if a.cols() == 0 {
        return Ok(Matrix::zeros(0, b.cols()));
    }
    let na = a.to_nalgebra();
    let nb = b.to_nalgebra();
    let svd = na.svd(true, true);
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = SVD_RCOND * s_max;
    let u = svd.u.as_ref().expect("svd computed with u");
    let vt = svd.v_t.as_ref().expect("svd computed with v_t");
    // X = V * S+ * U^T * B
    let mut utb = u.transpose() * nb;
    for (i, s) in svd.singular_values.iter().enumerate() {
        let inv = if *s > cutoff { 1.0 / s } else { 0.0 };
        utb.row_mut(i).scale_mut(inv);
    }
    let x = vt.transpose() * utb;
    Ok(Matrix::from_nalgebra(&x))
}
