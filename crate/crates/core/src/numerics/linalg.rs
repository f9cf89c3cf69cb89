use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::scalar::{PrecisionContext, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<Scalar>);

impl Vector {
    pub fn new(entries: Vec<Scalar>) -> Self {
        Vector(entries)
    }

    pub fn zeros(ctx: &PrecisionContext, dim: usize) -> Self {
        Vector(vec![ctx.zero(); dim])
    }

    /// Parses comma-separated decimal strings at full precision.
    pub fn parse_csv(ctx: &PrecisionContext, s: &str) -> Result<Self> {
        s.split(',')
            .map(|p| ctx.parse(p))
            .collect::<Result<Vec<_>>>()
            .map(Vector)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scalar> {
        self.0.iter()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Scalar> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(Scalar::is_finite)
    }

    fn zip_with(&self, other: &Vector, op: impl Fn(&Scalar, &Scalar) -> Scalar) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| op(a, b)).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: &Scalar) -> Vector {
        Vector(self.0.iter().map(|a| a * s).collect())
    }

    pub fn dot(&self, other: &Vector) -> Scalar {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = self.0[0].clone() * &other.0[0];
        for (a, b) in self.0.iter().zip(&other.0).skip(1) {
            acc = acc + a * b;
        }
        acc
    }

    pub fn inf_norm(&self) -> Scalar {
        let mut best = self.0[0].abs();
        for v in &self.0[1..] {
            best = best.max(&v.abs());
        }
        best
    }

    /// Round every entry to the given context.
    pub fn rounded(&self, ctx: &PrecisionContext) -> Vector {
        Vector(self.0.iter().map(|s| ctx.round(s)).collect())
    }
}

impl Index<usize> for Vector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut Scalar {
        &mut self.0[i]
    }
}

impl From<Vec<Scalar>> for Vector {
    fn from(v: Vec<Scalar>) -> Self {
        Vector(v)
    }
}

/// `sqrt(sum v_i^2)`.
pub fn euclidean_norm(v: &Vector) -> Scalar {
    v.dot(v).sqrt()
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Matrix::new(n, m, data)
    }

    pub fn zeros(ctx: &PrecisionContext, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![ctx.zero(); rows * cols],
        }
    }

    pub fn identity(ctx: &PrecisionContext, n: usize) -> Self {
        let mut m = Matrix::zeros(ctx, n, n);
        for i in 0..n {
            m[(i, i)] = ctx.one();
        }
        m
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

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(Scalar::is_finite)
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.dim(),
            });
        }
        Ok(Vector::new(
            (0..self.rows)
                .map(|i| Vector::new(self.row(i).to_vec()).dot(v))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn max_abs(&self) -> Scalar {
        let mut best = self.data[0].abs();
        for v in &self.data[1..] {
            best = best.max(&v.abs());
        }
        best
    }

    /// Submatrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let data = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| self[(i, j)].clone()))
            .collect();
        Matrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot smaller than `10^(8 - digits) * max|A_ij|` is reported as
/// [`Error::SingularMatrix`].
pub fn solve_linear(a: &Matrix, b: &Vector, ctx: &PrecisionContext) -> Result<Vector> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.cols(),
        });
    }
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.dim(),
        });
    }
    let scale = a.max_abs();
    if scale.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let threshold = ctx.pow10(8 - ctx.digits() as i32) * &scale;

    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                m[(i, col)]
                    .abs()
                    .partial_cmp(&m[(j, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty range");
        // also rejects a NaN pivot
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(m[(pivot_row, col)].abs() >= threshold) {
            return Err(Error::SingularMatrix);
        }
        if pivot_row != col {
            for j in 0..n {
                m.data.swap(pivot_row * n + j, col * n + j);
            }
            rhs.0.swap(pivot_row, col);
        }
        for i in col + 1..n {
            let factor = &m[(i, col)] / &m[(col, col)];
            if factor.is_zero() {
                continue;
            }
            for j in col..n {
                let update = &factor * &m[(col, j)];
                m[(i, j)] = &m[(i, j)] - update;
            }
            rhs[i] = &rhs[i] - &factor * &rhs[col];
        }
    }

    let mut x = vec![ctx.zero(); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i].clone();
        for j in i + 1..n {
            acc = acc - &m[(i, j)] * &x[j];
        }
        x[i] = acc / &m[(i, i)];
    }
    Ok(Vector(x))
}
