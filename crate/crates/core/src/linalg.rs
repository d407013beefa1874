//! Small dense matrices over `f64` or exact rationals.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{float_to_rational, rational_to_f64, Scalar};

/// Arithmetic needed by elimination-based routines.
pub trait Field: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    fn from_i64(v: i64) -> Self;
    /// Treat as zero during elimination. Exact fields ignore `tol`.
    fn negligible(&self, tol: f64) -> bool;
    /// Pivot preference: larger magnitude wins for floats, any nonzero for rationals.
    fn pivot_score(&self) -> f64;
    fn into_scalar(self) -> Scalar;
    fn from_scalar(s: &Scalar) -> Result<Self>;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn negligible(&self, tol: f64) -> bool {
        f64::abs(*self) <= tol
    }
    fn pivot_score(&self) -> f64 {
        f64::abs(*self)
    }
    fn into_scalar(self) -> Scalar {
        Scalar::Float(self)
    }
    fn from_scalar(s: &Scalar) -> Result<Self> {
        Ok(s.to_f64())
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn pivot_score(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
    fn into_scalar(self) -> Scalar {
        Scalar::Exact(self)
    }
    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Exact(q) => Ok(q.clone()),
            Scalar::Float(x) => float_to_rational(*x),
        }
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Field> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidMatrix("no rows".into()));
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(Error::InvalidMatrix("no columns".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::InvalidMatrix("ragged rows".into()));
            }
            data.extend(row);
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        Self::from_fn(end - start, self.cols, |i, j| self.get(start + i, j).clone())
    }

    /// Vertical concatenation `(self; other)`.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
            }
            acc
        }))
    }

    /// Row vector times matrix: `v M`.
    pub fn left_mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: v.len(),
            });
        }
        Ok((0..self.cols)
            .map(|j| {
                v.iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (i, x)| acc.add(&x.mul(self.get(i, j))))
            })
            .collect())
    }

    /// Matrix times column vector: `M c`.
    pub fn right_mul_vec(&self, c: &[T]) -> Result<Vec<T>> {
        if c.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: c.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(c)
                    .fold(T::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
            })
            .collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.abs().to_f64())
            .fold(0.0, f64::max)
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Determinant by Gaussian elimination (partial pivoting for floats).
    pub fn det(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::InvalidMatrix("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let Some(p) = best_pivot(&a, col, col, 0.0) else {
                return Ok(T::zero());
            };
            if p != col {
                a.swap_rows(p, col);
                det = det.neg();
            }
            let pivot = a.get(col, col).clone();
            det = det.mul(&pivot);
            for r in col + 1..n {
                let factor = a.get(r, col).div(&pivot);
                if factor.negligible(0.0) {
                    continue;
                }
                for c in col..n {
                    let v = a.get(r, c).sub(&factor.mul(a.get(col, c)));
                    a.set(r, c, v);
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::InvalidMatrix("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let p = best_pivot(&a, col, col, 0.0).ok_or(Error::SingularTopBlock)?;
            a.swap_rows(p, col);
            inv.swap_rows(p, col);
            let pivot = a.get(col, col).clone();
            for c in 0..n {
                a.set(col, c, a.get(col, c).div(&pivot));
                inv.set(col, c, inv.get(col, c).div(&pivot));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col).clone();
                if factor.negligible(0.0) {
                    continue;
                }
                for c in 0..n {
                    a.set(r, c, a.get(r, c).sub(&factor.mul(a.get(col, c))));
                    inv.set(r, c, inv.get(r, c).sub(&factor.mul(inv.get(col, c))));
                }
            }
        }
        Ok(inv)
    }

    /// Reduced row echelon form; returns the pivot columns. Entries with
    /// magnitude `<= tol` count as zero (exact fields use exact zero).
    pub fn rref(&self, tol: f64) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(p) = best_pivot(&a, row, col, tol) else {
                continue;
            };
            a.swap_rows(p, row);
            let pivot = a.get(row, col).clone();
            for c in 0..a.cols {
                a.set(row, c, a.get(row, c).div(&pivot));
            }
            for r in 0..a.rows {
                if r == row {
                    continue;
                }
                let factor = a.get(r, col).clone();
                if factor.negligible(0.0) {
                    continue;
                }
                for c in 0..a.cols {
                    a.set(r, c, a.get(r, c).sub(&factor.mul(a.get(row, c))));
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    /// A basis of `{c : M c = 0}`, one vector per free column of the RREF.
    pub fn null_space(&self, tol: f64) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero(); self.cols];
                v[f] = T::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = r.get(i, f).neg();
                }
                v
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

fn best_pivot<T: Field>(a: &Matrix<T>, from_row: usize, col: usize, tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for r in from_row..a.rows {
        let v = a.get(r, col);
        if v.negligible(tol) {
            continue;
        }
        let score = v.pivot_score();
        match best {
            Some((_, s)) if s >= score => {}
            _ => best = Some((r, score)),
        }
    }
    best.map(|(r, _)| r)
}

/// Matrix in either exact or float representation.
#[derive(Clone, Debug, PartialEq)]
pub enum RealMatrix {
    Exact(Matrix<BigRational>),
    Float(Matrix<f64>),
}

impl RealMatrix {
    /// Build from rows of scalars; the representation must be uniform.
    pub fn from_scalar_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let all_exact = rows.iter().flatten().all(Scalar::is_exact);
        let all_float = rows.iter().flatten().all(|s| !s.is_exact());
        if all_exact {
            let rows = rows
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|s| match s {
                            Scalar::Exact(q) => q,
                            Scalar::Float(_) => unreachable!(),
                        })
                        .collect()
                })
                .collect();
            Ok(RealMatrix::Exact(Matrix::from_rows(rows)?))
        } else if all_float {
            let rows = rows
                .into_iter()
                .map(|r| r.iter().map(Scalar::to_f64).collect())
                .collect();
            Ok(RealMatrix::Float(Matrix::from_rows(rows)?))
        } else {
            Err(Error::InvalidMatrix(
                "mixed exact and float entries; representation must be uniform".into(),
            ))
        }
    }

    pub fn to_scalar_rows(&self) -> Vec<Vec<Scalar>> {
        match self {
            RealMatrix::Exact(m) => m
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(Scalar::Exact).collect())
                .collect(),
            RealMatrix::Float(m) => m
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(Scalar::Float).collect())
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            RealMatrix::Exact(m) => m.rows(),
            RealMatrix::Float(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            RealMatrix::Exact(m) => m.cols(),
            RealMatrix::Float(m) => m.cols(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, RealMatrix::Exact(_))
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        match self {
            RealMatrix::Exact(m) => Scalar::Exact(m.get(i, j).clone()),
            RealMatrix::Float(m) => Scalar::Float(*m.get(i, j)),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        match self {
            RealMatrix::Exact(m) => m.map(|x| x.to_f64()),
            RealMatrix::Float(m) => m.clone(),
        }
    }
}
