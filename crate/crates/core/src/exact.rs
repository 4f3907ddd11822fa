//! Exact rational matrices for the small matrices used throughout the crate.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Ratio::new(n, d)
}

pub fn rat_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| Rational::from_integer(rows[i][j]))
    }

    pub fn diag(d: &[i64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = Rational::from_integer(x);
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

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Rational) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Rational::zero(), |acc, m| acc + self[(i, m)] * other[(m, j)])
        }))
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).fold(Rational::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect())
    }

    /// Determinant by fraction-exact Gaussian elimination.
    pub fn det(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::InvalidInput("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[(r, c)].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let piv = a[(c, c)];
            det *= piv;
            for r in c + 1..n {
                let f = a[(r, c)] / piv;
                if !f.is_zero() {
                    for j in c..n {
                        let v = a[(c, j)];
                        a[(r, j)] -= f * v;
                    }
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::InvalidInput("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n)
                .find(|&r| !a[(r, c)].is_zero())
                .ok_or_else(|| Error::InvalidInput("singular matrix".into()))?;
            a.swap_rows(p, c);
            inv.swap_rows(p, c);
            let piv = a[(c, c)];
            for j in 0..n {
                a[(c, j)] /= piv;
                inv[(c, j)] /= piv;
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = a[(r, c)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (x, y) = (a[(c, j)], inv[(c, j)]);
                    a[(r, j)] -= f * x;
                    inv[(r, j)] -= f * y;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn to_ints(&self) -> Option<Vec<Vec<i64>>> {
        self.is_integral().then(|| {
            (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].to_integer()).collect()).collect()
        })
    }

    /// Positive definiteness via exact leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        (1..=self.rows).all(|k| {
            let minor = Self::from_fn(k, k, |i, j| self[(i, j)]);
            minor.det().map(|d| d.is_positive()).unwrap_or(false)
        })
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| rat_to_f64(&self[(i, j)])).collect()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

/// Serialized as nested arrays of "p/q" strings.
impl Serialize for QMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

/// Exact determinant of a small integer matrix.
pub fn int_det(m: &[Vec<i64>]) -> i64 {
    QMatrix::from_ints(m).det().map(|d| d.to_integer()).unwrap_or(0)
}
