//! Dense rational vectors and matrices with exact Gaussian elimination.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// A vector over the rationals; in this crate usually a curve class given by
/// its intersection numbers against a divisor basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct QVec(Vec<Rat>);

impl QVec {
    pub fn new(entries: Vec<Rat>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch("vector of dimension 0".into()));
        }
        Ok(QVec(entries))
    }

    pub fn from_i64s(entries: &[i64]) -> Self {
        QVec(entries.iter().map(|&x| Rat::from(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        QVec(vec![Rat::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = QVec::zeros(dim);
        v.0[i] = Rat::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rat> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rat> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rat::is_zero)
    }

    fn check_dim(&self, other: &QVec) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vectors of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    pub fn dot(&self, other: &QVec) -> Result<Rat> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn add(&self, other: &QVec) -> Result<QVec> {
        self.check_dim(other)?;
        Ok(QVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &QVec) -> Result<QVec> {
        self.check_dim(other)?;
        Ok(QVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, c: &Rat) -> QVec {
        QVec(self.0.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> QVec {
        QVec(self.0.iter().map(|a| -a).collect())
    }
}

impl From<Vec<Rat>> for QVec {
    fn from(v: Vec<Rat>) -> Self {
        QVec(v)
    }
}

impl Index<usize> for QVec {
    type Output = Rat;
    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl<'a> IntoIterator for &'a QVec {
    type Item = &'a Rat;
    type IntoIter = std::slice::Iter<'a, Rat>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for QVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for QVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'de> Deserialize<'de> for QVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<Rat>::deserialize(d)?;
        QVec::new(v).map_err(serde::de::Error::custom)
    }
}

/// Row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: &[QVec]) -> Result<Self> {
        let cols = rows.first().map_or(0, QVec::dim);
        if rows.iter().any(|r| r.dim() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(QMat {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.entries().iter().cloned()).collect(),
        })
    }

    /// Matrix whose columns are the given vectors. `dim` fixes the row count
    /// when `cols` is empty.
    pub fn from_cols(dim: usize, cols: &[QVec]) -> Result<Self> {
        if cols.iter().any(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch("ragged matrix columns".into()));
        }
        let mut m = QMat::zeros(dim, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..dim {
                m.set(i, j, c[i].clone());
            }
        }
        Ok(m)
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let rows: Vec<QVec> = rows.iter().map(|r| QVec::from_i64s(r)).collect();
        QMat::from_rows(&rows).expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> QVec {
        QVec(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn column(&self, j: usize) -> QVec {
        QVec((0..self.rows).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn row_vecs(&self) -> Vec<QVec> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &QVec) -> Result<QVec> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of dimension {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok(QVec(
            (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
                .collect(),
        ))
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Reduces in place to reduced row echelon form and returns the pivot
    /// columns. The pivot in each column is the first nonzero entry at or
    /// below the current row.
    pub fn rref(&mut self) -> Vec<usize> {
        self.rref_limited(self.cols)
    }

    fn rref_limited(&mut self, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..pivot_cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self.get(r, c).recip().expect("nonzero pivot");
            for j in c..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in c..self.cols {
                    let v = self.get(i, j) - &(&f * self.get(r, j));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", self.row(i))?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSolution {
    pub solution: QVec,
    pub kernel_basis: Vec<QVec>,
}

fn kernel_from_rref(m: &QMat, pivots: &[usize], n: usize) -> Vec<QVec> {
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rat::zero(); n];
            v[free] = Rat::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -m.get(row, free);
            }
            QVec(v)
        })
        .collect()
}

/// Solves `A x = b` exactly. Returns `Ok(None)` when `b` is not in the
/// column space of `A`. The particular solution sets every free variable to 0.
pub fn solve_linear(a: &QMat, b: &QVec) -> Result<Option<LinearSolution>> {
    if a.rows() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of dimension {}",
            a.rows(),
            a.cols(),
            b.dim()
        )));
    }
    let n = a.cols();
    let mut aug = QMat::zeros(a.rows(), n + 1);
    for i in 0..a.rows() {
        for j in 0..n {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, n, b[i].clone());
    }
    let pivots = aug.rref_limited(n);
    if (pivots.len()..aug.rows()).any(|i| !aug.get(i, n).is_zero()) {
        return Ok(None);
    }
    let mut x = vec![Rat::zero(); n];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = aug.get(row, n).clone();
    }
    Ok(Some(LinearSolution {
        solution: QVec(x),
        kernel_basis: kernel_from_rref(&aug, &pivots, n),
    }))
}

/// Basis of the null space of `a`, one vector per free column.
pub fn kernel(a: &QMat) -> Vec<QVec> {
    let mut m = a.clone();
    let pivots = m.rref();
    kernel_from_rref(&m, &pivots, a.cols())
}
