//! Dense column-major matrices and column index sets.
//!
//! Storage is column-major because everything downstream is
//! column-centric: subsetting, per-column regression, per-column costs.
//! A column is always a contiguous `&[f64]`.

use crate::error::{Error, Result};
use crate::rng::RngState;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Dense real matrix, column-major. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Build from column-major data. Validates shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "entry ({}, {}) = {}",
                pos % rows,
                pos / rows,
                data[pos]
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix");
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        if columns.is_empty() || columns[0].is_empty() {
            return Err(Error::InvalidArgument("no columns given".into()));
        }
        let rows = columns[0].len();
        let mut data = Vec::with_capacity(rows * columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has {} rows, expected {rows}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        DenseMatrix::new(rows, columns.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    /// Contiguous view of column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Matrix product `self * other`. Panics on inner-dimension mismatch;
    /// shape errors here are programming errors, not input errors.
    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, other.rows,
            "inner dimensions differ: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let out_col = out.col_mut(j);
            for (l, &b) in oc.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let ac = &self.data[l * self.rows..(l + 1) * self.rows];
                for i in 0..self.rows {
                    out_col[i] += ac[i] * b;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Columns of `self` selected by `s`, in index order.
    pub fn subset_columns(&self, s: &ColumnSet) -> Result<DenseMatrix> {
        s.check_bounds(self.cols)?;
        let mut data = Vec::with_capacity(self.rows * s.len());
        for &j in s.iter() {
            data.extend_from_slice(self.col(j));
        }
        Ok(DenseMatrix { rows: self.rows, cols: s.len(), data })
    }
}

/// Ordered set of distinct column indices, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnSet {
    indices: Vec<usize>,
}

impl ColumnSet {
    /// Build from arbitrary order; sorts and rejects duplicates.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate column index".into()));
        }
        Ok(ColumnSet { indices })
    }

    /// The full set {0, .., n-1}.
    pub fn full(n: usize) -> Self {
        ColumnSet { indices: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.indices.iter()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn check_bounds(&self, cols: usize) -> Result<()> {
        match self.indices.last() {
            Some(&max) if max >= cols => Err(Error::ColumnOutOfRange { index: max, cols }),
            _ => Ok(()),
        }
    }

    /// Set union; inputs are disjoint in every call site but overlap is allowed.
    pub fn union(&self, other: &ColumnSet) -> ColumnSet {
        let mut v = self.indices.clone();
        v.extend_from_slice(&other.indices);
        v.sort_unstable();
        v.dedup();
        ColumnSet { indices: v }
    }

    pub fn minus(&self, other: &ColumnSet) -> ColumnSet {
        let indices = self.indices.iter().copied().filter(|j| !other.contains(*j)).collect();
        ColumnSet { indices }
    }
}

/// Uniformly random `size`-subset of `universe`, deterministic given `rng`.
///
/// Partial Fisher-Yates over a copy of the universe, so the draw sequence
/// is fixed by the generator state alone.
pub fn sample_subset(rng: &RngState, universe: &ColumnSet, size: usize) -> Result<ColumnSet> {
    if size > universe.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot sample {size} items from a universe of {}",
            universe.len()
        )));
    }
    let mut pool: Vec<usize> = universe.indices().to_vec();
    let mut r = rng.rng();
    for i in 0..size {
        let j = r.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(size);
    ColumnSet::new(pool)
}
