//! Sparse coupling matrices.
//!
//! [`SparseSymmetricMatrix`] stores the upper triangle of a real symmetric
//! matrix together with per-row adjacency lists, [`SparseMatrix`] holds the
//! general (non-symmetric) mixed coupling `F`, and [`CsrMatrix`] is the
//! compressed row form used for repeated matrix-vector products.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real symmetric matrix stored as its upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetricMatrix {
    dim: usize,
    upper: BTreeMap<(usize, usize), f64>,
    rows: Vec<Vec<(usize, f64)>>,
    asymmetry: f64,
}

impl SparseSymmetricMatrix {
    /// Builds from 0-based triplets in either triangle.
    ///
    /// When both `(j,k)` and `(k,j)` are given the two values are averaged
    /// and their mismatch is kept in [`asymmetry`](Self::asymmetry), so a
    /// validation pass can report it. Repeating the same position is an error.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if dim == 0 {
            return Err(Error::Structural("matrix dimension must be at least 1".into()));
        }
        let mut given: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::IndexOutOfRange(format!(
                    "entry ({r},{c}) outside a {dim}x{dim} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Structural(format!("non-finite entry at ({r},{c})")));
            }
            if given.insert((r, c), v).is_some() {
                return Err(Error::Structural(format!("duplicate entry at ({r},{c})")));
            }
        }
        let mut upper = BTreeMap::new();
        let mut asymmetry = 0.0f64;
        for (&(r, c), &v) in &given {
            let (j, k) = if r <= c { (r, c) } else { (c, r) };
            if upper.contains_key(&(j, k)) {
                continue;
            }
            let value = match (r != c).then(|| given.get(&(c, r))).flatten() {
                Some(&mirror) => {
                    asymmetry = asymmetry.max((v - mirror).abs());
                    0.5 * (v + mirror)
                }
                None => v,
            };
            if value != 0.0 {
                upper.insert((j, k), value);
            }
        }
        Ok(Self::from_upper(dim, upper, asymmetry))
    }

    fn from_upper(dim: usize, upper: BTreeMap<(usize, usize), f64>, asymmetry: f64) -> Self {
        let mut rows = vec![Vec::new(); dim];
        for (&(j, k), &v) in &upper {
            rows[j].push((k, v));
            if j != k {
                rows[k].push((j, v));
            }
        }
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
        }
        SparseSymmetricMatrix {
            dim,
            upper,
            rows,
            asymmetry,
        }
    }

    /// Builds from a dense matrix, reading both triangles.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Structural(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let triplets = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .filter(|&(r, c)| m[(r, c)] != 0.0)
            .map(|(r, c)| (r, c, m[(r, c)]));
        Self::from_triplets(n, triplets)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_upper(dim, BTreeMap::new(), 0.0)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let upper = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, &v)| ((j, j), v))
            .collect();
        Self::from_upper(values.len(), upper, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest mirrored-entry mismatch seen at construction.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        let key = if j <= k { (j, k) } else { (k, j) };
        self.upper.get(&key).copied().unwrap_or(0.0)
    }

    /// Nonzeros of row `j` as `(column, value)`, sorted by column.
    pub fn row(&self, j: usize) -> &[(usize, f64)] {
        &self.rows[j]
    }

    /// Upper-triangle entries `(j, k, value)` with `j <= k`, in lexicographic order.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.upper.iter().map(|(&(j, k), &v)| (j, k, v))
    }

    pub fn nnz_upper(&self) -> usize {
        self.upper.len()
    }

    /// Maximum number of nonzeros in any row (equal to any column).
    pub fn sparsity(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Diagonal slack `A_jj + sum_{k != j} A_jk`, the reference spring constant.
    /// Cancellation residue within a few ulps of the row's magnitude is
    /// snapped to zero, so a balanced row has exactly zero slack.
    pub fn slack(&self, j: usize) -> f64 {
        let row = &self.rows[j];
        let sum: f64 = row.iter().map(|&(_, v)| v).sum();
        let scale: f64 = row.iter().map(|&(_, v)| v.abs()).sum();
        if sum.abs() <= 8.0 * f64::EPSILON * scale {
            0.0
        } else {
            sum
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(j, k), &v) in &self.upper {
            m[(j, k)] = v;
            m[(k, j)] = v;
        }
        m
    }

    /// Simultaneous row/column relabelling: entry `(j,k)` moves to `(perm[j], perm[k])`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let triplets = self
            .upper_entries()
            .map(|(j, k, v)| (perm[j], perm[k], v))
            .collect::<Vec<_>>();
        Self::from_triplets(self.dim, triplets).expect("permutation preserves structure")
    }

    /// Whether off-diagonals are non-positive and every diagonal slack is
    /// non-negative, both at tolerance `tol`.
    pub fn is_laplacian_stiffness(&self, tol: f64) -> bool {
        self.upper_entries().all(|(j, k, v)| j == k || v <= tol)
            && (0..self.dim).all(|j| self.slack(j) >= -tol)
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_rows(self.dim, self.dim, self.rows.clone())
    }
}

/// General real square matrix in coordinate form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    dim: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SparseMatrix {
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries = BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::IndexOutOfRange(format!(
                    "entry ({r},{c}) outside a {dim}x{dim} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Structural(format!("non-finite entry at ({r},{c})")));
            }
            if entries.insert((r, c), v).is_some() {
                return Err(Error::Structural(format!("duplicate entry at ({r},{c})")));
            }
        }
        entries.retain(|_, v| *v != 0.0);
        Ok(SparseMatrix { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        SparseMatrix {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::Structural("expected a square matrix".into()));
        }
        let triplets = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| (r, c, m[(r, c)]));
        Self::from_triplets(n, triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries.get(&(r, c)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sparsity(&self) -> usize {
        let mut row_counts = vec![0usize; self.dim];
        let mut col_counts = vec![0usize; self.dim];
        for &(r, c) in self.entries.keys() {
            row_counts[r] += 1;
            col_counts[c] += 1;
        }
        row_counts.into_iter().chain(col_counts).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(r, c), &v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        SparseMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(&(r, c), &v)| ((perm[r], perm[c]), v))
                .collect(),
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists; columns need not be sorted.
    pub fn from_rows(nrows: usize, ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert_eq!(rows.len(), nrows);
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Maximum number of nonzeros in a row.
    pub fn max_row_nnz(&self) -> usize {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `y += self * x` for complex vectors, strided so a single tensor slot
    /// can be addressed: element `i` of the logical vector sits at
    /// `offset + i * stride`.
    pub(crate) fn apply_strided(
        &self,
        x: &[Complex64],
        y: &mut [Complex64],
        offset: usize,
        stride: usize,
    ) {
        for r in 0..self.nrows {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, v) in self.row(r) {
                acc += x[offset + c * stride] * v;
            }
            y[offset + r * stride] += acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }
}
