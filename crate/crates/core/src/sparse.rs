//! Sparse matrices and the implicit centering/scaling transform.
//!
//! [`SparseMatrix`] keeps both a row-major (CSR) and a column-major (CSC)
//! compressed form so matvec and rmatvec both stream contiguously.
//! [`CenteredMatrix`] wraps a sparse base with per-row/per-column scale
//! factors and per-column offsets, representing
//!
//! ```text
//! M[i][j] = row_scales[i] * col_scales[j] * base[i][j] - col_offsets[j]
//! ```
//!
//! so column centering (a rank-one, fully dense correction) is applied inside
//! the matvec kernels instead of densifying the matrix.
//!
//! All matrix types are immutable after construction; kernels may fan out
//! over rows/columns but each output element is accumulated in a fixed
//! sequential order, so results are bit-identical run to run.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Minimum row/column count before matvec kernels fan out to threads.
const PARALLEL_CUTOFF: usize = 8192;

/// Matrix-free linear operator: everything the SVD solver needs.
///
/// `apply`/`apply_transpose` assume correctly sized buffers (checked with
/// `debug_assert`); the `matvec`/`rmatvec` wrappers validate dimensions and
/// allocate the output.
pub trait LinearOperator: Sync {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;

    /// `out = M v`
    fn apply(&self, v: &[f64], out: &mut [f64]);

    /// `out = M^T u`
    fn apply_transpose(&self, u: &[f64], out: &mut [f64]);

    fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n_cols() {
            return Err(Error::DimensionMismatch {
                context: "matvec input length",
                expected: self.n_cols(),
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.n_rows()];
        self.apply(v, &mut out);
        Ok(out)
    }

    fn rmatvec(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n_rows() {
            return Err(Error::DimensionMismatch {
                context: "rmatvec input length",
                expected: self.n_rows(),
                got: u.len(),
            });
        }
        let mut out = vec![0.0; self.n_cols()];
        self.apply_transpose(u, &mut out);
        Ok(out)
    }
}

/// Immutable sparse matrix in CSR + CSC form. Duplicate triplets are summed
/// and exact zeros dropped at build time; entry order is deterministic
/// (row-major) regardless of input order.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    csr_values: Vec<f64>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    csc_values: Vec<f64>,
}

/// Builds a [`SparseMatrix`] from coordinate triplets.
///
/// Duplicates are summed; entries summing to exactly zero are dropped.
/// Out-of-range indices and non-finite values are rejected with the
/// offending triplet named.
pub fn build_sparse(
    triplets: &[(usize, usize, f64)],
    n_rows: usize,
    n_cols: usize,
) -> Result<SparseMatrix> {
    for &(row, col, value) in triplets {
        if row >= n_rows || col >= n_cols {
            return Err(Error::IndexOutOfRange {
                row,
                col,
                n_rows,
                n_cols,
            });
        }
        if !value.is_finite() {
            return Err(Error::NonFiniteValue { row, col, value });
        }
    }

    // Sort a copy, then sum runs of equal (row, col). The sort key includes
    // the value so duplicate groups are summed in a fixed order no matter
    // how the input was permuted (float addition is order-sensitive).
    let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
    sorted.sort_by(|a, b| {
        (a.0, a.1)
            .cmp(&(b.0, b.1))
            .then_with(|| a.2.total_cmp(&b.2))
    });

    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
    for (row, col, value) in sorted {
        match merged.last_mut() {
            Some(last) if last.0 == row && last.1 == col => last.2 += value,
            _ => merged.push((row, col, value)),
        }
    }
    merged.retain(|&(_, _, v)| v != 0.0);

    Ok(SparseMatrix::from_sorted_dedup(merged, n_rows, n_cols))
}

impl SparseMatrix {
    /// `triplets` must be row-major sorted with unique (row, col) pairs.
    fn from_sorted_dedup(
        triplets: Vec<(usize, usize, f64)>,
        n_rows: usize,
        n_cols: usize,
    ) -> SparseMatrix {
        let nnz = triplets.len();
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(nnz);
        let mut csr_values = Vec::with_capacity(nnz);
        for &(row, col, value) in &triplets {
            row_ptr[row + 1] += 1;
            col_idx.push(col);
            csr_values.push(value);
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }

        // CSC by counting sort over columns.
        let mut col_ptr = vec![0usize; n_cols + 1];
        for &(_, col, _) in &triplets {
            col_ptr[col + 1] += 1;
        }
        for j in 0..n_cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut row_idx = vec![0usize; nnz];
        let mut csc_values = vec![0.0; nnz];
        let mut cursor = col_ptr.clone();
        for &(row, col, value) in &triplets {
            let slot = cursor[col];
            row_idx[slot] = row;
            csc_values[slot] = value;
            cursor[col] += 1;
        }

        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            csr_values,
            col_ptr,
            row_idx,
            csc_values,
        }
    }

    pub fn empty(n_rows: usize, n_cols: usize) -> SparseMatrix {
        SparseMatrix::from_sorted_dedup(Vec::new(), n_rows, n_cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.csr_values.len()
    }

    /// Stored entries in row-major order.
    pub fn iter_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            self.col_idx[lo..hi]
                .iter()
                .zip(&self.csr_values[lo..hi])
                .map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.csr_values[lo..hi])
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        (&self.row_idx[lo..hi], &self.csc_values[lo..hi])
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let (_, vals) = self.row(i);
            out[i] = vals.iter().sum();
        }
        out
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for j in 0..self.n_cols {
            let (_, vals) = self.col(j);
            out[j] = vals.iter().sum();
        }
        out
    }

    pub fn total_sum(&self) -> f64 {
        self.csr_values.iter().sum()
    }

    pub fn min_value(&self) -> Option<f64> {
        self.csr_values
            .iter()
            .copied()
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    /// First stored entry that is negative, if any.
    pub fn first_negative(&self) -> Option<(usize, usize, f64)> {
        self.iter_triplets().find(|&(_, _, v)| v < 0.0)
    }

    /// Densifies into a row-major `Vec` of `Vec`s. Test/oracle helper; guard
    /// sizes at the call site.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, j, v) in self.iter_triplets() {
            dense[i][j] = v;
        }
        dense
    }
}

impl LinearOperator for SparseMatrix {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        let kernel = |i: usize, o: &mut f64| {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let mut acc = 0.0;
            for (idx, &j) in self.col_idx[lo..hi].iter().enumerate() {
                acc += self.csr_values[lo + idx] * v[j];
            }
            *o = acc;
        };
        if self.n_rows >= PARALLEL_CUTOFF {
            out.par_iter_mut().enumerate().for_each(|(i, o)| kernel(i, o));
        } else {
            out.iter_mut().enumerate().for_each(|(i, o)| kernel(i, o));
        }
    }

    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.n_rows);
        debug_assert_eq!(out.len(), self.n_cols);
        let kernel = |j: usize, o: &mut f64| {
            let lo = self.col_ptr[j];
            let hi = self.col_ptr[j + 1];
            let mut acc = 0.0;
            for (idx, &i) in self.row_idx[lo..hi].iter().enumerate() {
                acc += self.csc_values[lo + idx] * u[i];
            }
            *o = acc;
        };
        if self.n_cols >= PARALLEL_CUTOFF {
            out.par_iter_mut().enumerate().for_each(|(j, o)| kernel(j, o));
        } else {
            out.iter_mut().enumerate().for_each(|(j, o)| kernel(j, o));
        }
    }
}

/// A sparse base with implicit scaling and column centering (see module doc).
#[derive(Clone, Debug, PartialEq)]
pub struct CenteredMatrix {
    base: SparseMatrix,
    col_offsets: Vec<f64>,
    row_scales: Vec<f64>,
    col_scales: Vec<f64>,
}

impl CenteredMatrix {
    /// Identity transform: offsets 0, scales 1; acts exactly like `base`.
    pub fn identity(base: SparseMatrix) -> CenteredMatrix {
        let (r, c) = (base.n_rows(), base.n_cols());
        CenteredMatrix {
            base,
            col_offsets: vec![0.0; c],
            row_scales: vec![1.0; r],
            col_scales: vec![1.0; c],
        }
    }

    pub fn base(&self) -> &SparseMatrix {
        &self.base
    }

    pub fn col_offsets(&self) -> &[f64] {
        &self.col_offsets
    }

    pub fn row_scales(&self) -> &[f64] {
        &self.row_scales
    }

    pub fn col_scales(&self) -> &[f64] {
        &self.col_scales
    }

    /// Sets the column offsets to the column means of the currently
    /// represented matrix, so the result has all column sums zero. Calling it
    /// again changes nothing: the scaled column means do not depend on the
    /// previous offsets.
    pub fn center_columns(mut self) -> CenteredMatrix {
        let n = self.base.n_rows() as f64;
        let mut scaled_col_sums = vec![0.0; self.base.n_cols()];
        for (i, j, v) in self.base.iter_triplets() {
            scaled_col_sums[j] += self.row_scales[i] * v;
        }
        for (j, sum) in scaled_col_sums.iter().enumerate() {
            self.col_offsets[j] = self.col_scales[j] * sum / n;
        }
        self
    }

    /// Writes the `j`-th column of the represented matrix into `out`
    /// (length `n_rows`).
    pub fn column_dense(&self, j: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.base.n_rows());
        out.fill(-self.col_offsets[j]);
        let cj = self.col_scales[j];
        let (rows, vals) = self.base.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            out[i] += self.row_scales[i] * cj * v;
        }
    }

    /// Densifies the represented matrix. Test/oracle helper.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.base.n_cols()]; self.base.n_rows()];
        for row in dense.iter_mut() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = -self.col_offsets[j];
            }
        }
        for (i, j, v) in self.base.iter_triplets() {
            dense[i][j] += self.row_scales[i] * self.col_scales[j] * v;
        }
        dense
    }
}

impl LinearOperator for CenteredMatrix {
    fn n_rows(&self) -> usize {
        self.base.n_rows()
    }

    fn n_cols(&self) -> usize {
        self.base.n_cols()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_cols());
        debug_assert_eq!(out.len(), self.n_rows());
        // tmp[j] = col_scales[j] * v[j]; out_i = row_scales[i] * (B tmp)_i - <offsets, v>
        let tmp: Vec<f64> = self
            .col_scales
            .iter()
            .zip(v)
            .map(|(&c, &x)| c * x)
            .collect();
        self.base.apply(&tmp, out);
        let offset_dot = crate::dense::dot(&self.col_offsets, v);
        for (o, &r) in out.iter_mut().zip(&self.row_scales) {
            *o = r * *o - offset_dot;
        }
    }

    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.n_rows());
        debug_assert_eq!(out.len(), self.n_cols());
        let tmp: Vec<f64> = self
            .row_scales
            .iter()
            .zip(u)
            .map(|(&r, &x)| r * x)
            .collect();
        self.base.apply_transpose(&tmp, out);
        let u_sum: f64 = u.iter().sum();
        for ((o, &c), &off) in out.iter_mut().zip(&self.col_scales).zip(&self.col_offsets) {
            *o = c * *o - off * u_sum;
        }
    }
}

/// Column-centers `m`: offsets become the column means, scales stay 1, and
/// the densified result has all column sums zero.
pub fn center_columns(m: SparseMatrix) -> CenteredMatrix {
    CenteredMatrix::identity(m).center_columns()
}

/// Result of [`scale_rows_cols`]: the scaled matrix plus the indices of rows
/// and columns whose sum was zero (left unscaled, scale 1).
#[derive(Clone, Debug)]
pub struct ScaledMatrix {
    pub matrix: CenteredMatrix,
    pub zero_sum_rows: Vec<usize>,
    pub zero_sum_cols: Vec<usize>,
}

/// Rescales entry (i, j) to `m[i][j] / sqrt(rowsum_i * colsum_j)`.
/// Defined for count-like (nonnegative) data; rows or columns with zero sum
/// keep scale 1 and are reported.
pub fn scale_rows_cols(m: SparseMatrix) -> Result<ScaledMatrix> {
    if let Some((row, col, value)) = m.first_negative() {
        return Err(Error::NegativeEntry { row, col, value });
    }
    let row_sums = m.row_sums();
    let col_sums = m.col_sums();
    let mut zero_sum_rows = Vec::new();
    let mut zero_sum_cols = Vec::new();
    let row_scales: Vec<f64> = row_sums
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if s == 0.0 {
                zero_sum_rows.push(i);
                1.0
            } else {
                1.0 / s.sqrt()
            }
        })
        .collect();
    let col_scales: Vec<f64> = col_sums
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            if s == 0.0 {
                zero_sum_cols.push(j);
                1.0
            } else {
                1.0 / s.sqrt()
            }
        })
        .collect();
    let n_cols = m.n_cols();
    Ok(ScaledMatrix {
        matrix: CenteredMatrix {
            base: m,
            col_offsets: vec![0.0; n_cols],
            row_scales,
            col_scales,
        },
        zero_sum_rows,
        zero_sum_cols,
    })
}

// ---------------------------------------------------------------------------
// Plain-text triplet format
//
// Header line: "<n_rows> <n_cols> <nnz>", then one "<row> <col> <value>" line
// per stored entry in row-major order, 0-based indices, fields separated by a
// single space. Values print in Rust's shortest round-trip form, so
// write -> read reproduces the matrix exactly.
// ---------------------------------------------------------------------------

pub fn write_triplets<W: Write>(m: &SparseMatrix, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for (i, j, v) in m.iter_triplets() {
        writeln!(w, "{} {} {}", i, j, v)?;
    }
    Ok(())
}

pub fn read_triplets<R: BufRead>(r: R, path: &str) -> Result<SparseMatrix> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(e))) => return Err(Error::io(path, e)),
        None => {
            return Err(Error::Parse {
                path: path.to_string(),
                line: 1,
                message: "missing header line".to_string(),
            })
        }
    };
    let header_fields: Vec<&str> = header.split_whitespace().collect();
    if header_fields.len() != 3 {
        return Err(Error::Parse {
            path: path.to_string(),
            line: 1,
            message: format!("header must be `rows cols nnz`, got `{}`", header),
        });
    }
    let parse_count = |s: &str, line: usize, what: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse {
            path: path.to_string(),
            line,
            message: format!("invalid {}: `{}`", what, s),
        })
    };
    let n_rows = parse_count(header_fields[0], 1, "row count")?;
    let n_cols = parse_count(header_fields[1], 1, "column count")?;
    let nnz = parse_count(header_fields[2], 1, "nnz")?;

    let mut triplets = Vec::with_capacity(nnz);
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("expected `row col value`, got `{}`", line),
            });
        }
        let row = parse_count(fields[0], line_no, "row index")?;
        let col = parse_count(fields[1], line_no, "column index")?;
        let value: f64 = fields[2].parse().map_err(|_| Error::Parse {
            path: path.to_string(),
            line: line_no,
            message: format!("invalid value: `{}`", fields[2]),
        })?;
        triplets.push((row, col, value));
    }
    if triplets.len() != nnz {
        return Err(Error::Parse {
            path: path.to_string(),
            line: 1,
            message: format!("header promised {} entries, found {}", nnz, triplets.len()),
        });
    }
    build_sparse(&triplets, n_rows, n_cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_graph() -> SparseMatrix {
        // 4-edge graph: c1->p1 w3, c2->p1 w2, c2->p2 w2, c3->p2 w1
        build_sparse(
            &[(0, 0, 3.0), (1, 0, 2.0), (1, 1, 2.0), (2, 1, 1.0)],
            3,
            2,
        )
        .unwrap()
    }

    #[test]
    fn duplicates_are_summed() {
        let m = build_sparse(&[(0, 0, 1.0), (0, 0, 2.0)], 1, 1).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.iter_triplets().next(), Some((0, 0, 3.0)));
    }

    #[test]
    fn empty_build() {
        let m = build_sparse(&[], 3, 4).unwrap();
        assert_eq!(m.nnz(), 0);
        assert_eq!((m.n_rows(), m.n_cols()), (3, 4));
    }

    #[test]
    fn toy_graph_degrees() {
        let m = toy_graph();
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.row_sums(), vec![3.0, 4.0, 1.0]);
        assert_eq!(m.col_sums(), vec![5.0, 3.0]);
    }

    #[test]
    fn zero_sums_are_dropped() {
        let m = build_sparse(&[(0, 1, 2.0), (0, 1, -2.0), (1, 0, 1.0)], 2, 2).unwrap();
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn out_of_range_is_reported() {
        let err = build_sparse(&[(5, 0, 1.0)], 2, 2).unwrap_err();
        match err {
            Error::IndexOutOfRange { row, .. } => assert_eq!(row, 5),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(build_sparse(&[(0, 0, f64::NAN)], 1, 1).is_err());
        assert!(build_sparse(&[(0, 0, f64::INFINITY)], 1, 1).is_err());
    }

    #[test]
    fn matvec_identity_pattern() {
        let m = build_sparse(&[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)], 3, 3).unwrap();
        assert_eq!(m.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn matvec_dimension_error() {
        let m = toy_graph();
        assert!(m.matvec(&[1.0]).is_err());
        assert!(m.rmatvec(&[1.0]).is_err());
    }

    #[test]
    fn centering_two_element_column() {
        let m = build_sparse(&[(0, 0, 1.0), (1, 0, 3.0)], 2, 1).unwrap();
        let c = center_columns(m);
        assert_eq!(c.col_offsets(), &[2.0]);
        let dense = c.to_dense();
        assert_eq!(dense[0][0], -1.0);
        assert_eq!(dense[1][0], 1.0);
    }

    #[test]
    fn centering_all_zero_matrix() {
        let c = center_columns(SparseMatrix::empty(4, 3));
        assert_eq!(c.col_offsets(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn pure_offset_action() {
        let base = SparseMatrix::empty(3, 2);
        let mut c = CenteredMatrix::identity(base);
        c.col_offsets = vec![1.0, 1.0];
        let out = c.matvec(&[1.0, 1.0]).unwrap();
        assert_eq!(out, vec![-2.0, -2.0, -2.0]);
    }

    #[test]
    fn scaling_one_by_one() {
        let m = build_sparse(&[(0, 0, 4.0)], 1, 1).unwrap();
        let s = scale_rows_cols(m).unwrap();
        assert_eq!(s.matrix.to_dense()[0][0], 1.0);
    }

    #[test]
    fn scaling_uniform_2x2() {
        let m = build_sparse(&[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)], 2, 2).unwrap();
        let s = scale_rows_cols(m).unwrap();
        for row in s.matrix.to_dense() {
            for v in row {
                assert!((v - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn scaling_flags_zero_column() {
        let m = build_sparse(&[(0, 0, 2.0), (1, 0, 2.0)], 2, 2).unwrap();
        let s = scale_rows_cols(m).unwrap();
        assert_eq!(s.zero_sum_cols, vec![1]);
        assert_eq!(s.matrix.col_scales()[1], 1.0);
    }

    #[test]
    fn scaling_rejects_negative() {
        let m = build_sparse(&[(0, 0, -1.0)], 1, 1).unwrap();
        assert!(scale_rows_cols(m).is_err());
    }

    #[test]
    fn identity_transform_reproduces_base() {
        let m = toy_graph();
        let c = CenteredMatrix::identity(m.clone());
        let v = vec![0.3, -1.2];
        assert_eq!(c.matvec(&v).unwrap(), m.matvec(&v).unwrap());
        let u = vec![1.0, 2.0, -0.5];
        assert_eq!(c.rmatvec(&u).unwrap(), m.rmatvec(&u).unwrap());
    }

    #[test]
    fn triplet_io_round_trip() {
        let m = toy_graph();
        let mut buf = Vec::new();
        write_triplets(&m, &mut buf).unwrap();
        let back = read_triplets(buf.as_slice(), "mem").unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn triplet_read_reports_line() {
        let text = "2 2 2\n0 0 1.5\n0 nope 2\n";
        let err = read_triplets(text.as_bytes(), "bad.txt").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
