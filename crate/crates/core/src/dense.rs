//! Small dense matrices: projected factors inside the SVD solver, centroids,
//! block-model parameters, interaction tables. Column-major storage so column
//! operations (QR, Jacobi rotations) work on contiguous slices.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Column-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Mat {
        Mat {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Mat {
        let mut m = Mat::zeros(n_rows, n_cols);
        for j in 0..n_cols {
            for i in 0..n_rows {
                m.data[j * n_rows + i] = f(i, j);
            }
        }
        m
    }

    /// Builds from a row-major slice, e.g. a literal `&[a, b, c, d]` for 2x2.
    pub fn from_row_major(n_rows: usize, n_cols: usize, values: &[f64]) -> Mat {
        assert_eq!(values.len(), n_rows * n_cols, "row-major data length");
        Mat::from_fn(n_rows, n_cols, |i, j| values[i * n_cols + j])
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n_rows && j < self.n_cols, "index out of bounds");
        self.data[j * self.n_rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.n_rows && j < self.n_cols, "index out of bounds");
        self.data[j * self.n_rows + i] = value;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn row_copy(&self, i: usize, out: &mut [f64]) {
        assert_eq!(out.len(), self.n_cols);
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = self.data[j * self.n_rows + i];
        }
    }

    pub fn row_vec(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        self.row_copy(i, &mut out);
        out
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.n_cols, self.n_rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.n_cols, rhs.n_rows, "matmul inner dimension");
        let mut out = Mat::zeros(self.n_rows, rhs.n_cols);
        for j in 0..rhs.n_cols {
            let rcol = rhs.col(j);
            let ocol = out.col_mut(j);
            for (k, &r) in rcol.iter().enumerate() {
                if r == 0.0 {
                    continue;
                }
                let acol = &self.data[k * self.n_rows..(k + 1) * self.n_rows];
                for (o, &a) in ocol.iter_mut().zip(acol) {
                    *o += a * r;
                }
            }
        }
        out
    }

    /// out = self * v for a dense vector.
    pub fn matvec_dense(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_cols);
        let mut out = vec![0.0; self.n_rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * vj;
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (&a, &b)| m.max((a - b).abs()))
    }
}

impl crate::sparse::LinearOperator for Mat {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * vj;
            }
        }
    }

    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(self.col(j), u);
        }
    }
}

/// Orthonormalizes the columns of `m` in place with modified Gram-Schmidt and
/// one re-orthogonalization pass. Columns that are (numerically) linearly
/// dependent on earlier ones are zeroed rather than normalized, so a
/// rank-deficient input yields trailing zero columns.
pub fn orthonormalize_columns(m: &mut Mat) {
    let n_cols = m.n_cols();
    for j in 0..n_cols {
        let original_norm = norm2(m.col(j));
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = m.data.split_at_mut(j * m.n_rows);
                let qi = &head[i * m.n_rows..(i + 1) * m.n_rows];
                let vj = &mut tail[..m.n_rows];
                let r = dot(qi, vj);
                for (v, &q) in vj.iter_mut().zip(qi) {
                    *v -= r * q;
                }
            }
        }
        let col = m.col_mut(j);
        let norm = norm2(col);
        if norm <= original_norm * 1e-13 || norm == 0.0 {
            col.fill(0.0);
        } else {
            for v in col.iter_mut() {
                *v /= norm;
            }
        }
    }
}

/// Thin SVD factors: `a = u * diag(sigma) * v^T` with `u.n_cols == sigma.len()
/// == v.n_cols == a.n_cols` and `sigma` nonincreasing.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
}

/// One-sided Jacobi SVD. Rotates pairs of columns of a working copy of `a`
/// until all pairs are orthogonal; column norms are the singular values.
/// Intended for small column counts (the projected factor inside the
/// randomized solver); cost is O(n_rows * n_cols^2) per sweep.
pub fn jacobi_svd(a: &Mat) -> Result<SvdFactors> {
    let (m, n) = (a.n_rows(), a.n_cols());
    let mut work = a.clone();
    let mut v = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 });

    let tol = 1e-14;
    let max_sweeps = 60;
    let mut converged = false;
    for _sweep in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (app, aqq, apq) = {
                    let cp = work.col(p);
                    let cq = work.col(q);
                    (dot(cp, cp), dot(cq, cq), dot(cp, cq))
                };
                // Skip degenerate pairs; rotating on rounding noise cycles.
                if app <= f64::MIN_POSITIVE || aqq <= f64::MIN_POSITIVE {
                    continue;
                }
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_cols(&mut work, p, q, c, s);
                rotate_cols(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            max_iter: max_sweeps,
            residuals: vec![],
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| norm2(work.col(j))).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let mut u = Mat::zeros(m, n);
    let mut v_sorted = Mat::zeros(n, n);
    let mut sigma = vec![0.0; n];
    for (dst, &src) in order.iter().enumerate() {
        sigma[dst] = norms[src];
        let ucol = u.col_mut(dst);
        ucol.copy_from_slice(work.col(src));
        if norms[src] > 0.0 {
            for x in ucol.iter_mut() {
                *x /= norms[src];
            }
        }
        v_sorted.col_mut(dst).copy_from_slice(v.col(src));
    }
    Ok(SvdFactors {
        u,
        sigma,
        v: v_sorted,
    })
}

fn rotate_cols(m: &mut Mat, p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let n_rows = m.n_rows;
    let (head, tail) = m.data.split_at_mut(q * n_rows);
    let cp = &mut head[p * n_rows..(p + 1) * n_rows];
    let cq = &mut tail[..n_rows];
    for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *xp;
        let b = *xq;
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn matmul_small() {
        let a = Mat::from_row_major(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = Mat::from_row_major(3, 2, &[7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.matmul(&b);
        assert_eq!(c.get(0, 0), 58.0);
        assert_eq!(c.get(0, 1), 64.0);
        assert_eq!(c.get(1, 0), 139.0);
        assert_eq!(c.get(1, 1), 154.0);
    }

    #[test]
    fn qr_produces_orthonormal_columns() {
        let mut m = Mat::from_fn(8, 3, |i, j| ((i * 3 + j) as f64 * 0.7).sin() + 0.1);
        orthonormalize_columns(&mut m);
        for j in 0..3 {
            assert_abs_diff_eq!(norm2(m.col(j)), 1.0, epsilon = 1e-12);
            for i in 0..j {
                assert_abs_diff_eq!(dot(m.col(i), m.col(j)), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn qr_zeroes_dependent_columns() {
        // Third column is the sum of the first two.
        let mut m = Mat::from_fn(5, 3, |i, j| match j {
            0 => i as f64 + 1.0,
            1 => (i as f64 + 1.0).powi(2),
            _ => (i as f64 + 1.0) + (i as f64 + 1.0).powi(2),
        });
        orthonormalize_columns(&mut m);
        assert_eq!(norm2(m.col(2)), 0.0);
    }

    #[test]
    fn jacobi_svd_diagonal() {
        let a = Mat::from_row_major(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let f = jacobi_svd(&a).unwrap();
        assert_abs_diff_eq!(f.sigma[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.sigma[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.sigma[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_svd_reconstructs() {
        let a = Mat::from_fn(7, 4, |i, j| ((i + 2 * j) as f64).cos() + 0.3 * (j as f64));
        let f = jacobi_svd(&a).unwrap();
        // a ?= u * diag(sigma) * v^T
        let mut us = f.u.clone();
        for j in 0..us.n_cols() {
            let s = f.sigma[j];
            for x in us.col_mut(j) {
                *x *= s;
            }
        }
        let recon = us.matmul(&f.v.transpose());
        assert!(recon.max_abs_diff(&a) < 1e-12);
        // u and v orthonormal
        for j in 0..4 {
            assert_abs_diff_eq!(norm2(f.u.col(j)), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(norm2(f.v.col(j)), 1.0, epsilon = 1e-12);
            for i in 0..j {
                assert_abs_diff_eq!(dot(f.u.col(i), f.u.col(j)), 0.0, epsilon = 1e-10);
                assert_abs_diff_eq!(dot(f.v.col(i), f.v.col(j)), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_svd_rank_deficient() {
        // Rank-1 matrix u v^T.
        let u = [1.0, 2.0, 3.0];
        let v = [2.0, -1.0];
        let a = Mat::from_fn(3, 2, |i, j| u[i] * v[j]);
        let f = jacobi_svd(&a).unwrap();
        let expect = norm2(&u) * norm2(&v);
        assert_abs_diff_eq!(f.sigma[0], expect, epsilon = 1e-12);
        assert_abs_diff_eq!(f.sigma[1], 0.0, epsilon = 1e-12);
    }
}
