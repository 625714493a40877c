//! Matrix-free truncated SVD by randomized subspace iteration, plus the row
//! normalization step that precedes k-means.
//!
//! The solver only touches the operator through `apply`/`apply_transpose`.
//! A Gaussian sketch is refined with power iterations until every retained
//! triplet satisfies a residual bound, then the small projected factor is
//! decomposed with one-sided Jacobi. Vector signs are fixed so the
//! largest-magnitude entry of each left vector is positive, making downstream
//! clustering reproducible.

use rand_distr::{Distribution, StandardNormal};

use crate::dense::{jacobi_svd, norm2, orthonormalize_columns, Mat};
use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;
use crate::sparse::LinearOperator;

/// Solver parameters. `tol` bounds `||S v_i - sigma_i u_i|| <= tol * sigma_1`
/// for every retained triplet; `max_iter` caps the total number of power
/// iterations.
#[derive(Clone, Copy, Debug)]
pub struct SvdParams {
    pub k: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub oversample: usize,
    pub power_iters: usize,
}

impl SvdParams {
    pub fn new(k: usize, seed: u64) -> SvdParams {
        SvdParams {
            k,
            seed,
            tol: 1e-9,
            max_iter: 200,
            oversample: 10,
            power_iters: 4,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> SvdParams {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> SvdParams {
        self.max_iter = max_iter;
        self
    }
}

/// Row-norm cutoff below which an embedding row is treated as zero
/// (typically an isolated node) and flagged instead of normalized.
pub const ZERO_ROW_EPS: f64 = 1e-12;

/// Top-k singular triplets of the similarity operator: `u_c` holds the left
/// vectors (one row per citizen), `u_p` the right vectors (one row per post).
/// The starred copies are the row-normalized versions filled in by
/// [`normalize_rows`].
#[derive(Clone, Debug)]
pub struct SpectralEmbedding {
    pub u_c: Mat,
    pub u_p: Mat,
    pub sigma: Vec<f64>,
    pub u_c_star: Option<Mat>,
    pub u_p_star: Option<Mat>,
    pub zero_rows_c: Vec<usize>,
    pub zero_rows_p: Vec<usize>,
    pub residuals: Vec<f64>,
}

impl SpectralEmbedding {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }
}

/// Computes the top-k singular triplets of `op`.
///
/// Randomized subspace iteration with Gaussian sketching: deterministic for a
/// fixed seed. Errors with the residuals attached when the residual bound is
/// still unmet after `max_iter` power iterations.
pub fn truncated_svd<O: LinearOperator + ?Sized>(
    op: &O,
    params: &SvdParams,
) -> Result<SpectralEmbedding> {
    let (m, n) = (op.n_rows(), op.n_cols());
    let min_dim = m.min(n);
    if params.k == 0 || params.k > min_dim {
        return Err(Error::invalid(
            "k",
            format!(
                "must lie in [1, min(n_rows, n_cols)] = [1, {}], got {}",
                min_dim, params.k
            ),
        ));
    }
    if params.tol.is_nan() || params.tol <= 0.0 {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let k = params.k;
    let l = (k + params.oversample).min(min_dim);

    // Gaussian sketch of the range.
    let mut rng = rng_from_seed(params.seed);
    let omega = Mat::from_fn(n, l, |_, _| StandardNormal.sample(&mut rng));
    let mut q = Mat::zeros(m, l);
    for j in 0..l {
        op.apply(omega.col(j), q.col_mut(j));
    }
    orthonormalize_columns(&mut q);

    let mut scratch_n = vec![0.0; n];
    let mut iters_done = 0usize;
    let mut rounds = params.power_iters.max(1);
    loop {
        for _ in 0..rounds {
            let mut z = Mat::zeros(n, l);
            for j in 0..l {
                op.apply_transpose(q.col(j), z.col_mut(j));
            }
            orthonormalize_columns(&mut z);
            let mut q_next = Mat::zeros(m, l);
            for j in 0..l {
                op.apply(z.col(j), q_next.col_mut(j));
            }
            orthonormalize_columns(&mut q_next);
            q = q_next;
            iters_done += 1;
        }

        // Project: B^T = S^T Q; Jacobi gives B^T = V Sigma W^T, so U = Q W.
        let mut bt = Mat::zeros(n, l);
        for j in 0..l {
            op.apply_transpose(q.col(j), bt.col_mut(j));
        }
        let factors = jacobi_svd(&bt)?;
        let u_full = q.matmul(&factors.v);
        let v_full = factors.u;
        let sigma_full = factors.sigma;

        let sigma_1 = sigma_full[0];
        let mut residuals = vec![0.0; k];
        let mut out = vec![0.0; m];
        for (i, res) in residuals.iter_mut().enumerate() {
            scratch_n.copy_from_slice(v_full.col(i));
            op.apply(&scratch_n, &mut out);
            let si = sigma_full[i];
            let mut acc = 0.0;
            for (o, &u) in out.iter().zip(u_full.col(i)) {
                let d = o - si * u;
                acc += d * d;
            }
            *res = acc.sqrt();
        }
        let bound = params.tol * sigma_1;
        if sigma_1 == 0.0 || residuals.iter().all(|&r| r <= bound) {
            return Ok(finish_embedding(u_full, v_full, sigma_full, residuals, k));
        }
        if iters_done >= params.max_iter {
            return Err(Error::NonConvergence {
                max_iter: params.max_iter,
                residuals,
            });
        }
        rounds = 2;
    }
}

fn finish_embedding(
    u_full: Mat,
    v_full: Mat,
    sigma_full: Vec<f64>,
    residuals: Vec<f64>,
    k: usize,
) -> SpectralEmbedding {
    let m = u_full.n_rows();
    let n = v_full.n_rows();
    let mut u_c = Mat::zeros(m, k);
    let mut u_p = Mat::zeros(n, k);
    let mut sigma = vec![0.0; k];
    for i in 0..k {
        sigma[i] = sigma_full[i];
        u_c.col_mut(i).copy_from_slice(u_full.col(i));
        u_p.col_mut(i).copy_from_slice(v_full.col(i));
        // Sign convention: largest-magnitude entry of the left vector is
        // positive; ties break to the lowest index.
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for (r, &x) in u_c.col(i).iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = r;
            }
        }
        if u_c.col(i)[best] < 0.0 {
            for x in u_c.col_mut(i) {
                *x = -*x;
            }
            for x in u_p.col_mut(i) {
                *x = -*x;
            }
        }
    }
    SpectralEmbedding {
        u_c,
        u_p,
        sigma,
        u_c_star: None,
        u_p_star: None,
        zero_rows_c: Vec::new(),
        zero_rows_p: Vec::new(),
        residuals,
    }
}

/// Fills the row-normalized copies. Rows with norm below `ZERO_ROW_EPS` are
/// kept as zero vectors and listed per side.
pub fn normalize_rows(embedding: SpectralEmbedding) -> SpectralEmbedding {
    normalize_rows_with(embedding, ZERO_ROW_EPS)
}

pub fn normalize_rows_with(mut embedding: SpectralEmbedding, eps: f64) -> SpectralEmbedding {
    let (star_c, zero_c) = normalized_copy(&embedding.u_c, eps);
    let (star_p, zero_p) = normalized_copy(&embedding.u_p, eps);
    embedding.u_c_star = Some(star_c);
    embedding.u_p_star = Some(star_p);
    embedding.zero_rows_c = zero_c;
    embedding.zero_rows_p = zero_p;
    embedding
}

fn normalized_copy(m: &Mat, eps: f64) -> (Mat, Vec<usize>) {
    let mut out = m.clone();
    let mut zero_rows = Vec::new();
    let k = m.n_cols();
    let mut row = vec![0.0; k];
    for i in 0..m.n_rows() {
        m.row_copy(i, &mut row);
        let norm = norm2(&row);
        if norm < eps {
            zero_rows.push(i);
            for j in 0..k {
                out.set(i, j, 0.0);
            }
        } else {
            for j in 0..k {
                out.set(i, j, m.get(i, j) / norm);
            }
        }
    }
    (out, zero_rows)
}

/// Top `k_max` singular values, for inspecting the spectrum and picking K.
/// Uses a looser residual tolerance than a fit: trailing values near the
/// noise floor converge slowly and only their magnitudes matter here.
pub fn scree<O: LinearOperator + ?Sized>(op: &O, k_max: usize, seed: u64) -> Result<Vec<f64>> {
    let params = SvdParams::new(k_max, seed).with_tol(1e-6);
    Ok(truncated_svd(op, &params)?.sigma)
}

/// `sigma_index(op)` (0-based), for weight calibration between operators.
pub fn singular_value<O: LinearOperator + ?Sized>(op: &O, index: usize, seed: u64) -> Result<f64> {
    let k = (index + 1).min(op.n_rows().min(op.n_cols()));
    let params = SvdParams::new(k, seed).with_tol(1e-8);
    let e = truncated_svd(op, &params)?;
    Ok(e.sigma[k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{build_sparse, SparseMatrix};

    fn diag(values: &[f64]) -> SparseMatrix {
        let triplets: Vec<(usize, usize, f64)> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, v))
            .collect();
        build_sparse(&triplets, values.len(), values.len()).unwrap()
    }

    #[test]
    fn diagonal_spectrum() {
        let m = diag(&[3.0, 2.0, 1.0]);
        let e = truncated_svd(&m, &SvdParams::new(2, 1)).unwrap();
        assert!((e.sigma[0] - 3.0).abs() < 1e-10);
        assert!((e.sigma[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn rank_one_operator() {
        let u = [1.0, -2.0, 2.0];
        let v = [3.0, 4.0];
        let mut triplets = Vec::new();
        for (i, &ui) in u.iter().enumerate() {
            for (j, &vj) in v.iter().enumerate() {
                triplets.push((i, j, ui * vj));
            }
        }
        let m = build_sparse(&triplets, 3, 2).unwrap();
        let e = truncated_svd(&m, &SvdParams::new(2, 7)).unwrap();
        assert!((e.sigma[0] - 15.0).abs() < 1e-9); // ||u|| * ||v|| = 3 * 5
        assert!(e.sigma[1].abs() < 1e-9);
    }

    #[test]
    fn zero_operator() {
        let m = SparseMatrix::empty(5, 4);
        let e = truncated_svd(&m, &SvdParams::new(2, 3)).unwrap();
        assert_eq!(e.sigma, vec![0.0, 0.0]);
    }

    #[test]
    fn k_out_of_range_rejected() {
        let m = diag(&[1.0, 2.0]);
        assert!(truncated_svd(&m, &SvdParams::new(0, 1)).is_err());
        assert!(truncated_svd(&m, &SvdParams::new(3, 1)).is_err());
    }

    #[test]
    fn matches_dense_oracle_on_planted_structure() {
        use nalgebra::DMatrix;
        use rand::Rng;
        let mut rng = crate::seeding::rng_from_seed(42);
        let (m, n, blocks) = (60, 40, 3);
        let mut dense = DMatrix::zeros(m, n);
        let mut triplets = Vec::new();
        for i in 0..m {
            for j in 0..n {
                let same = (i % blocks) == (j % blocks);
                let p = if same { 0.5 } else { 0.05 };
                if rng.random::<f64>() < p {
                    let v = 1.0 + rng.random::<f64>();
                    triplets.push((i, j, v));
                    dense[(i, j)] = v;
                }
            }
        }
        let sp = build_sparse(&triplets, m, n).unwrap();
        let e = truncated_svd(&sp, &SvdParams::new(4, 9)).unwrap();

        let svd = dense.svd(false, false);
        let mut reference: Vec<f64> = svd.singular_values.iter().copied().collect();
        reference.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for i in 0..4 {
            let rel = (e.sigma[i] - reference[i]).abs() / reference[0];
            assert!(rel < 1e-8, "sigma_{i}: {} vs {}", e.sigma[i], reference[i]);
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let m = diag(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        let a = truncated_svd(&m, &SvdParams::new(3, 11)).unwrap();
        let b = truncated_svd(&m, &SvdParams::new(3, 11)).unwrap();
        assert_eq!(a.sigma, b.sigma);
        assert_eq!(a.u_c.data(), b.u_c.data());
        assert_eq!(a.u_p.data(), b.u_p.data());
    }

    #[test]
    fn normalize_rows_unit_norms_and_flags() {
        let m = diag(&[2.0, 1.0]);
        let mut e = truncated_svd(&m, &SvdParams::new(2, 1)).unwrap();
        // Forge a known row to check the arithmetic: (3, 4) -> (0.6, 0.8)
        e.u_c.set(0, 0, 3.0);
        e.u_c.set(0, 1, 4.0);
        // And a zero row.
        e.u_c.set(1, 0, 0.0);
        e.u_c.set(1, 1, 0.0);
        let e = normalize_rows(e);
        let star = e.u_c_star.as_ref().unwrap();
        assert!((star.get(0, 0) - 0.6).abs() < 1e-15);
        assert!((star.get(0, 1) - 0.8).abs() < 1e-15);
        assert_eq!(star.get(1, 0), 0.0);
        assert_eq!(e.zero_rows_c, vec![1]);
        // Non-flagged rows of the post side have unit norm.
        let star_p = e.u_p_star.as_ref().unwrap();
        for i in 0..star_p.n_rows() {
            if e.zero_rows_p.contains(&i) {
                continue;
            }
            let r = star_p.row_vec(i);
            assert!((norm2(&r) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn scree_of_known_spectrum() {
        let m = diag(&[1.0, 0.5, 0.1]);
        let s = scree(&m, 3, 2).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-6);
        assert!((s[1] - 0.5).abs() < 1e-6);
        assert!((s[2] - 0.1).abs() < 1e-6);
    }

    #[test]
    fn left_vector_sign_is_positive_at_peak() {
        let m = diag(&[4.0, 3.0, 2.0, 1.0]);
        let e = truncated_svd(&m, &SvdParams::new(4, 17)).unwrap();
        for i in 0..4 {
            let col = e.u_c.col(i);
            let mut best = 0usize;
            let mut best_abs = 0.0;
            for (r, &x) in col.iter().enumerate() {
                if x.abs() > best_abs {
                    best_abs = x.abs();
                    best = r;
                }
            }
            assert!(col[best] >= 0.0);
        }
    }
}
