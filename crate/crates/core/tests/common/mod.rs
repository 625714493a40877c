//! Shared test helpers: an independent dense reference implementation of the
//! whole pipeline (built on nalgebra's SVD rather than the crate's solver)
//! and planted-structure instance generators.

#![allow(dead_code)]

use coclust_core::sparse::{build_sparse, LinearOperator, SparseMatrix};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn to_dmatrix(m: &SparseMatrix) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.n_rows(), m.n_cols());
    for (i, j, v) in m.iter_triplets() {
        out[(i, j)] = v;
    }
    out
}

/// Column centering, written directly on the dense form.
pub fn center_dense(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() as f64;
    let mut out = m.clone();
    for j in 0..m.ncols() {
        let mean = m.column(j).sum() / n;
        for i in 0..m.nrows() {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// Row/column count scaling then centering, on the dense form.
pub fn scale_center_dense(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut scaled = m.clone();
    let row_sums: Vec<f64> = (0..m.nrows()).map(|i| m.row(i).sum()).collect();
    let col_sums: Vec<f64> = (0..m.ncols()).map(|j| m.column(j).sum()).collect();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let denom = row_sums[i] * col_sums[j];
            if denom > 0.0 {
                scaled[(i, j)] /= denom.sqrt();
            }
        }
    }
    center_dense(&scaled)
}

/// Dense regularized Laplacian with mean-degree regularizers.
pub fn laplacian_dense(a: &DMatrix<f64>) -> DMatrix<f64> {
    let row_deg: Vec<f64> = (0..a.nrows()).map(|i| a.row(i).sum()).collect();
    let col_deg: Vec<f64> = (0..a.ncols()).map(|j| a.column(j).sum()).collect();
    let total: f64 = row_deg.iter().sum();
    let tau_c = total / a.nrows() as f64;
    let tau_p = total / a.ncols() as f64;
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        let d = (row_deg[i] + tau_c) * (col_deg[j] + tau_p);
        if d > 0.0 {
            a[(i, j)] / d.sqrt()
        } else {
            0.0
        }
    })
}

/// Nearest-rank quantile by full sort (independent of the library's
/// selection-based implementation).
pub fn quantile_nearest_rank(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let k = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

/// Dense reference for W, omega (nonzero-magnitude population), T(W), and S.
pub struct DenseRef {
    pub l: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub omega: f64,
    pub tw: DMatrix<f64>,
    pub s: DMatrix<f64>,
}

pub fn dense_reference(
    a: &DMatrix<f64>,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    alpha: f64,
    text_weight: f64,
) -> DenseRef {
    let l = laplacian_dense(a);
    let w = x.transpose() * &l * y;
    let magnitudes: Vec<f64> = w.iter().map(|v| v.abs()).filter(|&v| v != 0.0).collect();
    let omega = if magnitudes.is_empty() {
        0.0
    } else {
        quantile_nearest_rank(&magnitudes, 1.0 - alpha)
    };
    let tw = w.map(|v| if v.abs() > omega { v } else { 0.0 });
    let s = &l + text_weight * x * &tw * y.transpose();
    DenseRef { l, w, omega, tw, s }
}

/// Densify any operator by applying it to basis vectors.
pub fn operator_to_dense<O: LinearOperator + ?Sized>(op: &O) -> DMatrix<f64> {
    let (m, n) = (op.n_rows(), op.n_cols());
    let mut out = DMatrix::zeros(m, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; m];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..m {
            out[(i, j)] = col[i];
        }
    }
    out
}

/// Largest principal angle (radians) between the column spaces of two
/// orthonormal bases.
pub fn max_principal_angle(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let product = u.transpose() * v;
    let svd = product.svd(false, false);
    let sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .clamp(-1.0, 1.0);
    sigma_min.acos()
}

/// Top-k left singular vectors of a dense matrix as an orthonormal basis.
pub fn dense_top_left_vectors(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap()
    });
    let mut out = DMatrix::zeros(u.nrows(), k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        out.set_column(dst, &u.column(src));
    }
    out
}

pub fn dense_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// A planted 4-block bipartite instance with block-aligned covariates,
/// randomized sizes. Gives the similarity operator a clear gap after the
/// fourth singular value.
pub struct PlantedInstance {
    pub a: SparseMatrix,
    pub x: SparseMatrix,
    pub y: SparseMatrix,
    pub citizen_labels: Vec<usize>,
    pub post_labels: Vec<usize>,
}

pub fn planted_instance(rng: &mut ChaCha8Rng) -> PlantedInstance {
    let n_c = rng.random_range(60..=200);
    let n_p = rng.random_range(40..=100);
    let m_c = rng.random_range(12..=50);
    let m_p = rng.random_range(12..=50);
    let k = 4;
    let citizen_labels: Vec<usize> = (0..n_c).map(|i| i % k).collect();
    let post_labels: Vec<usize> = (0..n_p).map(|j| j % k).collect();

    let p_in = 0.35 + 0.2 * rng.random::<f64>();
    let p_out = 0.02 + 0.03 * rng.random::<f64>();
    let mut a = Vec::new();
    for i in 0..n_c {
        for j in 0..n_p {
            let p = if citizen_labels[i] == post_labels[j] {
                p_in
            } else {
                p_out
            };
            if rng.random::<f64>() < p {
                a.push((i, j, 1.0 + rng.random::<f64>()));
            }
        }
    }

    let mut x = Vec::new();
    for i in 0..n_c {
        for t in 0..m_c {
            let mean = if t % k == citizen_labels[i] { 2.0 } else { 0.2 };
            let v = mean + 0.3 * rng.random::<f64>();
            x.push((i, t, v));
        }
    }
    let mut y = Vec::new();
    for j in 0..n_p {
        for t in 0..m_p {
            let mean = if t % k == post_labels[j] { 2.0 } else { 0.2 };
            let v = mean + 0.3 * rng.random::<f64>();
            y.push((j, t, v));
        }
    }

    PlantedInstance {
        a: build_sparse(&a, n_c, n_p).unwrap(),
        x: build_sparse(&x, n_c, m_c).unwrap(),
        y: build_sparse(&y, n_p, m_p).unwrap(),
        citizen_labels,
        post_labels,
    }
}
