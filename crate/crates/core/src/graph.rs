//! The core operators: regularized graph Laplacian, call-response matrix,
//! hard thresholding, and the combined similarity operator.
//!
//! For an adjacency matrix `A` (citizens x posts) and centered covariate
//! matrices `X` (citizens x citizen-words) and `Y` (posts x thread-words):
//!
//! ```text
//! L = D_C^{-1/2} A D_P^{-1/2}          degrees regularized by tau
//! W = X^T L Y                          word/word correlation along the graph
//! T(W) = W with |entries| <= omega zeroed
//! S = L + weight * X T(W) Y^T          the similarity operator
//! ```
//!
//! `S` is matrix-free: its matvec chains the factor matvecs right-to-left and
//! never materializes `X T(W) Y^T`. An allocation guard asserts that every
//! temporary is bounded by the largest single dimension, so nothing of size
//! `n_rows x n_cols` can ever be allocated by the operator.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::dense::Mat;
use crate::error::{Error, Result};
use crate::sparse::{build_sparse, CenteredMatrix, LinearOperator, SparseMatrix};

// ---------------------------------------------------------------------------
// Regularized Laplacian
// ---------------------------------------------------------------------------

/// `L[i][j] = A[i][j] / sqrt((rowdeg_i + tau_c) * (coldeg_j + tau_p))`.
///
/// The regularizers default to the average row/column degree. Rows or columns
/// with zero regularized degree (only possible when the matching tau is zero)
/// act as zero.
#[derive(Clone, Debug)]
pub struct RegularizedLaplacian {
    a: SparseMatrix,
    tau_c: f64,
    tau_p: f64,
    d_c_inv_sqrt: Vec<f64>,
    d_p_inv_sqrt: Vec<f64>,
}

pub fn laplacian(
    a: SparseMatrix,
    tau_c: Option<f64>,
    tau_p: Option<f64>,
) -> Result<RegularizedLaplacian> {
    if let Some((row, col, value)) = a.first_negative() {
        return Err(Error::NegativeEntry { row, col, value });
    }
    let total = a.total_sum();
    let tau_c = tau_c.unwrap_or(total / a.n_rows().max(1) as f64);
    let tau_p = tau_p.unwrap_or(total / a.n_cols().max(1) as f64);
    for (name, tau) in [("tau_c", tau_c), ("tau_p", tau_p)] {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::invalid(name, format!("must be >= 0, got {tau}")));
        }
    }
    let inv_sqrt = |deg: f64, tau: f64| {
        let d = deg + tau;
        if d > 0.0 {
            1.0 / d.sqrt()
        } else {
            0.0
        }
    };
    let d_c_inv_sqrt = a.row_sums().iter().map(|&d| inv_sqrt(d, tau_c)).collect();
    let d_p_inv_sqrt = a.col_sums().iter().map(|&d| inv_sqrt(d, tau_p)).collect();
    Ok(RegularizedLaplacian {
        a,
        tau_c,
        tau_p,
        d_c_inv_sqrt,
        d_p_inv_sqrt,
    })
}

impl RegularizedLaplacian {
    pub fn adjacency(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn tau_p(&self) -> f64 {
        self.tau_p
    }

    pub fn entry_scale(&self, i: usize, j: usize) -> f64 {
        self.d_c_inv_sqrt[i] * self.d_p_inv_sqrt[j]
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.a.n_cols()]; self.a.n_rows()];
        for (i, j, v) in self.a.iter_triplets() {
            dense[i][j] = v * self.entry_scale(i, j);
        }
        dense
    }
}

impl LinearOperator for RegularizedLaplacian {
    fn n_rows(&self) -> usize {
        self.a.n_rows()
    }

    fn n_cols(&self) -> usize {
        self.a.n_cols()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = self.d_p_inv_sqrt.iter().zip(v).map(|(&s, &x)| s * x).collect();
        self.a.apply(&scaled, out);
        for (o, &s) in out.iter_mut().zip(&self.d_c_inv_sqrt) {
            *o *= s;
        }
    }

    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = self.d_c_inv_sqrt.iter().zip(u).map(|(&s, &x)| s * x).collect();
        self.a.apply_transpose(&scaled, out);
        for (o, &s) in out.iter_mut().zip(&self.d_p_inv_sqrt) {
            *o *= s;
        }
    }
}

// ---------------------------------------------------------------------------
// Call-response matrix
// ---------------------------------------------------------------------------

/// The unthresholded call-response matrix `W = X^T L Y`, held dense
/// (citizen-words x thread-words).
#[derive(Clone, Debug)]
pub struct CallResponse {
    values: Mat,
}

impl CallResponse {
    /// Wraps an explicit matrix of call-response values (rows: citizen
    /// words, columns: thread words).
    pub fn from_values(values: Mat) -> CallResponse {
        CallResponse { values }
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    pub fn n_citizen_terms(&self) -> usize {
        self.values.n_rows()
    }

    pub fn n_thread_terms(&self) -> usize {
        self.values.n_cols()
    }
}

pub const DEFAULT_BLOCK_WIDTH: usize = 256;

/// Computes `W = X^T L Y` column-block-wise: column `r` is
/// `X^T (L (Y e_r))`, so `X` and `Y` are never densified. Blocks of
/// `block_width` columns are dispatched to threads; each column lands at a
/// fixed offset, so the result does not depend on scheduling.
pub fn call_response_blocked(
    x: &CenteredMatrix,
    l: &RegularizedLaplacian,
    y: &CenteredMatrix,
    block_width: usize,
) -> Result<CallResponse> {
    if x.n_rows() != l.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "call_response: X rows vs L rows",
            expected: l.n_rows(),
            got: x.n_rows(),
        });
    }
    if y.n_rows() != l.n_cols() {
        return Err(Error::DimensionMismatch {
            context: "call_response: Y rows vs L cols",
            expected: l.n_cols(),
            got: y.n_rows(),
        });
    }
    let m_c = x.n_cols();
    let m_p = y.n_cols();
    let n_c = l.n_rows();
    let n_p = l.n_cols();
    let block_width = block_width.max(1);

    let mut values = Mat::zeros(m_c, m_p);
    values
        .data_mut()
        .par_chunks_mut(m_c * block_width)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut y_col = vec![0.0; n_p];
            let mut l_y = vec![0.0; n_c];
            for (offset, w_col) in chunk.chunks_mut(m_c).enumerate() {
                let r = block * block_width + offset;
                y.column_dense(r, &mut y_col);
                l.apply(&y_col, &mut l_y);
                x.apply_transpose(&l_y, w_col);
            }
        });
    Ok(CallResponse { values })
}

pub fn call_response(
    x: &CenteredMatrix,
    l: &RegularizedLaplacian,
    y: &CenteredMatrix,
) -> Result<CallResponse> {
    call_response_blocked(x, l, y, DEFAULT_BLOCK_WIDTH)
}

// ---------------------------------------------------------------------------
// Thresholding
// ---------------------------------------------------------------------------

/// Which entries the threshold quantile is taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdPopulation {
    /// Quantile over nonzero |W| entries. Centered sparse data produces many
    /// exact zeros that would otherwise distort the quantile.
    NonZero,
    /// Quantile over all entries.
    All,
}

/// Which entries survive once omega is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdRule {
    /// Keep entries with |W| > omega (large negative correlations survive).
    Magnitude,
    /// Keep entries with W > omega only.
    SignedPositive,
}

/// The sparse thresholded call-response matrix together with the threshold
/// that produced it.
#[derive(Clone, Debug)]
pub struct ThresholdedW {
    pub matrix: SparseMatrix,
    pub omega: f64,
    pub alpha: f64,
    /// Set when the quantile population was empty (all-zero W); the result is
    /// empty and omega is 0.
    pub all_zero: bool,
}

/// Nearest-rank quantile: the k-th smallest with `k = ceil(q * n)`, clamped
/// to at least 1 (so `q = 0` returns the minimum).
fn nearest_rank_quantile(values: &mut [f64], q: f64) -> f64 {
    debug_assert!(!values.is_empty());
    let n = values.len();
    let k = ((q * n as f64).ceil() as usize).clamp(1, n);
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
    *kth
}

/// Hard-thresholds `W` at the `1 - alpha` nearest-rank quantile of the
/// selected |W| population; entries with magnitude <= omega are zeroed.
pub fn threshold_with(
    w: &CallResponse,
    alpha: f64,
    population: ThresholdPopulation,
    rule: ThresholdRule,
) -> Result<ThresholdedW> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in (0, 1], got {alpha}"),
        ));
    }
    let mut magnitudes: Vec<f64> = w
        .values
        .data()
        .iter()
        .map(|v| v.abs())
        .filter(|&v| match population {
            ThresholdPopulation::NonZero => v != 0.0,
            ThresholdPopulation::All => true,
        })
        .collect();

    let (omega, all_zero) = if magnitudes.is_empty() {
        (0.0, true)
    } else {
        (nearest_rank_quantile(&mut magnitudes, 1.0 - alpha), false)
    };

    let m_c = w.n_citizen_terms();
    let mut triplets = Vec::new();
    for r in 0..w.n_thread_terms() {
        let col = w.values.col(r);
        for s in 0..m_c {
            let v = col[s];
            let keep = match rule {
                ThresholdRule::Magnitude => v.abs() > omega,
                ThresholdRule::SignedPositive => v > omega,
            };
            if keep {
                triplets.push((s, r, v));
            }
        }
    }
    let matrix = build_sparse(&triplets, m_c, w.n_thread_terms())?;
    Ok(ThresholdedW {
        matrix,
        omega,
        alpha,
        all_zero,
    })
}

/// [`threshold_with`] using the nonzero-magnitude population and the
/// magnitude survival rule.
pub fn threshold(w: &CallResponse, alpha: f64) -> Result<ThresholdedW> {
    threshold_with(w, alpha, ThresholdPopulation::NonZero, ThresholdRule::Magnitude)
}

// ---------------------------------------------------------------------------
// Similarity operator
// ---------------------------------------------------------------------------

/// How the graph and text parts combine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimilarityMode {
    /// `S = L` (the graph-only co-clustering baseline).
    GraphOnly,
    /// `S = L + text_weight * X T(W) Y^T`.
    Combined { text_weight: f64 },
    /// `S = X T(W) Y^T` (the infinite-weight limit).
    TextOnly,
    /// `S = X J Y^T` with `J` all ones, applied implicitly.
    AllOne,
}

enum TextKernel {
    Thresholded(SparseMatrix),
    AllOnes { n_citizen_terms: usize },
}

struct TextPart {
    x: CenteredMatrix,
    y: CenteredMatrix,
    kernel: TextKernel,
    weight: f64,
}

/// Guard on operator temporaries: every scratch buffer must fit in the
/// largest single dimension, so the operator can never allocate anything of
/// size `n_rows * n_cols`. The high-water mark is observable.
pub struct AllocGuard {
    max_len: usize,
    peak: AtomicUsize,
}

impl AllocGuard {
    fn new(max_len: usize) -> AllocGuard {
        AllocGuard {
            max_len,
            peak: AtomicUsize::new(0),
        }
    }

    fn scratch(&self, len: usize) -> Vec<f64> {
        assert!(
            len <= self.max_len,
            "operator scratch of {} exceeds the largest dimension {}",
            len,
            self.max_len
        );
        self.peak.fetch_max(len, Ordering::Relaxed);
        vec![0.0; len]
    }

    pub fn peak(&self) -> usize {
        self.peak.load(Ordering::Relaxed)
    }
}

/// Matrix-free similarity operator (see module doc).
pub struct SimilarityOperator {
    laplacian: Option<RegularizedLaplacian>,
    text: Option<TextPart>,
    mode: SimilarityMode,
    n_rows: usize,
    n_cols: usize,
    guard: AllocGuard,
}

impl SimilarityOperator {
    pub fn graph_only(l: RegularizedLaplacian) -> SimilarityOperator {
        let (n_rows, n_cols) = (l.n_rows(), l.n_cols());
        let guard = AllocGuard::new(n_rows.max(n_cols));
        SimilarityOperator {
            laplacian: Some(l),
            text: None,
            mode: SimilarityMode::GraphOnly,
            n_rows,
            n_cols,
            guard,
        }
    }

    pub fn combined(
        l: RegularizedLaplacian,
        x: CenteredMatrix,
        y: CenteredMatrix,
        tw: SparseMatrix,
        text_weight: f64,
    ) -> Result<SimilarityOperator> {
        if !(text_weight >= 0.0 && text_weight.is_finite()) {
            return Err(Error::invalid(
                "text_weight",
                format!("must be a finite nonnegative real, got {text_weight}"),
            ));
        }
        check_text_dims(Some(&l), &x, &y, Some(&tw))?;
        let (n_rows, n_cols) = (l.n_rows(), l.n_cols());
        let guard = AllocGuard::new(max_dim(n_rows, n_cols, x.n_cols(), y.n_cols()));
        Ok(SimilarityOperator {
            laplacian: Some(l),
            text: Some(TextPart {
                x,
                y,
                kernel: TextKernel::Thresholded(tw),
                weight: text_weight,
            }),
            mode: SimilarityMode::Combined { text_weight },
            n_rows,
            n_cols,
            guard,
        })
    }

    pub fn text_only(
        x: CenteredMatrix,
        y: CenteredMatrix,
        tw: SparseMatrix,
    ) -> Result<SimilarityOperator> {
        check_text_dims(None, &x, &y, Some(&tw))?;
        let (n_rows, n_cols) = (x.n_rows(), y.n_rows());
        let guard = AllocGuard::new(max_dim(n_rows, n_cols, x.n_cols(), y.n_cols()));
        Ok(SimilarityOperator {
            laplacian: None,
            text: Some(TextPart {
                x,
                y,
                kernel: TextKernel::Thresholded(tw),
                weight: 1.0,
            }),
            mode: SimilarityMode::TextOnly,
            n_rows,
            n_cols,
            guard,
        })
    }

    pub fn all_one(x: CenteredMatrix, y: CenteredMatrix) -> Result<SimilarityOperator> {
        check_text_dims(None, &x, &y, None)?;
        let (n_rows, n_cols) = (x.n_rows(), y.n_rows());
        let guard = AllocGuard::new(max_dim(n_rows, n_cols, x.n_cols(), y.n_cols()));
        let n_citizen_terms = x.n_cols();
        Ok(SimilarityOperator {
            laplacian: None,
            text: Some(TextPart {
                x,
                y,
                kernel: TextKernel::AllOnes { n_citizen_terms },
                weight: 1.0,
            }),
            mode: SimilarityMode::AllOne,
            n_rows,
            n_cols,
            guard,
        })
    }

    pub fn mode(&self) -> SimilarityMode {
        self.mode
    }

    /// High-water mark of scratch buffer lengths allocated so far.
    pub fn peak_scratch(&self) -> usize {
        self.guard.peak()
    }
}

fn max_dim(a: usize, b: usize, c: usize, d: usize) -> usize {
    a.max(b).max(c).max(d)
}

fn check_text_dims(
    l: Option<&RegularizedLaplacian>,
    x: &CenteredMatrix,
    y: &CenteredMatrix,
    tw: Option<&SparseMatrix>,
) -> Result<()> {
    if let Some(l) = l {
        if x.n_rows() != l.n_rows() {
            return Err(Error::DimensionMismatch {
                context: "similarity: X rows vs L rows",
                expected: l.n_rows(),
                got: x.n_rows(),
            });
        }
        if y.n_rows() != l.n_cols() {
            return Err(Error::DimensionMismatch {
                context: "similarity: Y rows vs L cols",
                expected: l.n_cols(),
                got: y.n_rows(),
            });
        }
    }
    if let Some(tw) = tw {
        if tw.n_rows() != x.n_cols() {
            return Err(Error::DimensionMismatch {
                context: "similarity: T(W) rows vs X cols",
                expected: x.n_cols(),
                got: tw.n_rows(),
            });
        }
        if tw.n_cols() != y.n_cols() {
            return Err(Error::DimensionMismatch {
                context: "similarity: T(W) cols vs Y cols",
                expected: y.n_cols(),
                got: tw.n_cols(),
            });
        }
    }
    Ok(())
}

impl LinearOperator for SimilarityOperator {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        match &self.laplacian {
            Some(l) => l.apply(v, out),
            None => out.fill(0.0),
        }
        if let Some(text) = &self.text {
            // weight * X (K (Y^T v)), right to left
            let mut yt_v = self.guard.scratch(text.y.n_cols());
            text.y.apply_transpose(v, &mut yt_v);
            let k_ytv = match &text.kernel {
                TextKernel::Thresholded(tw) => {
                    let mut t = self.guard.scratch(tw.n_rows());
                    tw.apply(&yt_v, &mut t);
                    t
                }
                TextKernel::AllOnes { n_citizen_terms } => {
                    let total: f64 = yt_v.iter().sum();
                    let mut t = self.guard.scratch(*n_citizen_terms);
                    t.fill(total);
                    t
                }
            };
            let mut x_part = self.guard.scratch(self.n_rows);
            text.x.apply(&k_ytv, &mut x_part);
            for (o, &p) in out.iter_mut().zip(&x_part) {
                *o += text.weight * p;
            }
        }
    }

    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        match &self.laplacian {
            Some(l) => l.apply_transpose(u, out),
            None => out.fill(0.0),
        }
        if let Some(text) = &self.text {
            // weight * Y (K^T (X^T u))
            let mut xt_u = self.guard.scratch(text.x.n_cols());
            text.x.apply_transpose(u, &mut xt_u);
            let kt_xtu = match &text.kernel {
                TextKernel::Thresholded(tw) => {
                    let mut t = self.guard.scratch(tw.n_cols());
                    tw.apply_transpose(&xt_u, &mut t);
                    t
                }
                TextKernel::AllOnes { .. } => {
                    let total: f64 = xt_u.iter().sum();
                    let mut t = self.guard.scratch(text.y.n_cols());
                    t.fill(total);
                    t
                }
            };
            let mut y_part = self.guard.scratch(self.n_cols);
            text.y.apply(&kt_xtu, &mut y_part);
            for (o, &p) in out.iter_mut().zip(&y_part) {
                *o += text.weight * p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::center_columns;

    fn toy_graph() -> SparseMatrix {
        build_sparse(&[(0, 0, 3.0), (1, 0, 2.0), (1, 1, 2.0), (2, 1, 1.0)], 3, 2).unwrap()
    }

    #[test]
    fn laplacian_scalar() {
        let a = build_sparse(&[(0, 0, 1.0)], 1, 1).unwrap();
        let l = laplacian(a, Some(0.0), Some(0.0)).unwrap();
        assert_eq!(l.to_dense(), vec![vec![1.0]]);
    }

    #[test]
    fn laplacian_hand_example() {
        // A = [[1,1],[0,1]], tau = 0
        let a = build_sparse(&[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)], 2, 2).unwrap();
        let l = laplacian(a, Some(0.0), Some(0.0)).unwrap();
        let d = l.to_dense();
        assert!((d[0][0] - 1.0 / (2.0f64 * 1.0).sqrt()).abs() < 1e-15);
        assert!((d[0][1] - 1.0 / (2.0f64 * 2.0).sqrt()).abs() < 1e-15);
        assert_eq!(d[1][0], 0.0);
        assert!((d[1][1] - 1.0 / (1.0f64 * 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn laplacian_default_tau_is_mean_degree() {
        let l = laplacian(toy_graph(), None, None).unwrap();
        assert!((l.tau_c() - 8.0 / 3.0).abs() < 1e-15);
        assert!((l.tau_p() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn laplacian_rejects_negative() {
        let a = build_sparse(&[(0, 0, -1.0)], 1, 1).unwrap();
        assert!(laplacian(a, None, None).is_err());
    }

    #[test]
    fn laplacian_zero_degree_zero_tau() {
        // Second row has no entries; with tau = 0 its inverse degree is 0.
        let a = build_sparse(&[(0, 0, 1.0)], 2, 1).unwrap();
        let l = laplacian(a, Some(0.0), Some(0.0)).unwrap();
        let out = l.matvec(&[1.0]).unwrap();
        assert_eq!(out[1], 0.0);
        assert!(out.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn call_response_scalar() {
        // X = (2), Y = (3), L = (0.5), no centering -> W = 2 * 0.5 * 3 = 3
        let x = CenteredMatrix::identity(build_sparse(&[(0, 0, 2.0)], 1, 1).unwrap());
        let y = CenteredMatrix::identity(build_sparse(&[(0, 0, 3.0)], 1, 1).unwrap());
        // A = 0.5 with tau = 0.5 on both sides: 0.5 / sqrt(1 * 1) = 0.5
        let a = build_sparse(&[(0, 0, 0.5)], 1, 1).unwrap();
        let l = laplacian(a, Some(0.5), Some(0.5)).unwrap();
        assert_eq!(l.to_dense(), vec![vec![0.5]]);
        let w = call_response(&x, &l, &y).unwrap();
        assert!((w.values().get(0, 0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn call_response_shared_indicator_column() {
        // L = identity, X = Y with a single indicator column: the diagonal
        // entry equals the sum of centered squares.
        let n = 6;
        let indicator: Vec<(usize, usize, f64)> =
            [0usize, 2, 3].iter().map(|&i| (i, 0, 1.0)).collect();
        let base = build_sparse(&indicator, n, 1).unwrap();
        let x = center_columns(base.clone());
        let y = center_columns(base);
        let eye: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
        let l = laplacian(build_sparse(&eye, n, n).unwrap(), Some(0.0), Some(0.0)).unwrap();
        let w = call_response(&x, &l, &y).unwrap();
        let mean: f64 = 3.0 / 6.0;
        let expected = 3.0 * (1.0 - mean).powi(2) + 3.0 * mean * mean;
        assert!((w.values().get(0, 0) - expected).abs() < 1e-12);
    }

    #[test]
    fn call_response_uninformative_covariate_is_centered_noise() {
        // x centered and independent of L and y: W entries average to ~0
        // across trials.
        use rand::Rng;
        let mut rng = crate::seeding::rng_from_seed(11);
        let n = 30;
        let eye: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
        let l = laplacian(build_sparse(&eye, n, n).unwrap(), Some(0.0), Some(0.0)).unwrap();
        let y_base = build_sparse(
            &(0..n).map(|i| (i, 0, (i % 3) as f64)).collect::<Vec<_>>(),
            n,
            1,
        )
        .unwrap();
        let y = CenteredMatrix::identity(y_base);
        let trials = 100;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let x_triplets: Vec<(usize, usize, f64)> =
                (0..n).map(|i| (i, 0, rng.random::<f64>())).collect();
            let x = center_columns(build_sparse(&x_triplets, n, 1).unwrap());
            let w = call_response(&x, &l, &y).unwrap();
            let v = w.values().get(0, 0);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / trials as f64;
        let std = (sum_sq / trials as f64 - mean * mean).sqrt();
        // mean of centered products concentrates near zero
        assert!(
            mean.abs() < 4.0 * std / (trials as f64).sqrt() + 1e-3,
            "mean {mean} too far from zero (std {std})"
        );
    }

    fn call_response_from_values(values: &[f64]) -> CallResponse {
        CallResponse {
            values: Mat::from_row_major(1, values.len(), values),
        }
    }

    #[test]
    fn threshold_keeps_top_alpha_fraction() {
        let values: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        let w = call_response_from_values(&values);
        let t = threshold(&w, 0.05).unwrap();
        assert_eq!(t.matrix.nnz(), 5);
        assert_eq!(t.omega, 95.0);
        assert!(!t.all_zero);
    }

    #[test]
    fn threshold_alpha_one_keeps_everything_above_min() {
        let values: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let w = call_response_from_values(&values);
        let t = threshold(&w, 1.0).unwrap();
        assert_eq!(t.omega, 1.0);
        assert_eq!(t.matrix.nnz(), 9);
    }

    #[test]
    fn threshold_all_equal_kills_everything() {
        let w = call_response_from_values(&[2.0; 12]);
        let t = threshold(&w, 0.25).unwrap();
        assert_eq!(t.omega, 2.0);
        assert_eq!(t.matrix.nnz(), 0);
    }

    #[test]
    fn threshold_all_zero_flags() {
        let w = call_response_from_values(&[0.0; 4]);
        let t = threshold(&w, 0.05).unwrap();
        assert!(t.all_zero);
        assert_eq!(t.omega, 0.0);
        assert_eq!(t.matrix.nnz(), 0);
    }

    #[test]
    fn threshold_magnitude_keeps_negatives() {
        let w = call_response_from_values(&[-10.0, 1.0, 2.0, 3.0]);
        let t = threshold(&w, 0.25).unwrap();
        // omega = 3 (nearest-rank 75% of {1,2,3,10}); only |  -10| survives
        assert_eq!(t.omega, 3.0);
        assert_eq!(t.matrix.nnz(), 1);
        assert_eq!(t.matrix.iter_triplets().next(), Some((0, 0, -10.0)));
        let signed = threshold_with(
            &w,
            0.25,
            ThresholdPopulation::NonZero,
            ThresholdRule::SignedPositive,
        )
        .unwrap();
        assert_eq!(signed.matrix.nnz(), 0);
    }

    #[test]
    fn threshold_monotone_in_alpha() {
        use rand::Rng;
        let mut rng = crate::seeding::rng_from_seed(5);
        let values: Vec<f64> = (0..200).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let w = call_response_from_values(&values);
        let mut last_nnz = 0;
        for alpha in [0.01, 0.05, 0.1, 0.5, 1.0] {
            let t = threshold(&w, alpha).unwrap();
            assert!(t.matrix.nnz() >= last_nnz, "alpha {alpha} lost entries");
            last_nnz = t.matrix.nnz();
        }
    }

    #[test]
    fn graph_only_matches_laplacian_exactly() {
        let l = laplacian(toy_graph(), None, None).unwrap();
        let op = SimilarityOperator::graph_only(l.clone());
        let v = vec![0.7, -0.3];
        assert_eq!(op.matvec(&v).unwrap(), l.matvec(&v).unwrap());
        let u = vec![1.0, 2.0, 3.0];
        assert_eq!(op.rmatvec(&u).unwrap(), l.rmatvec(&u).unwrap());
    }

    #[test]
    fn text_only_matches_manual_chain() {
        let x = center_columns(build_sparse(&[(0, 0, 1.0), (1, 1, 2.0), (2, 0, 3.0)], 3, 2).unwrap());
        let y = center_columns(build_sparse(&[(0, 0, 1.0), (1, 1, 1.0)], 2, 2).unwrap());
        let tw = build_sparse(&[(0, 1, 0.5), (1, 0, -1.0)], 2, 2).unwrap();
        let op = SimilarityOperator::text_only(x.clone(), y.clone(), tw.clone()).unwrap();
        let v = vec![0.4, -1.1];
        let manual = x
            .matvec(&tw.matvec(&y.rmatvec(&v).unwrap()).unwrap())
            .unwrap();
        assert_eq!(op.matvec(&v).unwrap(), manual);
    }

    #[test]
    fn all_one_is_column_sum_broadcast() {
        let x = center_columns(build_sparse(&[(0, 0, 1.0), (1, 1, 2.0)], 2, 2).unwrap());
        let y = center_columns(build_sparse(&[(0, 0, 3.0), (1, 1, 4.0), (2, 0, 1.0)], 3, 2).unwrap());
        let op = SimilarityOperator::all_one(x.clone(), y.clone()).unwrap();
        let v = vec![0.2, 0.4, -0.6];
        let ytv = y.rmatvec(&v).unwrap();
        let total: f64 = ytv.iter().sum();
        let manual = x.matvec(&[total; 2]).unwrap();
        assert_eq!(op.matvec(&v).unwrap(), manual);
    }

    #[test]
    fn operator_linearity() {
        let x = center_columns(build_sparse(&[(0, 0, 1.0), (2, 1, 2.0)], 3, 2).unwrap());
        let y = center_columns(build_sparse(&[(0, 1, 1.5), (1, 0, 0.5)], 2, 2).unwrap());
        let l = laplacian(toy_graph(), None, None).unwrap();
        let tw = build_sparse(&[(0, 0, 1.0), (1, 1, 1.0)], 2, 2).unwrap();
        let op = SimilarityOperator::combined(l, x, y, tw, 0.7).unwrap();
        let v1 = vec![0.3, -0.4];
        let v2 = vec![-1.0, 0.8];
        let combo: Vec<f64> = v1.iter().zip(&v2).map(|(&a, &b)| 2.0 * a - 0.5 * b).collect();
        let lhs = op.matvec(&combo).unwrap();
        let s1 = op.matvec(&v1).unwrap();
        let s2 = op.matvec(&v2).unwrap();
        for i in 0..lhs.len() {
            assert!((lhs[i] - (2.0 * s1[i] - 0.5 * s2[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_text_weight_rejected() {
        let x = center_columns(build_sparse(&[(0, 0, 1.0)], 3, 1).unwrap());
        let y = center_columns(build_sparse(&[(0, 0, 1.0)], 2, 1).unwrap());
        let l = laplacian(toy_graph(), None, None).unwrap();
        let tw = build_sparse(&[], 1, 1).unwrap();
        assert!(SimilarityOperator::combined(l, x, y, tw, -0.1).is_err());
    }

    #[test]
    fn scratch_stays_bounded() {
        let x = center_columns(build_sparse(&[(0, 0, 1.0), (2, 1, 2.0)], 3, 2).unwrap());
        let y = center_columns(build_sparse(&[(0, 1, 1.5), (1, 0, 0.5)], 2, 2).unwrap());
        let l = laplacian(toy_graph(), None, None).unwrap();
        let tw = build_sparse(&[(0, 0, 1.0)], 2, 2).unwrap();
        let op = SimilarityOperator::combined(l, x, y, tw, 1.0).unwrap();
        let _ = op.matvec(&[1.0, 2.0]).unwrap();
        let _ = op.rmatvec(&[1.0, 2.0, 3.0]).unwrap();
        assert!(op.peak_scratch() <= 3);
    }
}
