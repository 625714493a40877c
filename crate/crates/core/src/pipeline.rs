//! End-to-end fits: matrices in, co-clustering out.
//!
//! Wires the full chain L -> W -> T(W) -> S -> SVD -> normalize -> k-means
//! behind one options struct, including the calibration that expresses the
//! text weight in comparable units: the text part is rescaled so a chosen
//! singular value (the second by default) matches that of `L`, and the
//! user-facing weight multiplies the rescaled part.

use crate::cluster::{fit as cluster_fit, CoClustering, KmeansParams};
use crate::error::{Error, Result};
use crate::graph::{
    call_response_blocked, laplacian, threshold_with, RegularizedLaplacian, SimilarityOperator,
    ThresholdPopulation, ThresholdRule, ThresholdedW, DEFAULT_BLOCK_WIDTH,
};
use crate::seeding::derive_seed;
use crate::sparse::{center_columns, scale_rows_cols, CenteredMatrix, SparseMatrix};
use crate::spectral::{normalize_rows, singular_value, truncated_svd, SpectralEmbedding, SvdParams};

/// How the document-term matrices are transformed before the fit.
/// (TF-IDF weighting replaces the matrices upstream; it then goes through
/// `Center` like any other input.)
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixTreatment {
    /// Raw matrices, no centering.
    Plain,
    /// Column centering only.
    Center,
    /// Row/column count scaling, then column centering.
    ScaleThenCenter,
}

/// The text-vs-graph balance of the similarity operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TextWeight {
    /// Graph only (`h = 0`).
    GraphOnly,
    /// `L` plus `value` times the calibrated text part.
    Value(f64),
    /// Text part only (`h = infinity`).
    TextOnly,
    /// Text part only, with the call-response matrix replaced by all ones.
    AllOne,
}

/// How the raw text part is rescaled before the user weight applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Calibration {
    /// Use the raw operator (`weight` multiplies `X T(W) Y^T` directly).
    None,
    /// Match the `index`-th singular value (0-based) of the text part to
    /// that of `L`, so a weight of `w` means "w times the graph part".
    SingularValue(usize),
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub treatment: MatrixTreatment,
    pub weight: TextWeight,
    pub calibration: Calibration,
    pub alpha: f64,
    pub threshold_population: ThresholdPopulation,
    pub threshold_rule: ThresholdRule,
    pub k_c: usize,
    pub k_p: usize,
    pub tau_c: Option<f64>,
    pub tau_p: Option<f64>,
    pub svd: SvdTuning,
    pub kmeans: KmeansParams,
    pub block_width: usize,
}

/// SVD knobs without `k` (the embedding dimension is `min(k_c, k_p)`).
#[derive(Clone, Copy, Debug)]
pub struct SvdTuning {
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub oversample: usize,
    pub power_iters: usize,
}

impl SvdTuning {
    pub fn new(seed: u64) -> SvdTuning {
        let d = SvdParams::new(1, seed);
        SvdTuning {
            seed,
            tol: d.tol,
            max_iter: d.max_iter,
            oversample: d.oversample,
            power_iters: d.power_iters,
        }
    }

    fn params(&self, k: usize, seed: u64) -> SvdParams {
        SvdParams {
            k,
            seed,
            tol: self.tol,
            max_iter: self.max_iter,
            oversample: self.oversample,
            power_iters: self.power_iters,
        }
    }
}

impl FitOptions {
    pub fn new(k_c: usize, k_p: usize, seed: u64) -> FitOptions {
        FitOptions {
            treatment: MatrixTreatment::Center,
            weight: TextWeight::Value(0.035),
            calibration: Calibration::SingularValue(1),
            alpha: 0.05,
            threshold_population: ThresholdPopulation::NonZero,
            threshold_rule: ThresholdRule::Magnitude,
            k_c,
            k_p,
            tau_c: None,
            tau_p: None,
            svd: SvdTuning::new(derive_seed(seed, &[1])),
            kmeans: KmeansParams::new(50, derive_seed(seed, &[2])),
            block_width: DEFAULT_BLOCK_WIDTH,
        }
    }

    pub fn embedding_dim(&self) -> usize {
        self.k_c.min(self.k_p)
    }
}

#[derive(Debug)]
pub struct FitResult {
    pub co_clustering: CoClustering,
    pub embedding: SpectralEmbedding,
    /// Present when the mode uses the thresholded call-response matrix.
    pub thresholded: Option<ThresholdedW>,
    /// The resolved multiplier actually applied to `X T(W) Y^T`.
    pub effective_text_weight: Option<f64>,
    /// `(sigma_ref(L), sigma_ref(text part))` when calibration ran.
    pub calibration_values: Option<(f64, f64)>,
    /// Rows/columns of X and Y left unscaled by the count scaling
    /// (zero row or column sums).
    pub x_unscaled: (Vec<usize>, Vec<usize>),
    pub y_unscaled: (Vec<usize>, Vec<usize>),
    /// High-water mark of operator scratch lengths (allocation guard).
    pub peak_scratch: usize,
}

fn prepare(
    m: &SparseMatrix,
    treatment: MatrixTreatment,
) -> Result<(CenteredMatrix, Vec<usize>, Vec<usize>)> {
    match treatment {
        MatrixTreatment::Plain => Ok((CenteredMatrix::identity(m.clone()), vec![], vec![])),
        MatrixTreatment::Center => Ok((center_columns(m.clone()), vec![], vec![])),
        MatrixTreatment::ScaleThenCenter => {
            let scaled = scale_rows_cols(m.clone())?;
            Ok((
                scaled.matrix.center_columns(),
                scaled.zero_sum_rows,
                scaled.zero_sum_cols,
            ))
        }
    }
}

/// Runs the whole fit on prebuilt matrices `a` (citizens x posts),
/// `x` (citizens x citizen-words), `y` (posts x thread-words).
pub fn fit_matrices(
    a: &SparseMatrix,
    x: &SparseMatrix,
    y: &SparseMatrix,
    opts: &FitOptions,
) -> Result<FitResult> {
    if opts.k_c == 0 || opts.k_p == 0 {
        return Err(Error::invalid("k_c/k_p", "must be at least 1"));
    }
    let l = laplacian(a.clone(), opts.tau_c, opts.tau_p)?;
    let k = opts.embedding_dim();

    let needs_text = !matches!(opts.weight, TextWeight::GraphOnly);
    let (x_prep, y_prep, x_unscaled, y_unscaled) = if needs_text {
        let (xp, xr, xc) = prepare(x, opts.treatment)?;
        let (yp, yr, yc) = prepare(y, opts.treatment)?;
        (Some(xp), Some(yp), (xr, xc), (yr, yc))
    } else {
        (None, None, (vec![], vec![]), (vec![], vec![]))
    };

    let needs_w = matches!(opts.weight, TextWeight::Value(_) | TextWeight::TextOnly);
    let thresholded = if needs_w {
        let w = call_response_blocked(
            x_prep.as_ref().unwrap(),
            &l,
            y_prep.as_ref().unwrap(),
            opts.block_width,
        )?;
        Some(threshold_with(
            &w,
            opts.alpha,
            opts.threshold_population,
            opts.threshold_rule,
        )?)
    } else {
        None
    };

    let mut calibration_values = None;
    let operator = match opts.weight {
        TextWeight::GraphOnly => SimilarityOperator::graph_only(l),
        TextWeight::TextOnly => SimilarityOperator::text_only(
            x_prep.clone().unwrap(),
            y_prep.clone().unwrap(),
            thresholded.as_ref().unwrap().matrix.clone(),
        )?,
        TextWeight::AllOne => {
            SimilarityOperator::all_one(x_prep.clone().unwrap(), y_prep.clone().unwrap())?
        }
        TextWeight::Value(h) => {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(Error::invalid(
                    "h",
                    format!("must be a finite nonnegative real, got {h}"),
                ));
            }
            let tw = thresholded.as_ref().unwrap().matrix.clone();
            let scale = match opts.calibration {
                Calibration::None => 1.0,
                Calibration::SingularValue(index) => {
                    let text_op = SimilarityOperator::text_only(
                        x_prep.clone().unwrap(),
                        y_prep.clone().unwrap(),
                        tw.clone(),
                    )?;
                    let sigma_l = singular_value(&l, index, derive_seed(opts.svd.seed, &[101]))?;
                    let sigma_t =
                        singular_value(&text_op, index, derive_seed(opts.svd.seed, &[102]))?;
                    calibration_values = Some((sigma_l, sigma_t));
                    if sigma_t > 0.0 {
                        sigma_l / sigma_t
                    } else {
                        // Degenerate text part; the operator reduces to L.
                        0.0
                    }
                }
            };
            SimilarityOperator::combined(
                l,
                x_prep.clone().unwrap(),
                y_prep.clone().unwrap(),
                tw,
                h * scale,
            )?
        }
    };

    let effective_text_weight = match operator.mode() {
        crate::graph::SimilarityMode::Combined { text_weight } => Some(text_weight),
        crate::graph::SimilarityMode::TextOnly | crate::graph::SimilarityMode::AllOne => Some(1.0),
        crate::graph::SimilarityMode::GraphOnly => None,
    };

    let svd_params = opts.svd.params(k, opts.svd.seed);
    let embedding = normalize_rows(truncated_svd(&operator, &svd_params)?);
    let co_clustering = cluster_fit(&embedding, opts.k_c, opts.k_p, &opts.kmeans)?;

    Ok(FitResult {
        co_clustering,
        embedding,
        thresholded,
        effective_text_weight,
        calibration_values,
        x_unscaled,
        y_unscaled,
        peak_scratch: operator.peak_scratch(),
    })
}

/// The graph-only co-clustering baseline: SVD of the regularized Laplacian
/// itself (no similarity operator is constructed), then the same
/// normalize-and-cluster steps.
pub fn di_sim(
    a: &SparseMatrix,
    tau_c: Option<f64>,
    tau_p: Option<f64>,
    k_c: usize,
    k_p: usize,
    svd: &SvdTuning,
    kmeans: &KmeansParams,
) -> Result<(CoClustering, SpectralEmbedding)> {
    let l: RegularizedLaplacian = laplacian(a.clone(), tau_c, tau_p)?;
    let k = k_c.min(k_p);
    let embedding = normalize_rows(truncated_svd(&l, &svd.params(k, svd.seed))?);
    let cc = cluster_fit(&embedding, k_c, k_p, kmeans)?;
    Ok((cc, embedding))
}
