//! Co-clustering of sparse bipartite graphs fused with high-dimensional node
//! covariates (typically document-term matrices).
//!
//! The pipeline normalizes the bipartite adjacency matrix into a regularized
//! Laplacian, measures covariate/covariate correlation along the graph with a
//! call-response matrix, selects the strong correlations by hard thresholding,
//! and co-clusters rows and columns from the truncated SVD of the combined
//! similarity operator. Every heavy operator is matrix-free: centering,
//! scaling, and the covariate product are applied as rank-one corrections and
//! chained matvecs, so nothing of size `n_rows x n_cols` is ever formed.
//!
//! Modules:
//! - [`sparse`]: sparse matrices, implicit centering/scaling, matvec kernels.
//! - [`text`]: corpus ingestion, tokenization, vocabularies, term matrices.
//! - [`graph`]: regularized Laplacian, call-response matrix, thresholding,
//!   and the combined similarity operator.
//! - [`spectral`]: matrix-free randomized truncated SVD and row normalization.
//! - [`cluster`]: k-means co-clustering and cluster-centrality.
//! - [`diagnostics`]: attention ratios, cluster interaction matrices, keyword
//!   scores.
//! - [`simgen`]: block-model generators, population similarity oracle, the
//!   mis-clustering metric, and the benchmark harness.
//! - [`pipeline`]: end-to-end fits with weight calibration.

pub mod cluster;
pub mod dense;
pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod pipeline;
pub mod seeding;
pub mod simgen;
pub mod sparse;
pub mod spectral;
pub mod text;

pub use error::{Error, Result};
