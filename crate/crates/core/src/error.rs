//! Error type shared by every module in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({row}, {col}) out of range for a {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("non-finite value {value} at ({row}, {col})")]
    NonFiniteValue { row: usize, col: usize, value: f64 },

    #[error("negative entry {value} at ({row}, {col}); this operation requires nonnegative data")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "singular value solver did not converge within {max_iter} power iterations; \
         residuals {residuals:?}"
    )]
    NonConvergence {
        max_iter: usize,
        residuals: Vec<f64>,
    },

    #[error("cannot form {k} clusters from {n_points} points")]
    TooManyClusters { k: usize, n_points: usize },

    #[error("cluster {cluster} is empty")]
    EmptyCluster { cluster: usize },

    #[error("unknown cluster id {cluster}; clustering has {n_clusters} clusters")]
    UnknownCluster { cluster: usize, n_clusters: usize },

    #[error("label vectors have different lengths: {left} vs {right}")]
    LabelLengthMismatch { left: usize, right: usize },

    #[error("edge probability {value} outside [0, 1] at block cell ({row}, {col})")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f64 },

    #[error("instance too large to densify: {n_rows} x {n_cols} exceeds {limit} cells")]
    SizeGuard {
        n_rows: usize,
        n_cols: usize,
        limit: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("corpus record error: {0}")]
    Corpus(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
