use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("ragged table: line {line} has {found} fields, expected {expected}")]
    Ragged {
        line: usize,
        found: usize,
        expected: usize,
    },

    #[error("non-finite value at line {line}, column {column}")]
    NonFinite { line: usize, column: usize },

    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("row {row} contains {pairs} tied value pair(s)")]
    Ties { row: usize, pairs: u64 },

    #[error("row {row} has zero variance")]
    ZeroVariance { row: usize },

    #[error("matrix is not symmetric (max |a_ij - a_ji| = {0:e})")]
    NotSymmetric(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigenvalue {value:e} is not positive; log-determinant is undefined")]
    NonPositiveEigenvalue { value: f64 },

    #[error("contour quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("function is not evaluable on the support: {0}")]
    NotEvaluable(String),

    #[error("unknown statistic `{0}`")]
    UnknownStatistic(String),

    #[error("calibration domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable tag, used in CLI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Ragged { .. } => "ragged",
            Error::NonFinite { .. } => "non_finite",
            Error::Dimension(_) => "dimension",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::Ties { .. } => "ties",
            Error::ZeroVariance { .. } => "zero_variance",
            Error::NotSymmetric(_) => "not_symmetric",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonPositiveEigenvalue { .. } => "nonpositive_eigenvalue",
            Error::NonConvergence(_) => "non_convergence",
            Error::NotEvaluable(_) => "not_evaluable",
            Error::UnknownStatistic(_) => "unknown_statistic",
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
        }
    }
}
