use std::fmt;

use thiserror::Error;

use crate::estimators::ConcentrationEstimate;
use crate::projection::ProjectionReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which kind of block a singular-block error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Clique,
    Separator,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockKind::Clique => f.write_str("clique"),
            BlockKind::Separator => f.write_str("separator"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range 1..={p}")]
    BadIndex { index: usize, p: usize },

    #[error("node {node} is not covered by any clique")]
    UncoveredNode { node: usize },

    #[error("clique {inner:?} duplicates or is contained in clique {outer:?}")]
    DuplicateOrNestedClique { inner: Vec<usize>, outer: Vec<usize> },

    #[error("clique list is not decomposable: {0}")]
    NotDecomposable(String),

    #[error("pattern is not chordal: {witness}")]
    NotChordal { witness: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e} at ({row}, {col}))")]
    Asymmetric { row: usize, col: usize, asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("nonzero entry ({row}, {col}) lies outside the graph's edge set")]
    PatternViolation { row: usize, col: usize },

    /// `index` is 1-based: cliques count from C_1, separators from S_2.
    #[error("{kind} block {index} is singular")]
    SingularBlock { kind: BlockKind, index: usize },

    #[error("too few samples: n = {n}, need at least {required}")]
    TooFewSamples { n: usize, required: usize },

    #[error("trace of the sample scatter is zero")]
    ZeroTrace,

    #[error("projection did not converge within {iterations} iterations")]
    NotConverged {
        iterations: usize,
        best: Box<(ConcentrationEstimate, ProjectionReport)>,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Validation errors are problems with the caller's input; everything
    /// else is a runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io(_)
                | Error::NotConverged { .. }
                | Error::SingularBlock { .. }
                | Error::NotPositiveDefinite
                | Error::ZeroTrace
        )
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::BadIndex { .. } => "BadIndex",
            Error::UncoveredNode { .. } => "UncoveredNode",
            Error::DuplicateOrNestedClique { .. } => "DuplicateOrNestedClique",
            Error::NotDecomposable(_) => "NotDecomposable",
            Error::NotChordal { .. } => "NotChordal",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFinite { .. } => "NonFinite",
            Error::Asymmetric { .. } => "Asymmetric",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::PatternViolation { .. } => "PatternViolation",
            Error::SingularBlock { .. } => "SingularBlock",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::ZeroTrace => "ZeroTrace",
            Error::NotConverged { .. } => "NotConverged",
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
