// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("rank deficient at column {column}: pivot {pivot:.3e} below {threshold:.3e}")]
    RankDeficient {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("pivot block is singular to working precision")]
    SingularPivotBlock,

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix of dimension {dim} exceeds the dense limit {limit}")]
    SizeLimit { dim: usize, limit: usize },

    #[error("operator is singular (zero pivot at row {row})")]
    SingularOperator { row: usize },

    #[error("unknown gallery '{0}'")]
    UnknownGallery(String),

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported Matrix Market field '{0}'")]
    UnsupportedField(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("breakdown while building block {block} ({source_detail})")]
    Breakdown { block: usize, source_detail: String },

    #[error("singular recursion coefficient {0}")]
    SingularCoefficient(String),

    #[error("matrix norm {norm:.3e} is beyond the exponential's scaling range")]
    Overflow { norm: f64 },

    #[error("eigenvalue {re:.3e}{im:+.3e}i lies on the closed negative real axis")]
    BranchCutViolation { re: f64, im: f64 },

    #[error("eigenvector basis condition estimate {cond:.3e} exceeds {limit:.1e}")]
    IllConditionedEigenbasis { cond: f64, limit: f64 },

    #[error("function has a pole at zero and the matrix is singular")]
    SingularArgument,

    #[error("logarithmic norm {mu2:.3e} is positive")]
    AssumptionViolated { mu2: f64 },

    #[error("reduced shifted system singular for shifts {0:?}")]
    ReducedSystemSingular(Vec<f64>),

    #[error("{} shifts not converged after {cycles} cycles", unconverged.len())]
    NotConverged { unconverged: Vec<f64>, cycles: usize },

    #[error("bad configuration: {0}")]
    BadConfig(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn dims(rows: usize, cols: usize) -> String {
    format!("{rows}x{cols}")
}
