use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("operation requires {expected} boundary conditions")]
    WrongBoundary { expected: &'static str },

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("inverse iteration stagnated after two starts (residual {residual:.3e})")]
    InverseIterationStagnated { residual: f64 },

    #[error("vector is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("zero vector")]
    ZeroVector,

    #[error("sweep failed at L={size}, point {point}, sample {sample}: {source}")]
    Sample {
        size: usize,
        point: usize,
        sample: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("too many failed samples at L={size}, point {point}: {failed} of {total}")]
    FailureBudget {
        size: usize,
        point: usize,
        failed: usize,
        total: usize,
        #[source]
        first: Box<Error>,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("critical-point estimates disagree: {0}")]
    CriticalPoint(String),

    #[error("cache entry {key} is corrupted: {reason}")]
    Corrupted { key: String, reason: String },

    #[error("cache entry {key} already exists with a different manifest")]
    Collision { key: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn fit(msg: impl Into<String>) -> Self {
        Error::Fit(msg.into())
    }
}
