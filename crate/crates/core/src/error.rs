use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("cell `{label}` overlaps another cell at basis index {index}")]
    Overlap { label: String, index: usize },

    #[error("partition does not cover basis index {index}")]
    NotExhaustive { index: usize },

    #[error("projector family invariant violated: {0}")]
    InvalidFamily(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("grouping is not a partition: {0}")]
    NotAPartition(String),

    #[error("tau = {tau:e} is not small against the state norm {norm:e}")]
    TauTooLarge { tau: f64, norm: f64 },

    #[error("microbranch {index} has weight {weight:e} above the cluster slack {limit:e}")]
    MicrobranchTooHeavy { index: usize, weight: f64, limit: f64 },

    #[error("microbranches {0} and {1} are not orthogonal")]
    NotOrthogonal(usize, usize),

    #[error("enumeration too large: {0}")]
    TooLarge(String),

    #[error("branch set carries no state vectors")]
    MissingVectors,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
