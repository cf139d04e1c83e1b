use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix list is empty")]
    EmptyProduct,

    #[error("j_Z{alpha} is not skew-symmetric at entry ({row}, {col})", alpha = .alpha + 1, row = .row + 1, col = .col + 1)]
    NotSkew { alpha: usize, row: usize, col: usize },

    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    #[error("trace spec parse error at position {position}: {message}")]
    TraceSpecParse { position: usize, message: String },

    #[error("malformed rational {0:?}")]
    RationalSyntax(String),

    #[error("malformed j-map: {0}")]
    JMapFormat(String),

    #[error("unknown catalog id {0:?}")]
    UnknownId(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("missing invariant {0}")]
    MissingInvariant(String),

    #[error("conflicting values for {id}: {first} vs {second}")]
    ConflictingValues {
        id: String,
        first: String,
        second: String,
    },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("degenerate Gram matrix")]
    DegenerateGram,

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
