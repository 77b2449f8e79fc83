//! Error types shared across the library.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while factoring channels or solving for powers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Matrix or vector dimensions do not line up with what the operation expects.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// The stacked channel matrix has numerically deficient rank, so the
    /// factorization is ill-posed for this channel pair.
    #[error("stacked channel matrix is rank deficient: rank {rank} < required {required}")]
    RankDeficient { rank: usize, required: usize },

    /// A covariance input fails the positive semidefiniteness check.
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    /// An index addressed a scheme or subchannel that does not exist.
    #[error("index {index} out of range for {context} of length {len}")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        len: usize,
    },

    /// Brute-force reference search refused a problem too large to enumerate.
    #[error("{context}: size {size} exceeds the exhaustive-search limit {limit}")]
    DimensionTooLarge {
        context: &'static str,
        size: usize,
        limit: usize,
    },

    /// An input value is outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative solver failed to make progress or produced non-finite values.
    #[error("numerical failure in {context}: {detail}")]
    NumericalFailure { context: &'static str, detail: String },

    /// Service integration is impossible for this channel pair: the factorization
    /// provides no usable subchannels for one of the two services.
    #[error("service integration infeasible: {detail}")]
    PhySiInfeasible { detail: String },

    /// A channel file or inline matrix description could not be parsed.
    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    /// Underlying I/O failure while reading or writing channel files.
    #[error("i/o error on {path}: {detail}")]
    Io { path: String, detail: String },
}
