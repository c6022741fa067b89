use thiserror::Error;

pub type Result<T, E = GeError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A domain invariant (normalization, Hermiticity, completeness, ...) does not hold.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("degenerate input: candidate {index} has residual norm {norm:e} after projection")]
    Degenerate { index: usize, norm: f64 },

    #[error("resource limit: {requested} elements requested, limit is {limit}")]
    ResourceLimit { requested: u128, limit: u128 },
}

impl GeError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GeError::InvalidArgument(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        GeError::InvariantViolation(msg.into())
    }
}
