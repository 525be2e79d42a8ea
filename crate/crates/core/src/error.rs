use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Boltzmann exponent too large to represent the partition function.
    #[error("overflow: beta*eps = {0} exceeds the representable range")]
    Overflow(f64),

    /// A state-dependent precondition failed (e.g. mean spin not along z).
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
