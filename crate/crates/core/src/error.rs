use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument outside the domain of the operation (zero inverse, bad subfield order, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A square matrix that was required to be invertible is singular.
    /// `witness` is a nonzero row vector `x` with `x·m = 0`.
    #[error("singular matrix (kernel witness {witness:?})")]
    Singular { witness: Vec<u32> },

    #[error("subspaces are not in general position")]
    NotGeneralPosition,

    #[error("invalid spread set: {0}")]
    InvalidSpreadSet(String),

    #[error("invalid spread: {0}")]
    InvalidSpread(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("search budget exceeded: {needed} candidates > budget {budget}")]
    Budget { needed: u64, budget: u64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
