use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size {requested} exceeds the budget cap of {cap} (pass an override to force)")]
    Budget { requested: usize, cap: usize },

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("polynomial {0} is reducible")]
    Reducible(String),

    #[error("trace-derived global phase is not unimodular")]
    NotUnimodular,

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
