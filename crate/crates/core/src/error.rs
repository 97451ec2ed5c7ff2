use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The joint SLR space would exceed the simulator's fixed entry budget.
    #[error("capacity exceeded: {what} needs {needed} entries, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("normalization drift {drift:e} exceeds tolerance after {context}")]
    Normalization { drift: f64, context: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
