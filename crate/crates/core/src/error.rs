use thiserror::Error;

/// A read of a received sample that is not yet available to the reader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("causality violation: requested Y[{requested}] with only {available} samples available")]
pub struct CausalityViolation {
    pub requested: usize,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("slot {slot}, node {node}: {violation}")]
    Causality {
        slot: usize,
        node: usize,
        violation: CausalityViolation,
    },

    #[error("rejected scheme at slot {slot}, node {node}: {reason}")]
    RejectedScheme {
        slot: usize,
        node: usize,
        reason: String,
    },

    #[error("rejected configuration: {0}")]
    Config(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

/// Error returned by node codecs while producing a transmit value or a
/// reconstruction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Causality(#[from] CausalityViolation),
    #[error("{0}")]
    Rejected(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
