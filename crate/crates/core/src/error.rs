use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had the wrong length for the operation.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: String,
        expected: usize,
        actual: usize,
    },

    /// A NaN or infinity showed up where finite math was required.
    #[error("non-finite value in {0}")]
    NumericFault(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("incompatible checkpoint: {0}")]
    IncompatibleCheckpoint(String),

    /// A command was invoked without an artifact a prior phase produces.
    #[error("missing dependency: {0}")]
    MissingDependency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("frozen parameters changed: {0}")]
    FrozenParamsChanged(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::Shape {
            context: context.into(),
            expected,
            actual,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
