use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A signal set failed validation (size, energy, duplicate points, ...).
    #[error("invalid signal set: {0}")]
    Constellation(String),

    /// A labelling or labelling profile failed validation.
    #[error("invalid labelling: {0}")]
    Labeling(String),

    /// A message index or point index is out of range.
    #[error("index out of range: {0}")]
    IndexRange(String),

    /// Inputs violate an operation precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A text table or config fragment could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Simulation or measurement cannot proceed with the data at hand.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
