use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps these onto exit codes: argument-shaped errors exit 2,
/// capability/budget errors exit 3, numerical/solver failures exit 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column index {index} out of range for matrix with {cols} columns")]
    ColumnOutOfRange { index: usize, cols: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("unsupported capability: {0}")]
    Capability(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit-code class used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::DimensionMismatch(_)
            | Error::ColumnOutOfRange { .. }
            | Error::Parse(_)
            | Error::Io(_) => 2,
            Error::Capability(_) | Error::BudgetExceeded(_) => 3,
            Error::NonFinite(_) | Error::Solver(_) | Error::Precondition(_) | Error::Generation(_) => 4,
        }
    }
}
