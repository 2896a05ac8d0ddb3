use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes. Each variant maps onto one of three broad kinds
/// (I/O, validation, numerical) through [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{context}: line {line}: {message}")]
    Parse {
        context: String,
        line: u64,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("D-efficiency undefined: contrast cross-product is singular")]
    EfficiencyUndefined,

    #[error("information matrix is singular; collinear columns: {}", columns.join(", "))]
    Singular { columns: Vec<String> },

    #[error("training diverged at epoch {epoch} (non-finite loss); lower the learning rate")]
    Diverged { epoch: usize },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Validation,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_) => ErrorKind::Io,
            Error::Parse { .. }
            | Error::EmptyInput(_)
            | Error::Invalid(_)
            | Error::Infeasible(_)
            | Error::Json(_) => ErrorKind::Validation,
            Error::EfficiencyUndefined | Error::Singular { .. } | Error::Diverged { .. } => {
                ErrorKind::Numerical
            }
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
