use thiserror::Error;

/// Errors raised across the crate. The CLI maps each variant to an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("sign convention violated: {0}")]
    SignConvention(String),
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("{what} needs size {required}, which exceeds the cap {cap}")]
    Scale {
        what: String,
        required: usize,
        cap: usize,
    },
    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),
    #[error("not reconstructible: {0}")]
    NotReconstructible(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("postselection impossible: {0}")]
    PostselectionImpossible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn scale(what: impl Into<String>, required: usize, cap: usize) -> Self {
        Error::Scale {
            what: what.into(),
            required,
            cap,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
