use thiserror::Error;

/// Errors raised across the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("matrix is not positive semidefinite (pivot {pivot}, value {value:e})")]
    NotPsd { pivot: usize, value: f64 },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("instance too large for enumeration: n = {n} exceeds {limit}; use the relaxation solvers instead")]
    TooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
