use thiserror::Error;

use crate::qpoly::QPoly;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("division is not exact (remainder {remainder})")]
    NonExactDivision { remainder: QPoly },

    #[error("not a signed power of q: {0}")]
    NotAMonomial(QPoly),

    #[error("value is not an integer: {0}")]
    NonIntegral(String),

    #[error("closed form produced the negative q-exponent {0}")]
    NegativeExponent(i64),

    #[error("ansatz failure: {0}")]
    AnsatzFailure(String),

    #[error("singular linear system")]
    SingularSystem,

    #[error("fitted form has non-integer coefficients: {0}")]
    NonIntegerFit(String),

    #[error("resource limit exceeded: {0}")]
    LimitExceeded(String),
}

/// Coarse classification of [`Error`], used for exit codes and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Invalid,
    Mismatch,
    Ansatz,
    Resource,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_) | Error::DivisionByZero => ErrorKind::Invalid,
            Error::NonExactDivision { .. } | Error::NonIntegral(_) | Error::NegativeExponent(_) => ErrorKind::Mismatch,
            Error::NotAMonomial(_) | Error::AnsatzFailure(_) | Error::SingularSystem | Error::NonIntegerFit(_) => {
                ErrorKind::Ansatz
            }
            Error::LimitExceeded(_) => ErrorKind::Resource,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn ansatz(msg: impl Into<String>) -> Self {
        Error::AnsatzFailure(msg.into())
    }
}
