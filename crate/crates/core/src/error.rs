use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite {what} at the evaluated point")]
    NonFinite { what: &'static str },

    #[error("line search failed after {backtracks} backtracks (last alpha {alpha:e})")]
    LineSearchFailure { backtracks: usize, alpha: f64 },

    #[error("direction is not a descent direction: psi(x, d) = {psi_d:e}")]
    NotDescent { psi_d: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
