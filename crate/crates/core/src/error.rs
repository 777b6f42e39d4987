use thiserror::Error;

/// Errors raised by generator handling, the solvers and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An evaluation point or data entry outside `(0, ∞)`.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed call arguments (unsorted grids, `a >= b`, `n < 2`, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A generator description that cannot be used as given.
    #[error("configuration error: {0}")]
    Config(String),

    /// Declared or estimated data contradicting the class conditions.
    #[error("inconsistent generator data: {0}")]
    Inconsistent(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A root finder or maximizer could not bracket or converge.
    #[error("solver error: {0}")]
    Solver(String),

    /// Two independent computations that must agree did not.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 4,
            Error::Solver(_) | Error::Consistency(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
