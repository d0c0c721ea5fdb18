use thiserror::Error;

/// Problems reading textual input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid number `{0}`")]
    Number(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid instance: {0}")]
    Semantic(String),
}

/// Errors raised by the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("instance is infeasible: {0}")]
    Infeasible(String),
    #[error("numeric overflow guard: {0}")]
    Overflow(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("iteration guard exceeded: {0}")]
    IterationGuard(String),
    #[error("oracle budget exceeded: {0}")]
    Budget(String),
    /// An internal invariant failed; this is a bug, not an input condition.
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure_internal {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Internal(format!($($arg)+)));
        }
    };
}

pub(crate) use ensure_internal;
