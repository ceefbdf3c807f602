use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure classes, grouped so front ends can map them onto exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input violates a stated precondition (bad dimension, parameter out of range, ...).
    Precondition(String),
    /// A structurally invalid value, e.g. a non-unimodular basis.
    InvalidInput(String),
    /// The requested computation is not supported for these inputs.
    Unsupported(String),
    /// Work would exceed a compute budget. `max_feasible` carries the largest
    /// admissible value of the offending parameter when one is known.
    Budget { message: String, max_feasible: Option<u64> },
    /// A soundness audit failed. This is a bug, not a user error.
    Audit(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn budget(msg: impl Into<String>, max_feasible: Option<u64>) -> Self {
        Error::Budget { message: msg.into(), max_feasible }
    }

    pub fn audit(msg: impl Into<String>) -> Self {
        Error::Audit(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::Budget { message, max_feasible: Some(n) } => {
                write!(f, "compute budget exceeded: {message} (max feasible {n})")
            }
            Error::Budget { message, max_feasible: None } => {
                write!(f, "compute budget exceeded: {message}")
            }
            Error::Audit(m) => write!(f, "audit failure: {m}"),
        }
    }
}

impl core::error::Error for Error {}
