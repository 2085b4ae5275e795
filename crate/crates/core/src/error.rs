use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Budget exhaustion and "assumed bounded" outcomes are *not* errors; they
/// are reported through the result types of the individual operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter failed validation. `field` names the offending input.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A symbolic or grid computation would exceed its memory/time guard.
    #[error("resource guard exceeded: {0}")]
    Resource(String),

    /// An iterative scheme failed to converge. `defect` is the best residual seen.
    #[error("{what} did not converge (best defect {defect:e})")]
    NonConvergence { what: &'static str, defect: f64 },

    /// A bisection predicate pair fired on both sides of a bracket.
    #[error("inconsistent predicates: {0}")]
    Inconsistent(String),

    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
