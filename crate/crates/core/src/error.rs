use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CascadeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error("{what} exceeds cap ({size} > {limit}); {hint}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("policy {policy} is not defined for this graph: {reason}")]
    FamilyMismatch { policy: String, reason: String },

    #[error("unknown state {0}")]
    UnknownState(String),

    #[error("non-threshold behavior: {0}")]
    NonThreshold(String),

    #[error("{0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, CascadeError>;
