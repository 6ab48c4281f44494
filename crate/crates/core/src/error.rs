use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested work exceeds a hard size limit.
    #[error("capacity exceeded: {what} requires {required}, limit is {limit}")]
    Capacity {
        what: String,
        required: String,
        limit: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    /// A proven invariant failed at runtime; always a bug.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("invalid instance: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn capacity(
        what: impl Into<String>,
        required: impl ToString,
        limit: impl ToString,
    ) -> Self {
        Error::Capacity {
            what: what.into(),
            required: required.to_string(),
            limit: limit.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
