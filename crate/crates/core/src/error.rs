use thiserror::Error;

use crate::problem::History;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("model error at {history}: {reason}")]
    Model { history: History, reason: String },

    #[error("policy is undefined at reached history {0}")]
    PolicyIncomplete(History),

    #[error("{what} count {count} exceeds the budget of {cap}")]
    Budget { what: &'static str, count: u128, cap: u128 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal consistency violated: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
