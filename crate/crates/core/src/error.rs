use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// The three variants line up with the CLI exit codes: `Input` maps to 2,
/// `Resource` to 4; retryable pipeline failures are not errors at all and
/// travel inside [`crate::pipelines::PipelineOutcome`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("resource budget exceeded: {what} needs {needed}, budget is {budget}")]
    Resource {
        what: &'static str,
        needed: String,
        budget: String,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn resource(what: &'static str, needed: impl ToString, budget: impl ToString) -> Self {
        Error::Resource {
            what,
            needed: needed.to_string(),
            budget: budget.to_string(),
        }
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
