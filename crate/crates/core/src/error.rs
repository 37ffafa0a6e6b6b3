use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants mirror the failure classes the CLI maps onto exit codes:
/// input and parse problems are usage errors, resource errors mean a work
/// or length budget ran out.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
