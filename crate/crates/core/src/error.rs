//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed instance or certificate text.
    #[error("parse error: {0}")]
    Parse(String),
    /// An argument violated an operation precondition.
    #[error("invalid input: {0}")]
    Input(String),
    /// A configured size cap was exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("consistency failure: {0}")]
    Consistency(String),
}
