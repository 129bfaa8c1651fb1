use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated a precondition (site out of range, bad order, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A brute-force path was requested for a chain longer than the configured cap.
    #[error("resource limit: {what} needs N = {spins} spins, cap is {cap}")]
    Resource {
        what: &'static str,
        spins: usize,
        cap: usize,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
