use thiserror::Error;

/// Errors raised by the tensor, Pauli, lattice and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid wiring diagram: {0}")]
    Diagram(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("matrix is singular (smallest singular value {smallest_singular_value:e})")]
    Singular { smallest_singular_value: f64 },

    #[error("unsupported inversion mode: {0}")]
    Mode(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
