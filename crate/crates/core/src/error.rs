//! Error type shared across the solver.

use std::fmt;
use std::io;

/// Unified error for configuration, setup, and runtime failures.
#[derive(Debug)]
pub enum SolverError {
    /// Invalid run configuration or malformed input (CLI exit code 2).
    Config(String),
    /// Bad arguments to a numerical routine (shape mismatch, negative order, ...).
    InvalidInput(String),
    /// A state left the admissible set (negative density/pressure, NaN).
    Inadmissible { element: usize, detail: String },
    /// The time loop cannot continue (CLI exit code 3).
    Numerical(String),
    /// File I/O while reading configs or writing outputs.
    Io(io::Error),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Config(msg) => write!(f, "configuration error: {msg}"),
            SolverError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            SolverError::Inadmissible { element, detail } => {
                write!(f, "inadmissible state in element {element}: {detail}")
            }
            SolverError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            SolverError::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for SolverError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SolverError::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for SolverError {
    fn from(err: io::Error) -> Self {
        SolverError::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
