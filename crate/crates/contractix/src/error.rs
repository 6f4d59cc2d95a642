//! Error type shared across the crate.
//!
//! Numerical routines distinguish *rejected inputs* (dimension mismatches,
//! out-of-range parameters) from *numerical failures* (singular systems,
//! non-finite values) and *infrastructure failures* (I/O, parsing). The CLI
//! maps each class onto its exit-status contract; see [`crate::harness`].

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// An operand had the wrong length or shape.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A parameter was outside its documented domain.
    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    /// The operation is not defined for these inputs (e.g. a momentum rate
    /// bound at condition number 1, or a Taylor model without a Hessian).
    #[error("unsupported operation: {detail}")]
    Unsupported { detail: String },

    /// A linear system was numerically singular.
    #[error("numerically singular system: {detail}")]
    Singular { detail: String },

    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// Two independent computation routes disagreed beyond tolerance.
    #[error("internal consistency check failed: {detail}")]
    Inconsistent { detail: String },

    /// A text input (CSV dataset, config file) could not be parsed.
    /// `line` is 1-based; 0 means the location is not line-addressable.
    #[error("parse error in {path} at line {line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },

    /// Reading or writing a file failed.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Convenience constructor for [`Error::InvalidParameter`].
    pub fn invalid(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }

    /// Convenience constructor for [`Error::Io`].
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
