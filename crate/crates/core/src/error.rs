//! Error type shared across the crate.
//!
//! Variants are grouped by recovery strategy rather than by module: callers
//! (CLI, FFI) map them onto process exit codes / status codes, so the split
//! mirrors that mapping — invalid input, failed numerics, failed I/O.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid user input: configuration fields, mismatched shapes,
    /// out-of-range parameters. The message names the offending field.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The fixed-point iteration hit its iteration budget, or produced a
    /// non-finite field.
    #[error("solver failed: {0}")]
    Solver(String),

    /// An inverse transform of data that should be conjugate-symmetric left a
    /// significant imaginary part, indicating an upstream consistency bug.
    #[error("inverse transform left imaginary residue {ratio:.3e} of field norm (limit {limit:.1e})")]
    ImaginaryResidue { ratio: f64, limit: f64 },

    /// File-system failure, with the path that was being touched.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file exists but its contents do not parse as the expected format.
    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl Error {
    /// Helper for the pervasive "invalid field" case.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Attach a path to a raw I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Malformed-content error for file readers.
    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
