use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the reconstruction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A kernel or special function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Regularization or experiment parameters violate their admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Invalid grid geometry.
    #[error("invalid grid: {0}")]
    Grid(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A sampled or computed value is NaN or infinite.
    #[error("non-finite value {value} at node ({i}, {j})")]
    NonFinite { i: usize, j: usize, value: f64 },

    /// A spectral window or evaluation domain is not covered by the available grid.
    #[error("coverage error: {0}")]
    Coverage(String),

    /// The windowed inverse transform produced a non-negligible imaginary part.
    #[error("imaginary residue {ratio:e} exceeds {limit:e} (input is not conjugate-symmetric)")]
    ImaginaryResidue { ratio: f64, limit: f64 },

    /// Malformed input file.
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Numerical failure that is not attributable to bad input.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller's inputs rather than by the computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_) | Error::Grid(_) | Error::GridMismatch(_) | Error::Coverage(_) | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
