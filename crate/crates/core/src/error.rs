use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("invalid synthetic spec: {0}")]
    Spec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown class {0:?}")]
    Class(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("training diverged at iteration {iteration} (loss = {loss})")]
    Divergence { iteration: usize, loss: f64 },

    #[error("value {value} outside [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("series of length {len} is too short (need at least {min})")]
    TooShort { len: usize, min: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// Process exit code used by the `kfd` binary.
    ///
    /// 2 usage/validation, 3 I/O, 4 degenerate math, 5 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Degenerate(_) | Error::InsufficientData(_) | Error::Class(_) => 4,
            Error::Divergence { .. } => 5,
            _ => 2,
        }
    }
}
