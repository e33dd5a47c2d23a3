use std::io;
use std::path::PathBuf;

use crate::formats::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] qrom_core::Error),
    #[error("inconsistent file: {0}")]
    Inconsistent(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for input/format problems, 2 for dimension or consistency problems.
    pub fn exit_code(&self) -> i32 {
        use qrom_core::Error as Core;
        match self {
            Error::Core(
                Core::DimensionMismatch { .. }
                | Core::LinearDependence { .. }
                | Core::NotNormalized { .. }
                | Core::NotOrthonormal { .. }
                | Core::NotUnitary { .. }
                | Core::RotationMismatch { .. },
            )
            | Error::Inconsistent(_) => 2,
            _ => 1,
        }
    }
}
