use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    /// Process exit status: 1 usage, 2 data or I/O, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Data(_) | HarnessError::Io { .. } => 2,
            HarnessError::Numerical(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<mces_core::Error> for HarnessError {
    fn from(e: mces_core::Error) -> Self {
        use mces_core::Error as E;
        match e {
            E::InvalidConfig(_) | E::InvalidArgument(_) | E::DimensionMismatch { .. } => {
                HarnessError::Data(e.to_string())
            }
            E::Divergence { .. }
            | E::NotCommuting { .. }
            | E::NotPositiveDefinite(_)
            | E::Numerical(_)
            | E::DegenerateSeries(_) => HarnessError::Numerical(e.to_string()),
        }
    }
}
