use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An internal contract was broken by the caller, e.g. inserting into a
    /// full array.
    #[error("logic error: {0}")]
    Logic(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("cell {algorithm} eps={epsilon} rep={repetition}: {source}")]
    Cell {
        algorithm: String,
        epsilon: f64,
        repetition: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller's configuration rather than by
    /// the run itself.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) | Error::InvalidInput(_) => true,
            Error::Cell { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
