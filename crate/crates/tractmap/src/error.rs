use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] tractmap_core::Error),
    #[error("trk parse error at byte {offset}: {message}")]
    Trk { offset: usize, message: String },
    #[error("json error at {path}: {message}")]
    Json { path: String, message: String },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn trk(offset: usize, message: impl Into<String>) -> Self {
        Error::Trk {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn json(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Json {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 for unreadable or malformed input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Trk { .. } | Error::Json { .. } | Error::File { .. } | Error::Input(_) => 2,
            Error::Core(_) | Error::Io(_) => 1,
        }
    }
}
