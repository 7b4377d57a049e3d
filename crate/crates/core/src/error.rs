use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopoError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error at {}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, TopoError>;

pub(crate) fn invalid(msg: impl Into<String>) -> TopoError {
    TopoError::InvalidArgument(msg.into())
}

impl TopoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TopoError::Io {
            path: path.into(),
            source,
        }
    }
}
