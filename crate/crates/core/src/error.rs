use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Pixels that no filtered patch wrote to during aggregation.
    #[error("coverage gap: {count} uncovered pixel(s), first at {first:?}")]
    CoverageGap {
        count: usize,
        first: Vec<[usize; 3]>,
    },

    #[error("empty mask: {0}")]
    EmptyMask(String),

    #[error("band {band} has zero reference mean")]
    ZeroBandMean { band: usize },

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wraps the error with the path it concerns.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input data rather than bad usage.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::InvalidArgument(_) => false,
            Error::File { source, .. } => source.is_data_error(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
