use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed image file: {0}")]
    MalformedFile(String),
    #[error("unsupported image depth: {0}")]
    UnsupportedDepth(String),
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("image is empty")]
    EmptyImage,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid target size {0}: must be a power of two >= 1")]
    InvalidTargetSize(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no pixel pairs in window for the requested offset")]
    NoPairs,
    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    ImageSmallerThanWindow {
        width: usize,
        height: usize,
        window: usize,
    },
    #[error("image {width}x{height} is smaller than the 3x3 kernel")]
    ImageSmallerThanKernel { width: usize, height: usize },
    #[error("invalid phantom geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}
