use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    NotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode image {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("cannot encode image {path}: {message}")]
    Encode { path: PathBuf, message: String },
    #[error("image too small: {width}x{height} (minimum {min}x{min})")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("segmentation failed at iteration {iteration}: {reason}")]
    SegmentationFailed { iteration: usize, reason: String },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("empty mask")]
    EmptyMask,
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("feature {index} has zero variance")]
    ZeroVariance { index: usize },
    #[error("not enough samples: {0}")]
    InsufficientSamples(String),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
