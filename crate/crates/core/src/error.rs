use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("undefined ratio: {0} has zero power")]
    UndefinedRatio(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no RDF peak: every slope is <= 0")]
    NoPeak,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid network spec: {0}")]
    InvalidSpec(String),

    #[error("layer index {index} out of range for a {layers}-layer network")]
    LayerIndex { index: i64, layers: usize },

    #[error("invalid probability target: {0}")]
    InvalidTarget(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("IDX {path}: {message}")]
    Idx { path: PathBuf, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownConfigKeys(Vec<String>),

    #[error("non-uniform grid: {0}")]
    NonUniformGrid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
