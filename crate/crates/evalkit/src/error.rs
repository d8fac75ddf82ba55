use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid evaluation parameters: {0}")]
    InvalidParams(String),
    #[error("no predictions to choose from")]
    Empty,
    #[error("{path}: {msg}")]
    Schema { path: PathBuf, msg: String },
    #[error("detections for unknown clip {0:?}")]
    UnknownClip(String),
    #[error("timeline {name:?} has {got} frames, expected {expected}")]
    TimelineLength { name: String, got: usize, expected: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
