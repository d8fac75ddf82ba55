use thiserror::Error;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("event log line {line}: {msg}")]
    LogFormat { line: usize, msg: String },
    #[error("event log out of order at seq {seq}: {msg}")]
    LogOrder { seq: u64, msg: String },
    #[error("replay diverged at t={t}: {msg}")]
    ReplayMismatch { t: u64, msg: String },
    #[error(transparent)]
    Sim(#[from] skyfence_simkit::SimError),
    #[error(transparent)]
    Audio(#[from] skyfence_acoustics::AudioError),
    #[error(transparent)]
    Tracker(#[from] skyfence_fgtracker::TrackerError),
    #[error(transparent)]
    Platform(#[from] skyfence_platform::PlatformError),
    #[error(transparent)]
    Fusion(#[from] skyfence_fusion::FusionError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
