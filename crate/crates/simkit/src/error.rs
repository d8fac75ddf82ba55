use skyfence_core::{DriBin, SensorId, TargetClass};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("unsupported scenario_version {0} (expected 1)")]
    Version(u32),
    #[error("no detector profile for {sensor} / {class} / {bin}")]
    MissingProfile { sensor: SensorId, class: TargetClass, bin: DriBin },
    #[error("target at zero range")]
    ZeroRange,
    #[error("{0} is not an audio class")]
    NotAudioClass(TargetClass),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Frame(#[from] skyfence_fgtracker::TrackerError),
    #[error(transparent)]
    Wav(#[from] hound::Error),
}
