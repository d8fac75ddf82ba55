use serde::{Deserialize, Serialize};
use skyfence_acoustics::MfccConfig;
use skyfence_fgtracker::{FcamChannel, GmmParams, TrackerParams};
use skyfence_fusion::FusionConfig;
use skyfence_platform::ControllerParams;

use crate::{BoundedQueue, RuntimeError};

/// When a sensor's status light changes colour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatusThresholds {
    /// Silence longer than this turns a sensor amber.
    pub warn_ms: u64,
    /// Silence longer than this turns it red.
    pub fail_ms: u64,
    /// A dropped message or worker error keeps it amber this long.
    pub drop_warn_ms: u64,
}

impl Default for StatusThresholds {
    fn default() -> Self {
        StatusThresholds { warn_ms: 1000, fail_ms: 3000, drop_warn_ms: 5000 }
    }
}

/// Engine settings. Every field has a default, so `{}` is a valid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub fusion: FusionConfig,
    pub controller: ControllerParams,
    pub gmm: GmmParams,
    pub tracker: TrackerParams,
    pub fcam_min_area: usize,
    pub mfcc: MfccConfig,
    /// One-second clips per class used to fit the audio model at start-up.
    pub audio_training_clips: usize,
    pub queue_capacity: usize,
    pub status: StatusThresholds,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            fusion: FusionConfig::default(),
            controller: ControllerParams::default(),
            gmm: GmmParams::default(),
            tracker: TrackerParams::default(),
            fcam_min_area: FcamChannel::DEFAULT_MIN_AREA,
            mfcc: MfccConfig::default(),
            audio_training_clips: 10,
            queue_capacity: BoundedQueue::<()>::DEFAULT_CAPACITY,
            status: StatusThresholds::default(),
        }
    }
}

impl EngineConfig {
    pub fn from_json(text: &str) -> Result<Self, RuntimeError> {
        let cfg: EngineConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, RuntimeError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        self.fusion.validate()?;
        self.controller.validate()?;
        self.mfcc.validate()?;
        if self.audio_training_clips == 0 {
            return Err(RuntimeError::Config("audio_training_clips must be positive".into()));
        }
        if self.queue_capacity == 0 {
            return Err(RuntimeError::Config("queue_capacity must be positive".into()));
        }
        let s = &self.status;
        if !(s.warn_ms < s.fail_ms) {
            return Err(RuntimeError::Config("status.warn_ms must be below status.fail_ms".into()));
        }
        Ok(())
    }
}
