use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use skyfence_airdata::{AircraftState, HistorySample, NmeaFix};
use skyfence_core::{DetectionReport, Timestamp};
use skyfence_fgtracker::Cue;
use skyfence_fusion::{FusedDecision, FusionConfig};
use skyfence_platform::{ControlSource, PlatformPose, SearchPattern};

use crate::WorkerId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorState {
    Ok,
    Warn,
    Fail,
    /// Not running: disabled in the scenario or commanded idle.
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorStatus {
    pub state: SensorState,
    pub fps: f64,
    pub last_seen: Option<Timestamp>,
    pub dropped: u64,
}

/// Servo pulse widths in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulses {
    pub pan_us: f64,
    pub tilt_us: f64,
}

/// Everything the console shows, as of the end of one main-loop tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSnapshot {
    pub tick: u64,
    pub t: Timestamp,
    pub pose: PlatformPose,
    pub source: ControlSource,
    pub pulses: Pulses,
    pub pattern: SearchPattern,
    pub sensors: BTreeMap<WorkerId, SensorStatus>,
    /// Latest report per sensor inside the fusion window.
    pub reports: Vec<DetectionReport>,
    pub decision: FusedDecision,
    pub cue: Option<Cue>,
    pub aircraft: Vec<AircraftState>,
    /// Position history per ICAO address (hex), oldest first.
    pub history: BTreeMap<String, Vec<HistorySample>>,
    pub gps: Option<NmeaFix>,
    pub fusion: FusionConfig,
}
