use std::fmt;

use serde::{Deserialize, Serialize};
use skyfence_airdata::{AircraftUpdate, NmeaFix};
use skyfence_core::{DetectionReport, SensorId, Timestamp};
use skyfence_fgtracker::Cue;
use skyfence_fusion::SensorWeights;
use skyfence_platform::{PlatformPose, SearchPattern};

use crate::EngineSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkerId {
    Ircam,
    Vcam,
    Fcam,
    Audio,
    Adsb,
    Gps,
}

impl WorkerId {
    pub const ALL: [WorkerId; 6] = [WorkerId::Ircam, WorkerId::Vcam, WorkerId::Fcam, WorkerId::Audio, WorkerId::Adsb, WorkerId::Gps];

    pub fn as_str(self) -> &'static str {
        match self {
            WorkerId::Ircam => "ircam",
            WorkerId::Vcam => "vcam",
            WorkerId::Fcam => "fcam",
            WorkerId::Audio => "audio",
            WorkerId::Adsb => "adsb",
            WorkerId::Gps => "gps",
        }
    }

    pub fn sensor(self) -> Option<SensorId> {
        match self {
            WorkerId::Ircam => Some(SensorId::Ircam),
            WorkerId::Vcam => Some(SensorId::Vcam),
            WorkerId::Fcam => Some(SensorId::Fcam),
            WorkerId::Audio => Some(SensorId::Audio),
            WorkerId::Adsb => Some(SensorId::Adsb),
            WorkerId::Gps => None,
        }
    }
}

impl fmt::Display for WorkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", content = "payload", rename_all = "snake_case")]
pub enum WorkerAction {
    Run,
    Idle,
    /// Worker-specific settings.
    Configure(serde_json::Value),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerCommand {
    pub worker: WorkerId,
    #[serde(flatten)]
    pub action: WorkerAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerAck {
    pub worker: WorkerId,
    pub t: Timestamp,
    #[serde(flatten)]
    pub action: WorkerAction,
    pub worker_fps: f64,
    /// Set when a configure payload was rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Main loop to worker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "input", rename_all = "snake_case")]
pub enum WorkerInput {
    Command(WorkerCommand),
    /// Platform pose for cameras mounted on it.
    Pose(PlatformPose),
}

/// Worker to main loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum WorkerEvent {
    /// One processed frame or audio tick and whatever it detected.
    Detections { worker: WorkerId, t: Timestamp, fps: f64, reports: Vec<DetectionReport> },
    /// One processed fish-eye frame.
    Cue { t: Timestamp, fps: f64, cue: Option<Cue> },
    Aircraft { t: Timestamp, update: AircraftUpdate },
    Fix { t: Timestamp, fix: NmeaFix },
    /// Alive but nothing to report (idle, or no traffic).
    Heartbeat { worker: WorkerId, t: Timestamp, fps: f64 },
    Ack(WorkerAck),
    Error { worker: WorkerId, t: Timestamp, message: String },
    /// Messages lost to queue overflow since the previous notice.
    Dropped { worker: WorkerId, count: u64 },
}

impl WorkerEvent {
    pub fn worker(&self) -> WorkerId {
        match self {
            WorkerEvent::Detections { worker, .. }
            | WorkerEvent::Heartbeat { worker, .. }
            | WorkerEvent::Error { worker, .. }
            | WorkerEvent::Dropped { worker, .. } => *worker,
            WorkerEvent::Cue { .. } => WorkerId::Fcam,
            WorkerEvent::Aircraft { .. } => WorkerId::Adsb,
            WorkerEvent::Fix { .. } => WorkerId::Gps,
            WorkerEvent::Ack(a) => a.worker,
        }
    }

    /// Event time, if it has one.
    pub fn time(&self) -> Option<Timestamp> {
        match self {
            WorkerEvent::Detections { t, .. }
            | WorkerEvent::Cue { t, .. }
            | WorkerEvent::Aircraft { t, .. }
            | WorkerEvent::Fix { t, .. }
            | WorkerEvent::Heartbeat { t, .. }
            | WorkerEvent::Error { t, .. } => Some(*t),
            WorkerEvent::Ack(a) => Some(a.t),
            WorkerEvent::Dropped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Run,
    Idle,
}

/// Operator command, as received on the telemetry socket or from a script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    /// Fields left out keep their current value.
    SetFusion {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<SensorWeights>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_sensors: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window_ms: Option<u64>,
    },
    Slew { pan: f64, tilt: f64 },
    SetPattern { pattern: SearchPattern },
    Worker { id: WorkerId, action: RunState },
}

impl Command {
    pub fn parse(text: &str) -> Result<Command, String> {
        serde_json::from_str(text).map_err(|e| format!("malformed command: {e}"))
    }
}

/// Outbound telemetry message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TelemetryFrame {
    Snapshot(Box<EngineSnapshot>),
    Ack {
        t: Timestamp,
        command: Command,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        worker_fps: Option<f64>,
    },
    Error {
        message: String,
    },
}

impl TelemetryFrame {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("telemetry frames serialise")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_wire_format() {
        let c = Command::parse(r#"{"type":"set_fusion","min_sensors":2}"#).unwrap();
        assert_eq!(c, Command::SetFusion { weights: None, min_sensors: Some(2), threshold: None, window_ms: None });
        let c = Command::parse(r#"{"type":"slew","pan":10.5,"tilt":30}"#).unwrap();
        assert_eq!(c, Command::Slew { pan: 10.5, tilt: 30.0 });
        let c = Command::parse(r#"{"type":"set_pattern","pattern":"off"}"#).unwrap();
        assert_eq!(c, Command::SetPattern { pattern: SearchPattern::Off });
        let c = Command::parse(r#"{"type":"worker","id":"ircam","action":"idle"}"#).unwrap();
        assert_eq!(c, Command::Worker { id: WorkerId::Ircam, action: RunState::Idle });
        assert!(Command::parse(r#"{"type":"reboot"}"#).is_err());
        assert!(Command::parse(r#"{"type":"slew","pan":"left","tilt":3}"#).is_err());
        assert!(Command::parse("not json").is_err());
        let back = serde_json::to_string(&Command::Slew { pan: 1.0, tilt: 2.0 }).unwrap();
        assert_eq!(back, r#"{"type":"slew","pan":1.0,"tilt":2.0}"#);
    }

    #[test]
    fn frames_carry_their_type() {
        let e = TelemetryFrame::Error { message: "x".into() }.to_json();
        assert_eq!(e, r#"{"type":"error","message":"x"}"#);
        let a = TelemetryFrame::Ack { t: Timestamp(5), command: Command::Slew { pan: 0.0, tilt: 1.0 }, worker_fps: None }.to_json();
        assert!(a.starts_with(r#"{"type":"ack""#));
    }

    #[test]
    fn worker_messages_round_trip() {
        let ack = WorkerEvent::Ack(WorkerAck {
            worker: WorkerId::Audio,
            t: Timestamp(3),
            action: WorkerAction::Configure(serde_json::json!({"k": 1})),
            worker_fps: 20.0,
            error: None,
        });
        let s = serde_json::to_string(&ack).unwrap();
        assert_eq!(serde_json::from_str::<WorkerEvent>(&s).unwrap(), ack);
        let cmd = WorkerInput::Command(WorkerCommand { worker: WorkerId::Ircam, action: WorkerAction::Idle });
        let s = serde_json::to_string(&cmd).unwrap();
        assert_eq!(serde_json::from_str::<WorkerInput>(&s).unwrap(), cmd);
    }
}
