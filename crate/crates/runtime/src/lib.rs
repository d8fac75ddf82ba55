//! Orchestration of the detection system.
//!
//! Sensor workers run on their own and talk to the main loop only through
//! bounded queues ([`BoundedQueue`]). The main loop ([`Engine`]) ticks at a
//! fixed rate: it drains the queues, fuses the reports, arbitrates and
//! steps the pan/tilt platform, and publishes an [`EngineSnapshot`]. Each
//! tick's inputs and outputs go to a JSON-lines event log that [`replay`]
//! can re-run exactly.
//!
//! Two drivers exist: [`VirtualRun`] steps everything on a virtual clock
//! and is fully reproducible, while [`run_live`] paces workers and main
//! loop by the wall clock. [`Hub`] and [`serve`] expose the snapshot stream
//! and accept operator commands over WebSocket.

mod analysis;
mod config;
mod engine;
mod error;
mod live;
mod eventlog;
mod messages;
mod queue;
mod serve;
mod sim;
mod snapshot;
mod workers;

pub use analysis::{false_decisions, persistence_timeline, ticks_from_log, FalseDecisions, TickView};
pub use config::{EngineConfig, StatusThresholds};
pub use engine::{ClientId, Engine, PoseRecord, RecordKind, TickOutput, ACK_TIMEOUT_TICKS, SCRIPT_CLIENT};
pub use error::RuntimeError;
pub use live::{run_live, CommandQueue, LiveStats};
pub use eventlog::{read_log, read_log_file, replay, LogRecord, LogWriter};
pub use messages::{Command, RunState, TelemetryFrame, WorkerAck, WorkerAction, WorkerCommand, WorkerEvent, WorkerId, WorkerInput};
pub use queue::BoundedQueue;
pub use serve::{bind, serve, Hub};
pub use sim::{read_script, run_to_log, run_virtual, tick_count, tick_time, ScriptEntry, VirtualRun};
pub use snapshot::{EngineSnapshot, Pulses, SensorState, SensorStatus};
pub use workers::{
    spawn_workers, train_audio_model, AdsbWorker, AudioWorker, CameraWorker, FisheyeWorker, FpsMeter, GpsWorker, Worker,
    HEARTBEAT_MS,
};
