use skyfence_core::{TargetClass, Timestamp};
use skyfence_evalkit::Timeline;
use skyfence_fusion::FusedDecision;
use skyfence_platform::PlatformPose;
use skyfence_simkit::{visible_targets, Scenario};

use crate::{LogRecord, PoseRecord, RecordKind, RuntimeError, WorkerEvent, WorkerId};

/// One main-loop tick reconstructed from the event log.
#[derive(Debug, Clone)]
pub struct TickView {
    pub t: Timestamp,
    /// Pose the platform cameras had while this tick's frames were taken.
    pub camera_pose: PlatformPose,
    pub events: Vec<WorkerEvent>,
    pub decision: FusedDecision,
}

/// Splits a log into ticks and recovers its scenario.
pub fn ticks_from_log(records: &[LogRecord]) -> Result<(Scenario, Vec<TickView>), RuntimeError> {
    let first = records.first().ok_or(RuntimeError::LogFormat { line: 1, msg: "empty log".into() })?;
    let scn: Scenario = serde_json::from_value(first.payload.get("scenario").cloned().unwrap_or_default())?;
    let mut pose = scn.initial_pose;
    let mut out = Vec::new();
    let mut events = Vec::new();
    let mut decision = None;
    for rec in &records[1..] {
        match rec.kind {
            RecordKind::Report | RecordKind::Ack => events.push(serde_json::from_value(rec.payload.clone())?),
            RecordKind::Decision => decision = Some(serde_json::from_value(rec.payload.clone())?),
            RecordKind::Pose => {
                let p: PoseRecord = serde_json::from_value(rec.payload.clone())?;
                let decision = decision.take().unwrap_or_else(|| FusedDecision::none(rec.t));
                out.push(TickView { t: rec.t, camera_pose: pose, events: std::mem::take(&mut events), decision });
                pose = p.pose;
            }
            RecordKind::Command => {}
        }
    }
    Ok((scn, out))
}

fn in_platform_view(scn: &Scenario, t: Timestamp, pose: PlatformPose, class: TargetClass) -> Result<bool, RuntimeError> {
    for cam in [&scn.sensors.ircam, &scn.sensors.vcam] {
        if visible_targets(scn, t.as_secs_f64(), pose, &cam.camera)?.iter().any(|v| v.class == class) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Per-tick drone outputs of the thermal camera, the visible camera and the
/// fused decision. A tick is an opportunity when a drone is inside either
/// platform camera's view; a camera counts as detecting when any of its
/// frames in the tick carried a drone label.
pub fn persistence_timeline(records: &[LogRecord]) -> Result<Timeline, RuntimeError> {
    let (scn, ticks) = ticks_from_log(records)?;
    let mut tl = Timeline::new(ticks.len());
    for (i, tick) in ticks.iter().enumerate() {
        tl.opportunity[i] = in_platform_view(&scn, tick.t, tick.camera_pose, TargetClass::Drone)?;
        for (id, name) in [(WorkerId::Ircam, "ircam"), (WorkerId::Vcam, "vcam")] {
            let hit = tick.events.iter().any(|e| match e {
                WorkerEvent::Detections { worker, reports, .. } => {
                    *worker == id && reports.iter().any(|r| r.label == TargetClass::Drone)
                }
                _ => false,
            });
            tl.source_mut(name)[i] = hit;
        }
        tl.source_mut("fused")[i] = tick.decision.label == Some(TargetClass::Drone);
    }
    Ok(tl)
}

/// Fused decisions not backed by a target of the decided class inside a
/// platform camera's view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FalseDecisions {
    /// Ticks carrying a false decision.
    pub ticks: usize,
    /// Separate runs of such ticks.
    pub episodes: usize,
}

pub fn false_decisions(records: &[LogRecord]) -> Result<FalseDecisions, RuntimeError> {
    let (scn, ticks) = ticks_from_log(records)?;
    let mut out = FalseDecisions::default();
    let mut prev = false;
    for tick in &ticks {
        let bad = match tick.decision.label {
            Some(c) => !in_platform_view(&scn, tick.t, tick.camera_pose, c)?,
            None => false,
        };
        if bad {
            out.ticks += 1;
            if !prev {
                out.episodes += 1;
            }
        }
        prev = bad;
    }
    Ok(out)
}
