use std::collections::BTreeMap;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use skyfence_airdata::{AircraftUpdate, NmeaFix, TrackStore};
use skyfence_core::{AngularOffset, CameraModel, DetectionReport, SensorId, TargetClass, Timestamp};
use skyfence_fgtracker::Cue;
use skyfence_fusion::{FusedDecision, FusionConfig, FusionState};
use skyfence_platform::{Platform, PlatformInputs, PlatformPose, SourceTimes};
use skyfence_simkit::{direction, wrap_deg, Scenario};

use crate::{
    Command, EngineConfig, EngineSnapshot, Pulses, RunState, RuntimeError, SensorState, SensorStatus, TelemetryFrame,
    WorkerAction, WorkerCommand, WorkerEvent, WorkerId, WorkerInput,
};

/// Who sent a command. Replies go back to the same client.
pub type ClientId = u64;

/// Commands read from a script rather than a socket.
pub const SCRIPT_CLIENT: ClientId = 0;

/// Ticks a worker command may wait for its acknowledgement.
pub const ACK_TIMEOUT_TICKS: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Report,
    Decision,
    Pose,
    Command,
    Ack,
}

/// Result of one main-loop tick.
#[derive(Debug, Clone)]
pub struct TickOutput {
    pub snapshot: EngineSnapshot,
    pub to_workers: Vec<WorkerInput>,
    pub replies: Vec<(ClientId, TelemetryFrame)>,
    /// Log records for this tick, in order.
    pub records: Vec<(RecordKind, Value)>,
}

#[derive(Debug, Clone, Default)]
struct Health {
    enabled: bool,
    idle: bool,
    fps: f64,
    last_seen: Option<Timestamp>,
    /// Last dropped message or worker error.
    last_trouble: Option<Timestamp>,
    dropped: u64,
}

#[derive(Debug, Clone)]
struct PendingAck {
    client: ClientId,
    command: Command,
    worker: WorkerId,
    issued: u64,
}

/// Pose and decision payload of a `pose` record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub pose: PlatformPose,
    pub source: skyfence_platform::ControlSource,
    pub pulses: Pulses,
}

/// The main loop's state: fusion, platform control, air picture and sensor
/// health. It is driven entirely by its inputs, so the same inputs always
/// give the same outputs.
pub struct Engine {
    cfg: EngineConfig,
    fusion_cfg: FusionConfig,
    fusion: FusionState,
    platform: Platform,
    tracks: TrackStore,
    gps: Option<NmeaFix>,
    cue: Option<Cue>,
    health: BTreeMap<WorkerId, Health>,
    times: SourceTimes,
    manual_target: Option<PlatformPose>,
    pending: Vec<PendingAck>,
    ircam: CameraModel,
    dt_s: f64,
    tick: u64,
    last_label: Option<TargetClass>,
}

impl Engine {
    pub fn new(scn: &Scenario, cfg: EngineConfig) -> Result<Self, RuntimeError> {
        cfg.validate()?;
        let s = &scn.sensors;
        let enabled = [
            (WorkerId::Ircam, s.ircam.enabled),
            (WorkerId::Vcam, s.vcam.enabled),
            (WorkerId::Fcam, s.fcam.enabled),
            (WorkerId::Audio, s.audio.enabled),
            (WorkerId::Adsb, s.adsb.enabled),
            (WorkerId::Gps, s.gps.enabled),
        ];
        let health = enabled.into_iter().map(|(id, on)| (id, Health { enabled: on, ..Default::default() })).collect();
        Ok(Engine {
            fusion_cfg: cfg.fusion,
            fusion: FusionState::new(cfg.fusion.window_ms),
            platform: Platform::new(scn.initial_pose, cfg.controller)?,
            tracks: TrackStore::new(),
            gps: None,
            cue: None,
            health,
            times: SourceTimes::default(),
            manual_target: None,
            pending: Vec::new(),
            ircam: s.ircam.camera,
            dt_s: 1.0 / s.main_hz,
            tick: 0,
            last_label: None,
            cfg,
        })
    }

    pub fn pose(&self) -> PlatformPose {
        self.platform.pose()
    }

    pub fn fusion_config(&self) -> &FusionConfig {
        &self.fusion_cfg
    }

    /// One main-loop tick at `now`: apply operator commands, absorb worker
    /// events, fuse, steer, and report.
    pub fn tick(&mut self, now: Timestamp, commands: Vec<(ClientId, Command)>, events: Vec<WorkerEvent>) -> TickOutput {
        self.tick += 1;
        let mut out = TickOutput {
            snapshot: self.snapshot(now),
            to_workers: Vec::new(),
            replies: Vec::new(),
            records: Vec::new(),
        };

        for (client, cmd) in commands {
            out.records.push((RecordKind::Command, json!({"entry": "apply", "client": client, "command": cmd})));
            self.apply(now, client, cmd, &mut out);
        }

        let mut steer = PlatformInputs::default();
        for ev in events {
            let kind = if matches!(ev, WorkerEvent::Ack(_)) { RecordKind::Ack } else { RecordKind::Report };
            out.records.push((kind, serde_json::to_value(&ev).expect("events serialise")));
            self.absorb(now, ev, &mut steer, &mut out);
        }
        self.expire_acks(&mut out);

        let decision = self.fusion.decide(&self.fusion_cfg, now);
        self.last_label = decision.label;
        out.records.push((RecordKind::Decision, serde_json::to_value(&decision).expect("decision serialises")));

        steer.times = self.times;
        steer.manual_target = self.manual_target;
        self.platform.tick(now, self.dt_s, &steer);
        let pose = self.platform.pose();
        if self.health[&WorkerId::Ircam].enabled || self.health[&WorkerId::Vcam].enabled {
            out.to_workers.push(WorkerInput::Pose(pose));
        }
        let snap = self.snapshot_with(now, decision);
        let rec = PoseRecord { pose: snap.pose, source: snap.source, pulses: snap.pulses };
        out.records.push((RecordKind::Pose, serde_json::to_value(rec).expect("pose serialises")));
        out.snapshot = snap;
        out
    }

    fn apply(&mut self, now: Timestamp, client: ClientId, cmd: Command, out: &mut TickOutput) {
        let result: Result<(), String> = match &cmd {
            Command::SetFusion { weights, min_sensors, threshold, window_ms } => {
                let mut next = self.fusion_cfg;
                if let Some(w) = weights {
                    next.weights = *w;
                }
                if let Some(n) = min_sensors {
                    next.min_sensors = *n;
                    // the default gate follows min_sensors unless one is given
                    if threshold.is_none() && self.fusion_cfg.threshold.is_none() {
                        next.threshold = None;
                    }
                }
                if let Some(th) = threshold {
                    next.threshold = Some(*th);
                }
                if let Some(ms) = window_ms {
                    next.window_ms = *ms;
                }
                next.validate().map_err(|e| e.to_string()).map(|()| {
                    self.fusion_cfg = next;
                    self.fusion.set_window(next.window_ms);
                })
            }
            Command::Slew { pan, tilt } => {
                if pan.is_finite() && tilt.is_finite() {
                    let target = self.platform.params().limits.clamp(PlatformPose { pan_deg: *pan, tilt_deg: *tilt });
                    self.manual_target = Some(target);
                    self.times.manual = Some(now);
                    Ok(())
                } else {
                    Err("slew angles must be finite".into())
                }
            }
            Command::SetPattern { pattern } => {
                self.platform.set_pattern(*pattern);
                Ok(())
            }
            Command::Worker { id, action } => {
                let h = self.health.get_mut(id).expect("every worker has health");
                if !h.enabled {
                    Err(format!("worker {id} is not running in this scenario"))
                } else {
                    let wa = match action {
                        RunState::Run => WorkerAction::Run,
                        RunState::Idle => WorkerAction::Idle,
                    };
                    out.to_workers.push(WorkerInput::Command(WorkerCommand { worker: *id, action: wa }));
                    self.pending.push(PendingAck { client, command: cmd.clone(), worker: *id, issued: self.tick });
                    return;
                }
            }
        };
        match result {
            Ok(()) => out.replies.push((client, TelemetryFrame::Ack { t: now, command: cmd, worker_fps: None })),
            Err(message) => out.replies.push((client, TelemetryFrame::Error { message })),
        }
    }

    fn absorb(&mut self, now: Timestamp, ev: WorkerEvent, steer: &mut PlatformInputs, out: &mut TickOutput) {
        let id = ev.worker();
        let seen = ev.time();
        let h = self.health.get_mut(&id).expect("every worker has health");
        if let Some(t) = seen {
            h.last_seen = Some(h.last_seen.map_or(t, |p| p.max(t)));
        }
        match ev {
            WorkerEvent::Detections { t, fps, reports, .. } => {
                h.fps = fps;
                for r in &reports {
                    if let Err(e) = self.fusion.ingest(r.clone()) {
                        warn!("{id}: dropped report: {e}");
                    }
                }
                let sensor = id.sensor();
                if matches!(sensor, Some(SensorId::Ircam | SensorId::Vcam)) {
                    if let Some(off) = self.steering_offset(&reports) {
                        if id == WorkerId::Ircam {
                            self.times.ircam = Some(t);
                            steer.ircam = Some(off);
                        } else {
                            self.times.vcam = Some(t);
                            steer.vcam = Some(off);
                        }
                    }
                }
            }
            WorkerEvent::Cue { t, fps, cue } => {
                h.fps = fps;
                self.cue = cue;
                if let Some(c) = cue {
                    self.times.fcam = Some(t);
                    steer.fcam = Some(c.offset);
                }
            }
            WorkerEvent::Aircraft { t, update } => {
                self.tracks.update(&update, t);
                if let Some(r) = self.adsb_report(&update) {
                    if let Err(e) = self.fusion.ingest(r) {
                        warn!("adsb: dropped report: {e}");
                    }
                }
            }
            WorkerEvent::Fix { fix, .. } => {
                if fix.position().is_some() {
                    self.gps = Some(fix);
                }
            }
            WorkerEvent::Heartbeat { fps, .. } => h.fps = fps,
            WorkerEvent::Ack(ack) => {
                match ack.action {
                    WorkerAction::Idle => h.idle = true,
                    WorkerAction::Run => h.idle = false,
                    WorkerAction::Configure(_) => {}
                }
                h.fps = ack.worker_fps;
                if let Some(i) = self.pending.iter().position(|p| p.worker == ack.worker) {
                    let p = self.pending.remove(i);
                    let frame = match ack.error {
                        None => TelemetryFrame::Ack { t: now, command: p.command, worker_fps: Some(ack.worker_fps) },
                        Some(message) => TelemetryFrame::Error { message },
                    };
                    out.replies.push((p.client, frame));
                }
            }
            WorkerEvent::Error { message, t, .. } => {
                warn!("{id}: {message}");
                h.last_trouble = Some(t);
            }
            WorkerEvent::Dropped { count, .. } => {
                debug!("{id}: {count} messages dropped");
                h.dropped += count;
                h.last_trouble = Some(now);
            }
        }
    }

    fn expire_acks(&mut self, out: &mut TickOutput) {
        let tick = self.tick;
        let (late, keep): (Vec<_>, Vec<_>) =
            std::mem::take(&mut self.pending).into_iter().partition(|p| tick - p.issued >= ACK_TIMEOUT_TICKS);
        self.pending = keep;
        for p in late {
            let message = format!("worker {} did not acknowledge", p.worker);
            out.replies.push((p.client, TelemetryFrame::Error { message }));
        }
    }

    /// The report to steer on: the fused class if any report carries it,
    /// otherwise the most confident report.
    fn steering_offset(&self, reports: &[DetectionReport]) -> Option<AngularOffset> {
        let with_offset = || reports.iter().filter(|r| r.offset.is_some());
        let preferred: Vec<&DetectionReport> = match self.last_label {
            Some(l) => with_offset().filter(|r| r.label == l).collect(),
            None => Vec::new(),
        };
        let pool: Vec<&DetectionReport> = if preferred.is_empty() { with_offset().collect() } else { preferred };
        pool.into_iter().max_by(|a, b| a.confidence.total_cmp(&b.confidence)).and_then(|r| r.offset)
    }

    /// A transponder inside the thermal camera's field of view counts as an
    /// ADS-B detection of its emitter category.
    fn adsb_report(&self, u: &AircraftUpdate) -> Option<DetectionReport> {
        let here = self.gps.as_ref()?.position()?;
        let mut pos = u.position?;
        if let Some(ft) = u.altitude_ft {
            pos.alt_m = ft * 0.3048;
        }
        let (az, el, _) = direction(pos.enu_from(&here));
        let pose = self.platform.pose();
        let off = AngularOffset::new(wrap_deg(az - pose.pan_deg), el - pose.tilt_deg);
        if !self.ircam.contains_offset(off) {
            return None;
        }
        let label = u.category_class.or_else(|| self.tracks.get(u.icao).map(|a| a.category_class));
        let label = label.filter(|c| c.is_fusable()).unwrap_or(TargetClass::NoData);
        Some(DetectionReport::new(SensorId::Adsb, u.t, label, 1.0).with_offset(off))
    }

    fn status(&self, now: Timestamp) -> BTreeMap<WorkerId, SensorStatus> {
        let th = &self.cfg.status;
        self.health
            .iter()
            .map(|(&id, h)| {
                let silence = now.since(h.last_seen.unwrap_or(Timestamp::ZERO));
                let troubled = h.last_trouble.is_some_and(|t| now.since(t) <= th.drop_warn_ms);
                let state = if !h.enabled || h.idle {
                    SensorState::Idle
                } else if silence > th.fail_ms {
                    SensorState::Fail
                } else if silence > th.warn_ms || troubled {
                    SensorState::Warn
                } else {
                    SensorState::Ok
                };
                (id, SensorStatus { state, fps: h.fps, last_seen: h.last_seen, dropped: h.dropped })
            })
            .collect()
    }

    fn snapshot(&self, now: Timestamp) -> EngineSnapshot {
        self.snapshot_with(now, FusedDecision::none(now))
    }

    fn snapshot_with(&self, now: Timestamp, decision: FusedDecision) -> EngineSnapshot {
        let (pan_us, tilt_us) = self.platform.pulses();
        let mut history = BTreeMap::new();
        for (icao, h) in self.tracks.history_all() {
            history.insert(format!("{icao:06x}"), h.iter().copied().collect());
        }
        let mut tracks = self.tracks.clone();
        tracks.evict(now);
        EngineSnapshot {
            tick: self.tick,
            t: now,
            pose: self.platform.pose(),
            source: self.platform.source(),
            pulses: Pulses { pan_us, tilt_us },
            pattern: self.platform.params().pattern,
            sensors: self.status(now),
            reports: self.fusion.latest_in_window(now, self.fusion_cfg.window_ms).into_values().cloned().collect(),
            decision,
            cue: self.cue,
            aircraft: tracks.current().cloned().collect(),
            history,
            gps: self.gps.clone(),
            fusion: self.fusion_cfg,
        }
    }
}

#[cfg(test)]
mod tests {
    use skyfence_core::GeoPosition;
    use skyfence_platform::{ControlSource, SearchPattern};

    use super::*;

    fn scn() -> Scenario {
        Scenario::new("t", 10.0, 1)
    }

    fn report(sensor: SensorId, t: u64, label: TargetClass, conf: f64) -> DetectionReport {
        DetectionReport::new(sensor, Timestamp(t), label, conf)
    }

    fn det(worker: WorkerId, t: u64, reports: Vec<DetectionReport>) -> WorkerEvent {
        WorkerEvent::Detections { worker, t: Timestamp(t), fps: 10.0, reports }
    }

    #[test]
    fn two_sensors_fuse() {
        let mut e = Engine::new(&scn(), EngineConfig::default()).unwrap();
        let ev = vec![
            det(WorkerId::Ircam, 90, vec![report(SensorId::Ircam, 90, TargetClass::Drone, 0.9)]),
            det(WorkerId::Vcam, 95, vec![report(SensorId::Vcam, 95, TargetClass::Drone, 0.8)]),
        ];
        let out = e.tick(Timestamp(100), vec![], ev);
        assert_eq!(out.snapshot.decision.label, Some(TargetClass::Drone));
        assert_eq!(out.snapshot.reports.len(), 2);
        let kinds: Vec<RecordKind> = out.records.iter().map(|r| r.0).collect();
        assert_eq!(kinds, vec![RecordKind::Report, RecordKind::Report, RecordKind::Decision, RecordKind::Pose]);
    }

    #[test]
    fn ir_offset_steers_only_when_fresh() {
        let mut e = Engine::new(&scn(), EngineConfig::default()).unwrap();
        let start = e.pose();
        let r = report(SensorId::Ircam, 90, TargetClass::Drone, 0.9).with_offset(AngularOffset::new(2.0, 0.0));
        let out = e.tick(Timestamp(100), vec![], vec![det(WorkerId::Ircam, 90, vec![r])]);
        assert_eq!(out.snapshot.source, ControlSource::Ircam);
        assert!((out.snapshot.pose.pan_deg - start.pan_deg - 1.0).abs() < 1e-12);
        // no new report: the camera keeps control but the pose holds
        let out = e.tick(Timestamp(200), vec![], vec![]);
        assert_eq!(out.snapshot.source, ControlSource::Ircam);
        assert!((out.snapshot.pose.pan_deg - start.pan_deg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn commands_are_acknowledged_or_rejected() {
        let mut e = Engine::new(&scn(), EngineConfig::default()).unwrap();
        let cmds = vec![
            (1, Command::SetFusion { weights: None, min_sensors: Some(1), threshold: None, window_ms: None }),
            (2, Command::SetFusion { weights: None, min_sensors: Some(9), threshold: None, window_ms: None }),
            (3, Command::SetPattern { pattern: SearchPattern::Off }),
            (4, Command::Slew { pan: 500.0, tilt: 10.0 }),
        ];
        let out = e.tick(Timestamp(100), cmds, vec![]);
        assert_eq!(out.replies.len(), 4);
        assert!(matches!(out.replies[0], (1, TelemetryFrame::Ack { .. })));
        assert!(matches!(out.replies[1], (2, TelemetryFrame::Error { .. })));
        assert_eq!(out.snapshot.fusion.min_sensors, 1);
        assert_eq!(out.snapshot.fusion.effective_threshold(), 0.5);
        assert_eq!(out.snapshot.pattern, SearchPattern::Off);
        assert_eq!(out.snapshot.source, ControlSource::Manual);
        assert!(out.snapshot.pose.pan_deg > 0.0);
    }

    #[test]
    fn worker_commands_wait_for_the_worker() {
        let mut e = Engine::new(&scn(), EngineConfig::default()).unwrap();
        let out = e.tick(Timestamp(100), vec![(7, Command::Worker { id: WorkerId::Audio, action: RunState::Idle })], vec![]);
        assert!(out.replies.is_empty());
        assert!(out.to_workers.iter().any(|w| matches!(w, WorkerInput::Command(c) if c.worker == WorkerId::Audio)));
        let ack = WorkerEvent::Ack(crate::WorkerAck {
            worker: WorkerId::Audio,
            t: Timestamp(150),
            action: WorkerAction::Idle,
            worker_fps: 20.0,
            error: None,
        });
        let out = e.tick(Timestamp(200), vec![], vec![ack]);
        assert!(matches!(out.replies[..], [(7, TelemetryFrame::Ack { worker_fps: Some(_), .. })]));
        assert_eq!(out.snapshot.sensors[&WorkerId::Audio].state, SensorState::Idle);

        // a worker that never answers
        e.tick(Timestamp(300), vec![(8, Command::Worker { id: WorkerId::Gps, action: RunState::Idle })], vec![]);
        let mut late = Vec::new();
        for k in 4..8 {
            late.extend(e.tick(Timestamp(k * 100), vec![], vec![]).replies);
        }
        assert!(matches!(late[..], [(8, TelemetryFrame::Error { .. })]));
    }

    #[test]
    fn health_goes_amber_then_red() {
        let mut e = Engine::new(&scn(), EngineConfig::default()).unwrap();
        let hb = |t| WorkerEvent::Heartbeat { worker: WorkerId::Gps, t: Timestamp(t), fps: 1.0 };
        let s = e.tick(Timestamp(100), vec![], vec![hb(100)]).snapshot;
        assert_eq!(s.sensors[&WorkerId::Gps].state, SensorState::Ok);
        assert_eq!(e.tick(Timestamp(1200), vec![], vec![]).snapshot.sensors[&WorkerId::Gps].state, SensorState::Warn);
        assert_eq!(e.tick(Timestamp(3200), vec![], vec![]).snapshot.sensors[&WorkerId::Gps].state, SensorState::Fail);
        let s = e.tick(Timestamp(3300), vec![], vec![hb(3300), WorkerEvent::Dropped { worker: WorkerId::Gps, count: 3 }]).snapshot;
        assert_eq!(s.sensors[&WorkerId::Gps].state, SensorState::Warn);
        assert_eq!(s.sensors[&WorkerId::Gps].dropped, 3);
    }

    #[test]
    fn transponder_in_view_becomes_a_report() {
        let s = scn();
        let mut e = Engine::new(&s, EngineConfig::default()).unwrap();
        let fix = skyfence_airdata::nmea_parse(&skyfence_simkit::gga_sentence(Timestamp(0), &s.site)).unwrap().unwrap();
        let pose = e.pose();
        let v = skyfence_simkit::unit_vector(pose.pan_deg, pose.tilt_deg);
        let ahead = GeoPosition::from_enu(&s.site, [v[0] * 2000.0, v[1] * 2000.0, v[2] * 2000.0]);
        let behind = GeoPosition::from_enu(&s.site, [-v[0] * 2000.0, -v[1] * 2000.0, v[2] * 2000.0]);
        let upd = |icao, pos: GeoPosition| AircraftUpdate {
            position: Some(pos),
            altitude_ft: Some(pos.alt_m / 0.3048),
            category_class: Some(TargetClass::Helicopter),
            ..AircraftUpdate::new(icao, Timestamp(50))
        };
        let out = e.tick(
            Timestamp(100),
            vec![],
            vec![
                WorkerEvent::Fix { t: Timestamp(0), fix },
                WorkerEvent::Aircraft { t: Timestamp(50), update: upd(1, ahead) },
                WorkerEvent::Aircraft { t: Timestamp(50), update: upd(2, behind) },
            ],
        );
        let adsb: Vec<_> = out.snapshot.reports.iter().filter(|r| r.sensor == SensorId::Adsb).collect();
        assert_eq!(adsb.len(), 1);
        assert_eq!(adsb[0].label, TargetClass::Helicopter);
        assert_eq!(out.snapshot.aircraft.len(), 2);
    }
}
