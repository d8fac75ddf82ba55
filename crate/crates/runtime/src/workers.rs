use std::collections::VecDeque;
use std::sync::Arc;

use skyfence_acoustics::{featurize, AudioChannel, CentroidModel, MfccConfig, MfccExtractor};
use skyfence_airdata::{nmea_parse, AdsbDecoder, ModeSFrame};
use skyfence_core::{SensorId, TargetClass, Timestamp};
use skyfence_fgtracker::FcamChannel;
use skyfence_platform::PlatformPose;
use skyfence_simkit::{adsb_frames, gps_sentences, sensor_rng, synth_audio, AudioSim, CameraSim, FisheyeSim, Scenario};

use crate::{EngineConfig, RuntimeError, WorkerAck, WorkerAction, WorkerEvent, WorkerId, WorkerInput};

/// Minimum spacing of heartbeats from a worker with nothing else to say.
pub const HEARTBEAT_MS: u64 = 500;

/// A sensor worker. Each call to [`Worker::step`] consumes one unit of
/// input (a frame, an audio tick, a received message) stamped
/// [`Worker::next_due`].
pub trait Worker: Send {
    fn id(&self) -> WorkerId;
    /// Time of the next input, or `None` once the input has run out.
    fn next_due(&self) -> Option<Timestamp>;
    fn step(&mut self) -> Result<Vec<WorkerEvent>, RuntimeError>;
    /// Handles a message from the main loop, possibly answering it.
    fn handle(&mut self, input: WorkerInput) -> Option<WorkerEvent>;
}

/// Input rate over the last second of input time.
#[derive(Debug, Clone, Default)]
pub struct FpsMeter {
    times: VecDeque<Timestamp>,
}

impl FpsMeter {
    pub fn tick(&mut self, t: Timestamp) -> f64 {
        self.times.push_back(t);
        while self.times.front().is_some_and(|&f| t.since(f) >= 1000) {
            self.times.pop_front();
        }
        self.fps()
    }

    pub fn fps(&self) -> f64 {
        self.times.len() as f64
    }
}

/// Run/idle state and heartbeat pacing shared by every worker.
#[derive(Debug, Clone, Default)]
struct Control {
    idle: bool,
    last_beat: Option<Timestamp>,
    meter: FpsMeter,
}

impl Control {
    fn beat(&mut self, id: WorkerId, t: Timestamp) -> Vec<WorkerEvent> {
        if self.last_beat.is_some_and(|b| t.since(b) < HEARTBEAT_MS) {
            return Vec::new();
        }
        self.last_beat = Some(t);
        vec![WorkerEvent::Heartbeat { worker: id, t, fps: self.meter.fps() }]
    }

    fn sent(&mut self, t: Timestamp) {
        self.last_beat = Some(t);
    }

    fn handle(&mut self, id: WorkerId, input: WorkerInput, t: Timestamp) -> Option<WorkerEvent> {
        let WorkerInput::Command(cmd) = input else { return None };
        let error = match &cmd.action {
            WorkerAction::Run => {
                self.idle = false;
                None
            }
            WorkerAction::Idle => {
                self.idle = true;
                None
            }
            WorkerAction::Configure(_) => Some(format!("{id} has no runtime settings")),
        };
        Some(WorkerEvent::Ack(WorkerAck { worker: id, t, action: cmd.action, worker_fps: self.meter.fps(), error }))
    }
}

/// Thermal or visible camera with its detector.
pub struct CameraWorker {
    id: WorkerId,
    scn: Arc<Scenario>,
    sim: CameraSim,
    pose: PlatformPose,
    last_t: Timestamp,
    ctl: Control,
}

impl CameraWorker {
    pub fn new(scn: Arc<Scenario>, sensor: SensorId) -> Result<Self, RuntimeError> {
        let id = match sensor {
            SensorId::Ircam => WorkerId::Ircam,
            SensorId::Vcam => WorkerId::Vcam,
            other => return Err(RuntimeError::Config(format!("{other} is not a platform camera"))),
        };
        let sim = CameraSim::new(&scn, sensor)?;
        let pose = scn.initial_pose;
        Ok(CameraWorker { id, scn, sim, pose, last_t: Timestamp::ZERO, ctl: Control::default() })
    }
}

impl Worker for CameraWorker {
    fn id(&self) -> WorkerId {
        self.id
    }

    fn next_due(&self) -> Option<Timestamp> {
        self.sim.next_due(&self.scn)
    }

    fn step(&mut self) -> Result<Vec<WorkerEvent>, RuntimeError> {
        let Some(frame) = self.sim.next_frame(&self.scn, self.pose)? else { return Ok(Vec::new()) };
        self.last_t = frame.t;
        if frame.dropped {
            return Ok(Vec::new());
        }
        let fps = self.ctl.meter.tick(frame.t);
        if self.ctl.idle {
            return Ok(self.ctl.beat(self.id, frame.t));
        }
        self.ctl.sent(frame.t);
        let reports = frame.detections.into_iter().map(|d| d.report.with_fps(fps)).collect();
        Ok(vec![WorkerEvent::Detections { worker: self.id, t: frame.t, fps, reports }])
    }

    fn handle(&mut self, input: WorkerInput) -> Option<WorkerEvent> {
        if let WorkerInput::Pose(p) = input {
            self.pose = p;
            return None;
        }
        self.ctl.handle(self.id, input, self.last_t)
    }
}

/// Fish-eye camera plus the motion tracker.
pub struct FisheyeWorker {
    scn: Arc<Scenario>,
    sim: FisheyeSim,
    channel: FcamChannel,
    last_t: Timestamp,
    ctl: Control,
}

impl FisheyeWorker {
    pub fn new(scn: Arc<Scenario>, cfg: &EngineConfig) -> Result<Self, RuntimeError> {
        let sim = FisheyeSim::new(&scn);
        let channel = FcamChannel::new(*sim.camera(), cfg.gmm, cfg.tracker)?.with_min_area(cfg.fcam_min_area);
        Ok(FisheyeWorker { scn, sim, channel, last_t: Timestamp::ZERO, ctl: Control::default() })
    }
}

impl Worker for FisheyeWorker {
    fn id(&self) -> WorkerId {
        WorkerId::Fcam
    }

    fn next_due(&self) -> Option<Timestamp> {
        self.sim.next_due(&self.scn)
    }

    fn step(&mut self) -> Result<Vec<WorkerEvent>, RuntimeError> {
        let Some((t, frame)) = self.sim.next_frame(&self.scn)? else { return Ok(Vec::new()) };
        self.last_t = t;
        let Some(frame) = frame else { return Ok(Vec::new()) };
        let fps = self.ctl.meter.tick(t);
        if self.ctl.idle {
            return Ok(self.ctl.beat(WorkerId::Fcam, t));
        }
        self.ctl.sent(t);
        let cue = self.channel.process(&frame)?;
        Ok(vec![WorkerEvent::Cue { t, fps, cue }])
    }

    fn handle(&mut self, input: WorkerInput) -> Option<WorkerEvent> {
        self.ctl.handle(WorkerId::Fcam, input, self.last_t)
    }
}

/// Fits the audio classifier on synthetic one-second clips of each class.
pub fn train_audio_model(seed: u64, clips_per_class: usize, mfcc: MfccConfig) -> Result<CentroidModel, RuntimeError> {
    let ex = MfccExtractor::new(mfcc)?;
    // a stream of its own, so training never shares draws with the scenario
    let mut rng = sensor_rng(seed ^ 0x7261_696e, SensorId::Audio);
    let mut feats = Vec::new();
    for class in [TargetClass::Drone, TargetClass::Helicopter, TargetClass::Background] {
        for _ in 0..clips_per_class {
            let x = synth_audio(class, 1.0, &mut rng)?;
            feats.push((class, featurize(&ex.compute(&x))?));
        }
    }
    Ok(CentroidModel::fit(feats.iter().map(|(c, v)| (*c, v.as_slice())))?)
}

/// Microphone stream and classifier.
pub struct AudioWorker {
    scn: Arc<Scenario>,
    sim: AudioSim,
    mfcc: MfccConfig,
    model: CentroidModel,
    channel: Option<AudioChannel<CentroidModel>>,
    last_t: Timestamp,
    ctl: Control,
}

impl AudioWorker {
    pub fn new(scn: Arc<Scenario>, cfg: &EngineConfig) -> Result<Self, RuntimeError> {
        let model = train_audio_model(scn.seed, cfg.audio_training_clips, cfg.mfcc)?;
        Ok(Self::with_model(scn, cfg.mfcc, model))
    }

    pub fn with_model(scn: Arc<Scenario>, mfcc: MfccConfig, model: CentroidModel) -> Self {
        let sim = AudioSim::new(&scn);
        AudioWorker { scn, sim, mfcc, model, channel: None, last_t: Timestamp::ZERO, ctl: Control::default() }
    }
}

impl Worker for AudioWorker {
    fn id(&self) -> WorkerId {
        WorkerId::Audio
    }

    fn next_due(&self) -> Option<Timestamp> {
        self.sim.next_due(&self.scn)
    }

    fn step(&mut self) -> Result<Vec<WorkerEvent>, RuntimeError> {
        let Some(chunk) = self.sim.next_chunk(&self.scn)? else { return Ok(Vec::new()) };
        self.last_t = chunk.t;
        let Some(samples) = chunk.samples else {
            // the ring has a gap in it now; start over after the dropout
            self.channel = None;
            return Ok(Vec::new());
        };
        let fps = self.ctl.meter.tick(chunk.t);
        if self.ctl.idle {
            self.channel = None;
            return Ok(self.ctl.beat(WorkerId::Audio, chunk.t));
        }
        if self.channel.is_none() {
            let ex = MfccExtractor::new(self.mfcc)?;
            self.channel = Some(AudioChannel::new(ex, self.model.clone(), chunk.t));
        }
        let reports = self.channel.as_mut().expect("channel just set").push(&samples)?;
        if reports.is_empty() {
            return Ok(self.ctl.beat(WorkerId::Audio, chunk.t));
        }
        self.ctl.sent(chunk.t);
        let reports = reports.into_iter().map(|r| r.with_fps(fps)).collect();
        Ok(vec![WorkerEvent::Detections { worker: WorkerId::Audio, t: chunk.t, fps, reports }])
    }

    fn handle(&mut self, input: WorkerInput) -> Option<WorkerEvent> {
        self.ctl.handle(WorkerId::Audio, input, self.last_t)
    }
}

/// A stream of timestamped messages plus a 1 Hz heartbeat.
struct Feed<T> {
    items: Vec<(Timestamp, T)>,
    next: usize,
    beat: Timestamp,
    end: Timestamp,
}

impl<T> Feed<T> {
    fn new(items: Vec<(Timestamp, T)>, end: Timestamp) -> Self {
        Feed { items, next: 0, beat: Timestamp::ZERO, end }
    }

    fn next_item(&self) -> Option<Timestamp> {
        self.items.get(self.next).map(|(t, _)| *t)
    }

    fn next_beat(&self) -> Option<Timestamp> {
        (self.beat <= self.end).then_some(self.beat)
    }

    fn next_due(&self) -> Option<Timestamp> {
        match (self.next_item(), self.next_beat()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// The next message, or `Err(t)` when the heartbeat at `t` comes first.
    fn pop(&mut self) -> Option<Result<(Timestamp, &T), Timestamp>> {
        match (self.next_item(), self.next_beat()) {
            (Some(a), b) if b.map_or(true, |b| a <= b) => {
                self.next += 1;
                let (t, item) = &self.items[self.next - 1];
                Some(Ok((*t, item)))
            }
            (_, Some(b)) => {
                self.beat = b + 1000;
                Some(Err(b))
            }
            _ => None,
        }
    }
}

/// ADS-B receiver and decoder.
pub struct AdsbWorker {
    feed: Feed<ModeSFrame>,
    decoder: AdsbDecoder,
    last_t: Timestamp,
    ctl: Control,
}

impl AdsbWorker {
    pub fn new(scn: &Scenario) -> Result<Self, RuntimeError> {
        let end = Timestamp::from_secs_f64(scn.duration_s);
        let frames = adsb_frames(scn, Timestamp::ZERO, end)?;
        Ok(AdsbWorker { feed: Feed::new(frames, end), decoder: AdsbDecoder::new(), last_t: Timestamp::ZERO, ctl: Control::default() })
    }
}

impl Worker for AdsbWorker {
    fn id(&self) -> WorkerId {
        WorkerId::Adsb
    }

    fn next_due(&self) -> Option<Timestamp> {
        self.feed.next_due()
    }

    fn step(&mut self) -> Result<Vec<WorkerEvent>, RuntimeError> {
        let id = WorkerId::Adsb;
        match self.feed.pop() {
            None => Ok(Vec::new()),
            Some(Err(t)) => {
                self.last_t = t;
                Ok(self.ctl.beat(id, t))
            }
            Some(Ok((t, frame))) => {
                self.last_t = t;
                self.ctl.meter.tick(t);
                if self.ctl.idle {
                    return Ok(Vec::new());
                }
                match self.decoder.feed(frame, t) {
                    Ok(Some(update)) => {
                        self.ctl.sent(t);
                        Ok(vec![WorkerEvent::Aircraft { t, update }])
                    }
                    Ok(None) => Ok(Vec::new()),
                    Err(e) => Ok(vec![WorkerEvent::Error { worker: id, t, message: e.to_string() }]),
                }
            }
        }
    }

    fn handle(&mut self, input: WorkerInput) -> Option<WorkerEvent> {
        self.ctl.handle(WorkerId::Adsb, input, self.last_t)
    }
}

/// GPS receiver.
pub struct GpsWorker {
    feed: Feed<String>,
    last_t: Timestamp,
    ctl: Control,
}

impl GpsWorker {
    pub fn new(scn: &Scenario) -> Self {
        let end = Timestamp::from_secs_f64(scn.duration_s);
        GpsWorker { feed: Feed::new(gps_sentences(scn, Timestamp::ZERO, end), end), last_t: Timestamp::ZERO, ctl: Control::default() }
    }
}

impl Worker for GpsWorker {
    fn id(&self) -> WorkerId {
        WorkerId::Gps
    }

    fn next_due(&self) -> Option<Timestamp> {
        self.feed.next_due()
    }

    fn step(&mut self) -> Result<Vec<WorkerEvent>, RuntimeError> {
        let id = WorkerId::Gps;
        match self.feed.pop() {
            None => Ok(Vec::new()),
            Some(Err(t)) => {
                self.last_t = t;
                Ok(self.ctl.beat(id, t))
            }
            Some(Ok((t, line))) => {
                self.last_t = t;
                self.ctl.meter.tick(t);
                if self.ctl.idle {
                    return Ok(Vec::new());
                }
                match nmea_parse(line) {
                    Ok(Some(fix)) => {
                        self.ctl.sent(t);
                        Ok(vec![WorkerEvent::Fix { t, fix }])
                    }
                    Ok(None) => Ok(Vec::new()),
                    Err(e) => Ok(vec![WorkerEvent::Error { worker: id, t, message: e.to_string() }]),
                }
            }
        }
    }

    fn handle(&mut self, input: WorkerInput) -> Option<WorkerEvent> {
        self.ctl.handle(WorkerId::Gps, input, self.last_t)
    }
}

/// One worker per sensor enabled in the scenario, in [`WorkerId`] order.
pub fn spawn_workers(scn: &Arc<Scenario>, cfg: &EngineConfig) -> Result<Vec<Box<dyn Worker>>, RuntimeError> {
    let s = &scn.sensors;
    let mut out: Vec<Box<dyn Worker>> = Vec::new();
    if s.ircam.enabled {
        out.push(Box::new(CameraWorker::new(scn.clone(), SensorId::Ircam)?));
    }
    if s.vcam.enabled {
        out.push(Box::new(CameraWorker::new(scn.clone(), SensorId::Vcam)?));
    }
    if s.fcam.enabled {
        out.push(Box::new(FisheyeWorker::new(scn.clone(), cfg)?));
    }
    if s.audio.enabled {
        out.push(Box::new(AudioWorker::new(scn.clone(), cfg)?));
    }
    if s.adsb.enabled {
        out.push(Box::new(AdsbWorker::new(scn)?));
    }
    if s.gps.enabled {
        out.push(Box::new(GpsWorker::new(scn)));
    }
    Ok(out)
}
