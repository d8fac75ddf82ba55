use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use skyfence_core::Timestamp;
use skyfence_simkit::Scenario;

use crate::{
    spawn_workers, BoundedQueue, ClientId, Command, Engine, EngineConfig, LogWriter, RuntimeError, TickOutput, Worker,
    WorkerEvent, WorkerId, WorkerInput, SCRIPT_CLIENT,
};

/// One line of a command script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    /// Applied at the first tick at or after this time.
    pub t_ms: u64,
    pub command: Command,
}

/// Reads a JSONL command script. Blank lines and lines starting with `#`
/// are skipped.
pub fn read_script(input: impl BufRead) -> Result<Vec<ScriptEntry>, RuntimeError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let e: ScriptEntry =
            serde_json::from_str(l).map_err(|e| RuntimeError::LogFormat { line: i + 1, msg: e.to_string() })?;
        out.push(e);
    }
    out.sort_by_key(|e| e.t_ms);
    Ok(out)
}

/// Tick `k` (from 1) of a loop running at `hz`.
pub fn tick_time(k: u64, hz: f64) -> Timestamp {
    Timestamp((k as f64 * 1000.0 / hz).round() as u64)
}

/// Number of ticks a scenario runs for.
pub fn tick_count(scn: &Scenario) -> u64 {
    (scn.duration_s * scn.sensors.main_hz + 1e-9).floor() as u64
}

/// The whole system under a virtual clock. Before tick `k` every worker
/// consumes the input due by `t_k`, in time order with ties broken by
/// worker; then the queues are drained in worker order and the engine
/// ticks. Nothing depends on wall time, so runs are reproducible.
pub struct VirtualRun {
    scn: Arc<Scenario>,
    engine: Engine,
    workers: Vec<Box<dyn Worker>>,
    queues: BTreeMap<WorkerId, BoundedQueue<WorkerEvent>>,
    reported_drops: BTreeMap<WorkerId, u64>,
    inbox: Vec<WorkerInput>,
    k: u64,
    ticks: u64,
}

impl VirtualRun {
    pub fn new(scn: Scenario, cfg: EngineConfig) -> Result<Self, RuntimeError> {
        scn.validate()?;
        let scn = Arc::new(scn);
        let workers = spawn_workers(&scn, &cfg)?;
        Self::with_workers(scn, cfg, workers)
    }

    /// Runs with a caller-supplied set of workers.
    pub fn with_workers(scn: Arc<Scenario>, cfg: EngineConfig, workers: Vec<Box<dyn Worker>>) -> Result<Self, RuntimeError> {
        let cap = cfg.queue_capacity;
        let queues = workers.iter().map(|w| (w.id(), BoundedQueue::new(cap))).collect();
        let engine = Engine::new(&scn, cfg)?;
        let ticks = tick_count(&scn);
        Ok(VirtualRun { scn, engine, workers, queues, reported_drops: BTreeMap::new(), inbox: Vec::new(), k: 0, ticks })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scn
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn is_done(&self) -> bool {
        self.k >= self.ticks
    }

    /// Time of the next tick.
    pub fn next_time(&self) -> Timestamp {
        tick_time(self.k + 1, self.scn.sensors.main_hz)
    }

    /// Advances one tick. `None` once the scenario is over.
    pub fn step(&mut self, commands: Vec<(ClientId, Command)>) -> Result<Option<TickOutput>, RuntimeError> {
        if self.is_done() {
            return Ok(None);
        }
        self.k += 1;
        let now = tick_time(self.k, self.scn.sensors.main_hz);

        for input in std::mem::take(&mut self.inbox) {
            let target = match &input {
                WorkerInput::Command(c) => Some(c.worker),
                WorkerInput::Pose(_) => None,
            };
            for w in self.workers.iter_mut().filter(|w| target.map_or(true, |id| id == w.id())) {
                if let Some(ev) = w.handle(input.clone()) {
                    self.queues[&w.id()].push(ev);
                }
            }
        }

        loop {
            let next = self
                .workers
                .iter()
                .enumerate()
                .filter_map(|(i, w)| w.next_due().filter(|&d| d <= now).map(|d| (d, i)))
                .min();
            let Some((_, i)) = next else { break };
            let w = &mut self.workers[i];
            let events = w.step()?;
            let q = &self.queues[&w.id()];
            events.into_iter().for_each(|e| q.push(e));
        }

        let mut events = Vec::new();
        for (&id, q) in &self.queues {
            events.extend(q.drain());
            let total = q.dropped();
            let seen = self.reported_drops.entry(id).or_insert(0);
            if total > *seen {
                events.push(WorkerEvent::Dropped { worker: id, count: total - *seen });
                *seen = total;
            }
        }

        let out = self.engine.tick(now, commands, events);
        self.inbox = out.to_workers.clone();
        Ok(Some(out))
    }
}

/// Runs a scenario to the end under the virtual clock, applying the
/// script, logging every tick if asked, and handing each tick's output to
/// `on_tick`.
pub fn run_virtual<W: Write>(
    scn: Scenario,
    cfg: EngineConfig,
    script: &[ScriptEntry],
    mut log: Option<&mut LogWriter<W>>,
    mut on_tick: impl FnMut(&TickOutput),
) -> Result<(), RuntimeError> {
    let mut run = VirtualRun::new(scn, cfg)?;
    let mut pending = script.iter().peekable();
    while !run.is_done() {
        let now = run.next_time();
        let mut cmds = Vec::new();
        while let Some(e) = pending.next_if(|e| Timestamp(e.t_ms) <= now) {
            cmds.push((SCRIPT_CLIENT, e.command.clone()));
        }
        let Some(out) = run.step(cmds)? else { break };
        if let Some(log) = log.as_deref_mut() {
            log.write_tick(out.snapshot.t, out.records.clone())?;
        }
        on_tick(&out);
    }
    if let Some(log) = log {
        log.flush()?;
    }
    Ok(())
}

/// Convenience wrapper returning every snapshot and the log bytes.
pub fn run_to_log(
    scn: Scenario,
    cfg: EngineConfig,
    script: &[ScriptEntry],
) -> Result<(Vec<crate::EngineSnapshot>, Vec<u8>), RuntimeError> {
    let mut log = LogWriter::start(Vec::new(), &scn, &cfg)?;
    let mut snaps = Vec::new();
    run_virtual(scn, cfg, script, Some(&mut log), |o| snaps.push(o.snapshot.clone()))?;
    Ok((snaps, log.into_inner()))
}

#[cfg(test)]
mod tests {
    use skyfence_core::{SensorId, TargetClass};
    use skyfence_simkit::presets;

    use super::*;

    fn quiet(duration_s: f64) -> Scenario {
        let mut s = Scenario::new("quiet", duration_s, 5);
        s.sensors.audio.enabled = false;
        s.sensors.fcam.enabled = false;
        s
    }

    #[test]
    fn cadence() {
        let mut snaps = Vec::new();
        run_virtual::<Vec<u8>>(quiet(3.0), EngineConfig::default(), &[], None, |o| snaps.push(o.snapshot.t)).unwrap();
        assert_eq!(snaps.len(), 30);
        assert_eq!(snaps[0], Timestamp(100));
        assert!(snaps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn persistence_preset_fuses_drone() {
        let mut drone_ticks = 0;
        run_virtual::<Vec<u8>>(presets::persistence(3), EngineConfig::default(), &[], None, |o| {
            if o.snapshot.decision.label == Some(TargetClass::Drone) {
                drone_ticks += 1;
            }
        })
        .unwrap();
        assert!(drone_ticks > 200, "{drone_ticks}");
    }

    #[test]
    fn script_commands_are_applied_and_acked() {
        let script = read_script(
            "# comment\n{\"t_ms\":250,\"command\":{\"type\":\"worker\",\"id\":\"ircam\",\"action\":\"idle\"}}\n\
             {\"t_ms\":150,\"command\":{\"type\":\"set_fusion\",\"min_sensors\":1}}\n"
                .as_bytes(),
        )
        .unwrap();
        assert_eq!(script[0].t_ms, 150);
        let mut replies = Vec::new();
        let mut states = Vec::new();
        run_virtual::<Vec<u8>>(quiet(1.0), EngineConfig::default(), &script, None, |o| {
            replies.extend(o.replies.iter().map(|(_, f)| (o.snapshot.tick, f.clone())));
            states.push(o.snapshot.sensors[&WorkerId::Ircam].state);
        })
        .unwrap();
        assert_eq!(replies.len(), 2);
        assert_eq!(replies[0].0, 2);
        // the worker acknowledges on the tick after the command
        assert_eq!(replies[1].0, 4);
        assert!(replies.iter().all(|(_, f)| matches!(f, crate::TelemetryFrame::Ack { .. })));
        assert_eq!(states.last(), Some(&crate::SensorState::Idle));
    }

    #[test]
    fn sensors_report_their_rates() {
        let mut last = None;
        run_virtual::<Vec<u8>>(quiet(2.0), EngineConfig::default(), &[], None, |o| last = Some(o.snapshot.clone())).unwrap();
        let s = last.unwrap();
        assert_eq!(s.sensors[&WorkerId::Ircam].fps, 60.0);
        assert_eq!(s.sensors[&WorkerId::Vcam].fps, 50.0);
        assert_eq!(s.sensors[&WorkerId::Fcam].state, crate::SensorState::Idle);
        assert!(s.gps.is_some());
        assert!(s.reports.iter().all(|r| r.sensor != SensorId::Audio));
    }
}
