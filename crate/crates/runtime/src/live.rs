use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use log::{error, info};
use serde::{Deserialize, Serialize};
use skyfence_simkit::Scenario;

use crate::{
    spawn_workers, tick_count, tick_time, BoundedQueue, ClientId, Command, Engine, EngineConfig, LogWriter, RuntimeError,
    TickOutput, Worker, WorkerEvent, WorkerId, WorkerInput,
};

/// How often an idle worker thread looks at its inbox.
const INBOX_POLL: Duration = Duration::from_millis(5);

/// Timing of a wall-clock run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LiveStats {
    pub ticks: u64,
    /// Ticks finished within one period of their scheduled start.
    pub on_time: u64,
    /// Worst lateness of a tick's finish relative to its scheduled start.
    pub max_tick_ms: f64,
}

impl LiveStats {
    pub fn on_time_fraction(&self) -> f64 {
        if self.ticks == 0 {
            return 1.0;
        }
        self.on_time as f64 / self.ticks as f64
    }
}

/// Operator commands waiting for the next tick, from any number of clients.
pub type CommandQueue = BoundedQueue<(ClientId, Command)>;

struct Link {
    id: WorkerId,
    events: Arc<BoundedQueue<WorkerEvent>>,
    inbox: Arc<BoundedQueue<WorkerInput>>,
}

fn worker_loop(mut w: Box<dyn Worker>, link: Link, start: Instant, stop: Arc<AtomicBool>) {
    let handle_inbox = |w: &mut Box<dyn Worker>| {
        for input in link.inbox.drain() {
            if let Some(ev) = w.handle(input) {
                link.events.push(ev);
            }
        }
    };
    while !stop.load(Ordering::Relaxed) {
        handle_inbox(&mut w);
        let Some(due) = w.next_due() else {
            // input exhausted; keep answering commands until told to stop
            thread::sleep(INBOX_POLL);
            continue;
        };
        let at = start + Duration::from_millis(due.millis());
        let now = Instant::now();
        if at > now {
            thread::sleep((at - now).min(INBOX_POLL));
            continue;
        }
        match w.step() {
            Ok(events) => events.into_iter().for_each(|e| link.events.push(e)),
            Err(e) => {
                error!("{} worker: {e}", link.id);
                link.events.push(WorkerEvent::Error { worker: link.id, t: due, message: e.to_string() });
            }
        }
    }
}

/// Runs a scenario against the wall clock: one thread per worker, paced by
/// its input timestamps, and the main loop on the calling thread at the
/// scenario's tick rate. Commands are taken from `commands` at each tick;
/// `on_tick` sees every tick's output. Returns when the scenario ends or
/// `stop` is raised.
pub fn run_live<W: Write>(
    scn: Scenario,
    cfg: EngineConfig,
    commands: Arc<CommandQueue>,
    stop: Arc<AtomicBool>,
    mut log: Option<&mut LogWriter<W>>,
    mut on_tick: impl FnMut(&TickOutput),
) -> Result<LiveStats, RuntimeError> {
    scn.validate()?;
    let scn = Arc::new(scn);
    let workers = spawn_workers(&scn, &cfg)?;
    let mut engine = Engine::new(&scn, cfg.clone())?;
    let hz = scn.sensors.main_hz;
    let period = Duration::from_secs_f64(1.0 / hz);
    let ticks = tick_count(&scn);

    let mut events: BTreeMap<WorkerId, Arc<BoundedQueue<WorkerEvent>>> = BTreeMap::new();
    let mut inboxes: BTreeMap<WorkerId, Arc<BoundedQueue<WorkerInput>>> = BTreeMap::new();
    let worker_stop = Arc::new(AtomicBool::new(false));
    let start = Instant::now();
    let mut threads = Vec::new();
    for w in workers {
        let id = w.id();
        let link = Link {
            id,
            events: Arc::new(BoundedQueue::new(cfg.queue_capacity)),
            inbox: Arc::new(BoundedQueue::new(cfg.queue_capacity)),
        };
        events.insert(id, link.events.clone());
        inboxes.insert(id, link.inbox.clone());
        let ws = worker_stop.clone();
        threads.push(thread::Builder::new().name(format!("worker-{id}")).spawn(move || worker_loop(w, link, start, ws))?);
    }

    let mut stats = LiveStats::default();
    let mut reported: BTreeMap<WorkerId, u64> = BTreeMap::new();
    let mut result = Ok(());
    for k in 1..=ticks {
        if stop.load(Ordering::Relaxed) {
            break;
        }
        let now = tick_time(k, hz);
        let scheduled = start + Duration::from_millis(now.millis());
        if let Some(d) = scheduled.checked_duration_since(Instant::now()) {
            thread::sleep(d);
        }
        let mut batch = Vec::new();
        for (&id, q) in &events {
            batch.extend(q.drain());
            let total = q.dropped();
            let seen = reported.entry(id).or_insert(0);
            if total > *seen {
                batch.push(WorkerEvent::Dropped { worker: id, count: total - *seen });
                *seen = total;
            }
        }
        let out = engine.tick(now, commands.drain(), batch);
        for input in &out.to_workers {
            match input {
                WorkerInput::Command(c) => {
                    if let Some(q) = inboxes.get(&c.worker) {
                        q.push(input.clone());
                    }
                }
                WorkerInput::Pose(_) => {
                    for id in [WorkerId::Ircam, WorkerId::Vcam] {
                        if let Some(q) = inboxes.get(&id) {
                            q.push(input.clone());
                        }
                    }
                }
            }
        }
        if let Some(log) = log.as_deref_mut() {
            if let Err(e) = log.write_tick(now, out.records.clone()) {
                result = Err(e);
                break;
            }
        }
        on_tick(&out);

        let late = Instant::now().saturating_duration_since(scheduled);
        stats.ticks += 1;
        if late <= period {
            stats.on_time += 1;
        }
        stats.max_tick_ms = stats.max_tick_ms.max(late.as_secs_f64() * 1000.0);
    }

    worker_stop.store(true, Ordering::Relaxed);
    for t in threads {
        let _ = t.join();
    }
    if let Some(log) = log {
        log.flush()?;
    }
    result?;
    info!(
        "live run: {} ticks, {:.1}% on time, worst {:.1} ms",
        stats.ticks,
        100.0 * stats.on_time_fraction(),
        stats.max_tick_ms
    );
    Ok(stats)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_live_run_keeps_time_and_obeys_commands() {
        let mut scn = Scenario::new("live", 1.5, 2);
        scn.sensors.audio.enabled = false;
        let cmds = Arc::new(CommandQueue::new(16));
        cmds.push((4, Command::Worker { id: WorkerId::Gps, action: crate::RunState::Idle }));
        let mut acks = 0;
        let mut snaps = 0;
        let stats = run_live::<Vec<u8>>(scn, EngineConfig::default(), cmds, Arc::new(AtomicBool::new(false)), None, |o| {
            snaps += 1;
            acks += o.replies.iter().filter(|(c, f)| *c == 4 && matches!(f, crate::TelemetryFrame::Ack { .. })).count();
        })
        .unwrap();
        assert_eq!(stats.ticks, 15);
        assert_eq!(snaps, 15);
        assert_eq!(acks, 1);
    }
}
