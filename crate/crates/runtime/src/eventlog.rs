use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use skyfence_core::Timestamp;
use skyfence_simkit::Scenario;

use crate::{ClientId, Command, Engine, EngineConfig, EngineSnapshot, RecordKind, RuntimeError, WorkerEvent};

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: u64,
    /// Main-loop tick time the record belongs to.
    pub t: Timestamp,
    pub kind: RecordKind,
    pub payload: Value,
}

/// Appends JSONL records with consecutive sequence numbers.
pub struct LogWriter<W: Write> {
    out: W,
    seq: u64,
}

impl<W: Write> LogWriter<W> {
    /// Writes the opening `command` record, which carries the scenario and
    /// configuration so a log can be replayed on its own.
    pub fn start(out: W, scn: &Scenario, cfg: &EngineConfig) -> Result<Self, RuntimeError> {
        let mut w = LogWriter { out, seq: 0 };
        let payload = json!({"entry": "start", "scenario": scn, "config": cfg});
        w.write(Timestamp::ZERO, RecordKind::Command, payload)?;
        Ok(w)
    }

    pub fn write(&mut self, t: Timestamp, kind: RecordKind, payload: Value) -> Result<(), RuntimeError> {
        let rec = LogRecord { seq: self.seq, t, kind, payload };
        serde_json::to_writer(&mut self.out, &rec)?;
        self.out.write_all(b"\n")?;
        self.seq += 1;
        Ok(())
    }

    pub fn write_tick(&mut self, t: Timestamp, records: Vec<(RecordKind, Value)>) -> Result<(), RuntimeError> {
        for (kind, payload) in records {
            self.write(t, kind, payload)?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), RuntimeError> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Reads and checks a log: `seq` must count up from zero by one and `t`
/// must never decrease. A final line cut short by a crash is ignored.
pub fn read_log(input: impl BufRead) -> Result<Vec<LogRecord>, RuntimeError> {
    let lines: Vec<String> = input.lines().collect::<Result<_, _>>()?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut out: Vec<LogRecord> = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: LogRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(_) if Some(i) == last && !line.trim_end().ends_with('}') => break,
            Err(e) => return Err(RuntimeError::LogFormat { line: i + 1, msg: e.to_string() }),
        };
        let want = out.len() as u64;
        if rec.seq != want {
            return Err(RuntimeError::LogOrder { seq: rec.seq, msg: format!("expected seq {want}") });
        }
        if let Some(prev) = out.last() {
            if rec.t < prev.t {
                return Err(RuntimeError::LogOrder { seq: rec.seq, msg: format!("t {} after {}", rec.t, prev.t) });
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn read_log_file(path: impl AsRef<std::path::Path>) -> Result<Vec<LogRecord>, RuntimeError> {
    read_log(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[derive(Deserialize)]
struct StartEntry {
    scenario: Scenario,
    config: EngineConfig,
}

#[derive(Deserialize)]
struct ApplyEntry {
    client: ClientId,
    command: Command,
}

#[derive(Default)]
struct TickInputs {
    commands: Vec<(ClientId, Command)>,
    events: Vec<WorkerEvent>,
    expected: Vec<(RecordKind, Value)>,
}

/// Re-runs the engine on the inputs recorded in a log, checks each tick's
/// decision and pose against the recorded ones, and returns the snapshots.
pub fn replay(records: &[LogRecord]) -> Result<Vec<EngineSnapshot>, RuntimeError> {
    let first = records.first().ok_or(RuntimeError::LogFormat { line: 1, msg: "empty log".into() })?;
    let bad = |seq: u64, msg: &str| RuntimeError::LogFormat { line: seq as usize + 1, msg: msg.into() };
    if first.kind != RecordKind::Command || first.payload.get("entry") != Some(&json!("start")) {
        return Err(bad(0, "log does not open with a start record"));
    }
    let start: StartEntry = serde_json::from_value(first.payload.clone())?;
    let mut engine = Engine::new(&start.scenario, start.config)?;

    let mut ticks: BTreeMap<Timestamp, TickInputs> = BTreeMap::new();
    for rec in &records[1..] {
        let slot = ticks.entry(rec.t).or_default();
        match rec.kind {
            RecordKind::Command => {
                let a: ApplyEntry = serde_json::from_value(rec.payload.clone()).map_err(|e| bad(rec.seq, &e.to_string()))?;
                slot.commands.push((a.client, a.command));
            }
            RecordKind::Report | RecordKind::Ack => {
                let ev: WorkerEvent = serde_json::from_value(rec.payload.clone()).map_err(|e| bad(rec.seq, &e.to_string()))?;
                slot.events.push(ev);
            }
            RecordKind::Decision | RecordKind::Pose => slot.expected.push((rec.kind, rec.payload.clone())),
        }
    }

    let mut snaps = Vec::with_capacity(ticks.len());
    for (t, inputs) in ticks {
        // a tick cut off before its decision was written is not replayed
        if inputs.expected.is_empty() {
            break;
        }
        let out = engine.tick(t, inputs.commands, inputs.events);
        let produced: Vec<&(RecordKind, Value)> =
            out.records.iter().filter(|(k, _)| matches!(k, RecordKind::Decision | RecordKind::Pose)).collect();
        for (want, got) in inputs.expected.iter().zip(&produced) {
            if want != *got {
                return Err(RuntimeError::ReplayMismatch {
                    t: t.millis(),
                    msg: format!("{:?}: logged {} but replay gave {}", want.0, want.1, got.1),
                });
            }
        }
        snaps.push(out.snapshot);
    }
    Ok(snaps)
}
