//! `skyfence`: run, serve, replay and inspect the detection engine.

use std::error::Error;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use log::{info, warn};
use skyfence_acoustics::{featurize, read_wav, AudioClassifier, MfccExtractor};
use skyfence_airdata::{nmea_parse, parse_frame_line, AdsbDecoder};
use skyfence_core::{DriBin, Timestamp};
use skyfence_evalkit::{evaluate_dirs, EvalError, EvalParams};
use skyfence_runtime::{
    read_log_file, read_script, replay, run_live, run_virtual, train_audio_model, CommandQueue, EngineConfig,
    EngineSnapshot, Hub, LogWriter, ScriptEntry, TickOutput,
};
use skyfence_simkit::{presets, Scenario};

type Res<T> = Result<T, Box<dyn Error>>;

const LOG_LEVELS: [&str; 4] = ["error", "warn", "info", "debug"];

#[derive(Parser)]
#[command(name = "skyfence", version, about = "Multi-sensor drone detection engine")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario to the end (virtual clock unless --live).
    Run {
        /// Scenario JSON file, or `preset:NAME`.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the event log here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// No per-second status lines; print only the summary.
        #[arg(long)]
        headless: bool,
        /// Engine configuration JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Timed command script, one `{"t_ms":..,"command":{..}}` per line.
        #[arg(long)]
        commands: Option<PathBuf>,
        /// Write every snapshot as one JSON line.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        /// Pace the run against the wall clock with one thread per worker.
        #[arg(long)]
        live: bool,
    },
    /// Run a scenario live and serve telemetry over WebSocket at /ws.
    Serve {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Score detections against annotated clips.
    Evaluate {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        #[arg(long, default_value_t = 0.5)]
        confidence: f64,
    },
    /// Decode a file of hex Mode S frames into one JSON object per update.
    DecodeAdsb { file: PathBuf },
    /// Parse NMEA sentences into one JSON fix per line.
    DecodeNmea { file: PathBuf },
    /// MFCC summary of a mono 16-bit WAV file.
    Mfcc {
        file: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also classify the clip with a model trained on synthetic audio.
        #[arg(long)]
        classify: bool,
    },
    /// Check an event log and re-run it, reporting the first divergence.
    Replay {
        log: PathBuf,
        /// Write the reproduced snapshots as JSON lines.
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
    /// Print a built-in scenario as JSON.
    Preset {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn init_logging() {
    let requested = std::env::var("SKYFENCE_LOG_LEVEL").ok();
    let level = match requested.as_deref().map(str::trim).map(str::to_ascii_lowercase) {
        Some(l) if LOG_LEVELS.contains(&l.as_str()) => l,
        _ => "warn".to_string(),
    };
    env_logger::Builder::new().parse_filters(&level).format_timestamp_millis().init();
    if let Some(r) = requested.filter(|r| !LOG_LEVELS.contains(&r.trim().to_ascii_lowercase().as_str())) {
        warn!("SKYFENCE_LOG_LEVEL={r:?} is not one of {LOG_LEVELS:?}; using warn");
    }
}

fn preset(name: &str, seed: u64) -> Option<Scenario> {
    Some(match name {
        "demo" => presets::demo(seed),
        "clutter_only" => presets::clutter_only(seed),
        "persistence" => presets::persistence(seed),
        "slew" => presets::slew(seed),
        "calibration_close" => presets::calibration(DriBin::Close, 2000, seed),
        "calibration_medium" => presets::calibration(DriBin::Medium, 2000, seed),
        "calibration_distant" => presets::calibration(DriBin::Distant, 2000, seed),
        _ => return None,
    })
}

fn load_scenario(spec: &str, seed: Option<u64>) -> Res<Scenario> {
    let mut scn = match spec.strip_prefix("preset:") {
        Some(name) => preset(name, seed.unwrap_or(0)).ok_or_else(|| format!("unknown preset {name:?}"))?,
        None => Scenario::load(spec)?,
    };
    if let Some(seed) = seed {
        scn.seed = seed;
    }
    scn.validate()?;
    Ok(scn)
}

fn load_config(path: Option<&Path>) -> Res<EngineConfig> {
    Ok(match path {
        Some(p) => EngineConfig::load(p)?,
        None => EngineConfig::default(),
    })
}

fn load_script(path: Option<&Path>) -> Res<Vec<ScriptEntry>> {
    Ok(match path {
        Some(p) => read_script(BufReader::new(File::open(p)?))?,
        None => Vec::new(),
    })
}

fn status_line(s: &EngineSnapshot) -> String {
    let decision = s.decision.label.map_or("-".to_string(), |l| format!("{l} {:.2}", s.decision.score));
    format!(
        "t={:>7.1}s  pan={:>7.2}  tilt={:>6.2}  source={:<7}  decision={decision}  aircraft={}",
        s.t.as_secs_f64(),
        s.pose.pan_deg,
        s.pose.tilt_deg,
        s.source.as_str(),
        s.aircraft.len()
    )
}

/// Writes snapshots as JSON lines.
struct SnapshotSink(Option<BufWriter<File>>);

impl SnapshotSink {
    fn open(path: Option<&Path>) -> Res<Self> {
        Ok(SnapshotSink(path.map(File::create).transpose()?.map(BufWriter::new)))
    }

    fn write(&mut self, s: &EngineSnapshot) -> io::Result<()> {
        if let Some(w) = &mut self.0 {
            serde_json::to_writer(&mut *w, s)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    fn finish(self) -> io::Result<()> {
        match self.0 {
            Some(mut w) => w.flush(),
            None => Ok(()),
        }
    }
}

#[derive(Default)]
struct Summary {
    ticks: u64,
    drone_ticks: u64,
    labelled_ticks: u64,
}

impl Summary {
    fn add(&mut self, s: &EngineSnapshot) {
        self.ticks += 1;
        if let Some(l) = s.decision.label {
            self.labelled_ticks += 1;
            if l == skyfence_core::TargetClass::Drone {
                self.drone_ticks += 1;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    scenario: &str,
    seed: Option<u64>,
    log: Option<&Path>,
    headless: bool,
    config: Option<&Path>,
    commands: Option<&Path>,
    snapshots: Option<&Path>,
    live: bool,
) -> Res<()> {
    let scn = load_scenario(scenario, seed)?;
    let cfg = load_config(config)?;
    let script = load_script(commands)?;
    let mut writer = match log {
        Some(p) => Some(LogWriter::start(BufWriter::new(File::create(p)?), &scn, &cfg)?),
        None => None,
    };
    let mut sink = SnapshotSink::open(snapshots)?;
    let mut summary = Summary::default();
    let mut io_err = None;
    let hz = scn.sensors.main_hz.round().max(1.0) as u64;
    let name = scn.name.clone();
    let mut on_tick = |out: &TickOutput| {
        let s = &out.snapshot;
        summary.add(s);
        if !headless && s.tick % hz == 0 {
            println!("{}", status_line(s));
        }
        if let Err(e) = sink.write(s) {
            io_err.get_or_insert(e);
        }
    };
    let mut on_time = None;
    if live {
        let queue = Arc::new(CommandQueue::new(cfg.queue_capacity));
        if !script.is_empty() {
            warn!("--commands is applied only under the virtual clock; ignoring it");
        }
        let stats = run_live(scn, cfg, queue, Arc::new(AtomicBool::new(false)), writer.as_mut(), &mut on_tick)?;
        on_time = Some((stats.on_time_fraction(), stats.max_tick_ms));
    } else {
        run_virtual(scn, cfg, &script, writer.as_mut(), &mut on_tick)?;
    }
    if let Some(e) = io_err {
        return Err(e.into());
    }
    sink.finish()?;
    let mut report = serde_json::json!({
        "scenario": name,
        "ticks": summary.ticks,
        "labelled_ticks": summary.labelled_ticks,
        "drone_ticks": summary.drone_ticks,
    });
    if let Some((frac, worst)) = on_time {
        report["on_time_fraction"] = frac.into();
        report["worst_tick_ms"] = worst.into();
    }
    println!("{report}");
    Ok(())
}

fn cmd_serve(scenario: &str, port: u16, seed: Option<u64>, config: Option<&Path>, log: Option<&Path>) -> Res<()> {
    let scn = load_scenario(scenario, seed)?;
    let cfg = load_config(config)?;
    let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
    let hub = Hub::new(Arc::new(CommandQueue::new(cfg.queue_capacity)));
    let listener = rt.block_on(skyfence_runtime::bind(port))?;
    eprintln!("telemetry on ws://{}/ws", listener.local_addr()?);
    let server = rt.spawn(skyfence_runtime::serve(listener, hub.clone()));
    let mut writer = match log {
        Some(p) => Some(LogWriter::start(BufWriter::new(File::create(p)?), &scn, &cfg)?),
        None => None,
    };
    let stats = run_live(scn, cfg, hub.commands().clone(), Arc::new(AtomicBool::new(false)), writer.as_mut(), |o| {
        hub.publish(o)
    })?;
    eprintln!(
        "scenario finished: {} ticks, {:.1}% on time; still serving the last snapshot (Ctrl-C to stop)",
        stats.ticks,
        100.0 * stats.on_time_fraction()
    );
    rt.block_on(server)??;
    Ok(())
}

fn cmd_evaluate(annotations: &Path, detections: &Path, out: &Path, iou: f64, confidence: f64) -> Res<ExitCode> {
    let params = EvalParams { iou_threshold: iou, confidence_threshold: confidence };
    match evaluate_dirs(annotations, detections, &params) {
        Ok(report) => {
            let mut w = BufWriter::new(File::create(out)?);
            serde_json::to_writer_pretty(&mut w, &report)?;
            w.write_all(b"\n")?;
            w.flush()?;
            for (sensor, m) in &report.sensors {
                println!("{sensor}: overall F1 {:.4}", m.overall_f1);
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ (EvalError::Schema { .. } | EvalError::UnknownClip(_) | EvalError::InvalidParams(_))) => {
            eprintln!("schema error: {e}");
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.into()),
    }
}

fn lines(path: &Path) -> Res<impl Iterator<Item = io::Result<String>>> {
    Ok(BufReader::new(File::open(path)?).lines())
}

fn cmd_decode_adsb(path: &Path) -> Res<ExitCode> {
    let mut dec = AdsbDecoder::new();
    let mut bad = 0usize;
    let out = io::stdout();
    let mut out = out.lock();
    for (n, line) in lines(path)?.enumerate() {
        let line = line?;
        match parse_frame_line(&line) {
            None => {}
            Some(Err(e)) => {
                bad += 1;
                warn!("line {}: {e}", n + 1);
            }
            Some(Ok((t, frame))) => match dec.feed(&frame, t.unwrap_or(Timestamp::ZERO)) {
                Ok(Some(u)) => writeln!(out, "{}", serde_json::to_string(&u)?)?,
                Ok(None) => {}
                Err(e) => {
                    bad += 1;
                    warn!("line {}: {e}", n + 1);
                }
            },
        }
    }
    if bad > 0 {
        info!("{bad} frames rejected");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_decode_nmea(path: &Path) -> Res<ExitCode> {
    let out = io::stdout();
    let mut out = out.lock();
    for (n, line) in lines(path)?.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match nmea_parse(&line) {
            Ok(Some(fix)) => writeln!(out, "{}", serde_json::to_string(&fix)?)?,
            Ok(None) => {}
            Err(e) => warn!("line {}: {e}", n + 1),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_mfcc(path: &Path, config: Option<&Path>, classify: bool) -> Res<()> {
    let cfg = load_config(config)?;
    let samples = read_wav(path)?;
    let ex = MfccExtractor::new(cfg.mfcc)?;
    let m = ex.compute(&samples);
    let features = featurize(&m)?;
    let d = features.len() / 2;
    let mut report = serde_json::json!({
        "samples": samples.len(),
        "frames": m.n_frames(),
        "mean": &features[..d],
        "std": &features[d..],
    });
    if classify {
        let model = train_audio_model(0, cfg.audio_training_clips, cfg.mfcc)?;
        let c = model.classify(&features)?;
        report["classification"] = serde_json::json!({
            "label": c.label,
            "confidence": c.confidence,
            "probabilities": c.probabilities,
        });
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_replay(path: &Path, snapshots: Option<&Path>) -> Res<()> {
    let records = read_log_file(path)?;
    let snaps = replay(&records)?;
    let mut sink = SnapshotSink::open(snapshots)?;
    for s in &snaps {
        sink.write(s)?;
    }
    sink.finish()?;
    let last = snaps.last().map_or(0, |s| s.t.millis());
    println!("{} records, {} ticks reproduced up to {:.1} s", records.len(), snaps.len(), last as f64 / 1000.0);
    Ok(())
}

fn dispatch(cmd: Cmd) -> Res<ExitCode> {
    match cmd {
        Cmd::Run { scenario, seed, log, headless, config, commands, snapshots, live } => {
            cmd_run(
                &scenario,
                seed,
                log.as_deref(),
                headless,
                config.as_deref(),
                commands.as_deref(),
                snapshots.as_deref(),
                live,
            )?;
        }
        Cmd::Serve { scenario, port, seed, config, log } => {
            cmd_serve(&scenario, port, seed, config.as_deref(), log.as_deref())?
        }
        Cmd::Evaluate { annotations, detections, out, iou, confidence } => {
            return cmd_evaluate(&annotations, &detections, &out, iou, confidence)
        }
        Cmd::DecodeAdsb { file } => return cmd_decode_adsb(&file),
        Cmd::DecodeNmea { file } => return cmd_decode_nmea(&file),
        Cmd::Mfcc { file, config, classify } => cmd_mfcc(&file, config.as_deref(), classify)?,
        Cmd::Replay { log, snapshots } => cmd_replay(&log, snapshots.as_deref())?,
        Cmd::Preset { name, seed } => {
            let scn = preset(&name, seed).ok_or_else(|| format!("unknown preset {name:?}"))?;
            println!("{}", scn.to_json());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
