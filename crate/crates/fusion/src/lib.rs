//! Decision-level fusion of detection reports.
//!
//! Every sensor contributes only its most recent report inside the smoothing
//! window. For each airborne class `c` the fuser counts the sensors currently
//! asserting `c` and sums `weight * confidence` over them. A class qualifies
//! when at least `min_sensors` sensors assert it and its score reaches the
//! threshold; the qualifying class with the highest score wins.
//!
//! ```
//! use skyfence_core::{DetectionReport, SensorId, TargetClass, Timestamp};
//! use skyfence_fusion::{FusionConfig, FusionState};
//!
//! let cfg = FusionConfig::default(); // weights 1.0, two sensors, θ = 1.0
//! let mut state = FusionState::new(cfg.window_ms);
//! state.ingest(DetectionReport::new(SensorId::Ircam, Timestamp(0), TargetClass::Drone, 0.9)).unwrap();
//! assert_eq!(state.decide(&cfg, Timestamp(50)).label, None);
//!
//! state.ingest(DetectionReport::new(SensorId::Vcam, Timestamp(400), TargetClass::Drone, 0.8)).unwrap();
//! let d = state.decide(&cfg, Timestamp(450));
//! assert_eq!(d.label, Some(TargetClass::Drone));
//! assert!((d.score - 1.7).abs() < 1e-12);
//! ```

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use skyfence_core::{
    CoreError, DetectionReport, SensorId, TargetClass, Timestamp, CLASSIFYING_SENSORS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("rejected report: {0}")]
    InvalidReport(#[from] CoreError),
    #[error("invalid fusion config: {0}")]
    InvalidConfig(String),
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorWeights {
    #[serde(default = "one")]
    pub ircam: f64,
    #[serde(default = "one")]
    pub vcam: f64,
    #[serde(default = "one")]
    pub audio: f64,
    #[serde(default = "one")]
    pub adsb: f64,
}

impl Default for SensorWeights {
    fn default() -> Self {
        SensorWeights { ircam: 1.0, vcam: 1.0, audio: 1.0, adsb: 1.0 }
    }
}

impl SensorWeights {
    pub fn uniform(w: f64) -> Self {
        SensorWeights { ircam: w, vcam: w, audio: w, adsb: w }
    }

    /// Weight of `sensor`; the fish-eye camera never votes.
    pub fn get(&self, sensor: SensorId) -> f64 {
        match sensor {
            SensorId::Ircam => self.ircam,
            SensorId::Vcam => self.vcam,
            SensorId::Audio => self.audio,
            SensorId::Adsb => self.adsb,
            SensorId::Fcam => 0.0,
        }
    }

    pub fn set(&mut self, sensor: SensorId, w: f64) {
        match sensor {
            SensorId::Ircam => self.ircam = w,
            SensorId::Vcam => self.vcam = w,
            SensorId::Audio => self.audio = w,
            SensorId::Adsb => self.adsb = w,
            SensorId::Fcam => {}
        }
    }

    fn scaled(&self, k: f64) -> Self {
        SensorWeights {
            ircam: self.ircam * k,
            vcam: self.vcam * k,
            audio: self.audio * k,
            adsb: self.adsb * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    pub weights: SensorWeights,
    pub min_sensors: usize,
    pub window_ms: u64,
    /// Score gate. `None` means `0.5 * min_sensors`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig { weights: SensorWeights::default(), min_sensors: 2, window_ms: 1000, threshold: None }
    }
}

impl FusionConfig {
    pub fn with_min_sensors(mut self, n: usize) -> Self {
        self.min_sensors = n;
        self
    }

    pub fn with_threshold(mut self, theta: f64) -> Self {
        self.threshold = Some(theta);
        self
    }

    pub fn effective_threshold(&self) -> f64 {
        self.threshold.unwrap_or(0.5 * self.min_sensors as f64)
    }

    /// Multiply every weight and the threshold by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        FusionConfig {
            weights: self.weights.scaled(k),
            min_sensors: self.min_sensors,
            window_ms: self.window_ms,
            threshold: Some(self.effective_threshold() * k),
        }
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        let ws: Vec<f64> = CLASSIFYING_SENSORS.iter().map(|&s| self.weights.get(s)).collect();
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(FusionError::InvalidConfig("weights must be finite and non-negative".into()));
        }
        if !ws.iter().any(|w| *w > 0.0) {
            return Err(FusionError::InvalidConfig("at least one weight must be positive".into()));
        }
        if !(1..=CLASSIFYING_SENSORS.len()).contains(&self.min_sensors) {
            return Err(FusionError::InvalidConfig(format!(
                "min_sensors {} not in [1, {}]",
                self.min_sensors,
                CLASSIFYING_SENSORS.len()
            )));
        }
        if self.window_ms == 0 {
            return Err(FusionError::InvalidConfig("window_ms must be positive".into()));
        }
        let theta = self.effective_threshold();
        if !theta.is_finite() || theta < 0.0 {
            return Err(FusionError::InvalidConfig(format!("threshold {theta} must be >= 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedDecision {
    pub label: Option<TargetClass>,
    pub score: f64,
    pub contributing: BTreeSet<SensorId>,
    pub t: Timestamp,
}

impl FusedDecision {
    pub fn none(t: Timestamp) -> Self {
        FusedDecision { label: None, score: 0.0, contributing: BTreeSet::new(), t }
    }
}

/// Residual tie-break order, most preferred first.
const PRIORITY: [TargetClass; 4] =
    [TargetClass::Drone, TargetClass::Helicopter, TargetClass::Airplane, TargetClass::Bird];

/// Reports held for the smoothing window, in ingestion order.
#[derive(Debug, Clone, Default)]
pub struct FusionState {
    reports: VecDeque<DetectionReport>,
    newest: Option<Timestamp>,
    window_ms: u64,
}

impl FusionState {
    pub fn new(window_ms: u64) -> Self {
        FusionState { reports: VecDeque::new(), newest: None, window_ms }
    }

    pub fn window_ms(&self) -> u64 {
        self.window_ms
    }

    pub fn set_window(&mut self, window_ms: u64) {
        self.window_ms = window_ms;
        self.evict();
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    pub fn reports(&self) -> impl Iterator<Item = &DetectionReport> {
        self.reports.iter()
    }

    pub fn clear(&mut self) {
        self.reports.clear();
        self.newest = None;
    }

    /// Store a report and drop everything older than the window relative to
    /// the newest timestamp seen.
    pub fn ingest(&mut self, report: DetectionReport) -> Result<(), FusionError> {
        report.validate()?;
        self.newest = Some(self.newest.map_or(report.t, |n| n.max(report.t)));
        self.reports.push_back(report);
        self.evict();
        Ok(())
    }

    fn evict(&mut self) {
        if let Some(newest) = self.newest {
            let window = self.window_ms;
            self.reports.retain(|r| newest.since(r.t) <= window);
        }
    }

    /// Latest report per sensor with `now - t <= window` (and `t <= now`).
    pub fn latest_in_window(&self, now: Timestamp, window_ms: u64) -> BTreeMap<SensorId, &DetectionReport> {
        let mut latest: BTreeMap<SensorId, &DetectionReport> = BTreeMap::new();
        for r in &self.reports {
            if r.t > now || now.since(r.t) > window_ms {
                continue;
            }
            match latest.get(&r.sensor) {
                // later ingestion wins on equal timestamps
                Some(prev) if prev.t > r.t => {}
                _ => {
                    latest.insert(r.sensor, r);
                }
            }
        }
        latest
    }

    pub fn decide(&self, cfg: &FusionConfig, now: Timestamp) -> FusedDecision {
        let latest = self.latest_in_window(now, cfg.window_ms);
        let theta = cfg.effective_threshold();

        let mut best: Option<(TargetClass, f64, BTreeSet<SensorId>)> = None;
        for class in PRIORITY {
            let sensors: BTreeSet<SensorId> =
                latest.iter().filter(|(_, r)| r.label == class).map(|(&s, _)| s).collect();
            if sensors.len() < cfg.min_sensors {
                continue;
            }
            let score: f64 = sensors.iter().map(|s| cfg.weights.get(*s) * latest[s].confidence).sum();
            if score < theta {
                continue;
            }
            let better = match &best {
                None => true,
                // PRIORITY order already handles exact ties
                Some((_, best_score, _)) => score > *best_score,
            };
            if better {
                best = Some((class, score, sensors));
            }
        }

        match best {
            Some((label, score, contributing)) => FusedDecision { label: Some(label), score, contributing, t: now },
            None => FusedDecision::none(now),
        }
    }
}
