use std::path::Path;

use serde::{Deserialize, Serialize};
use skyfence_core::{AngularOffset, CameraModel, GeoPosition, SensorId, TargetClass};
use skyfence_platform::PlatformPose;

use crate::{DetectorProfile, SimError};

/// A point on a target's path: time in seconds and east/north/up metres
/// from the platform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Waypoint {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Waypoint { t, x, y, z }
    }
}

/// Transponder identity for targets that broadcast ADS-B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdsbIdentity {
    /// 24-bit address as six hex digits.
    pub icao: String,
    pub typecode: u8,
    pub category: u8,
    #[serde(default)]
    pub callsign: String,
}

impl AdsbIdentity {
    pub fn icao_u32(&self) -> Result<u32, SimError> {
        u32::from_str_radix(&self.icao, 16)
            .ok()
            .filter(|v| *v <= 0xFF_FFFF)
            .ok_or_else(|| SimError::InvalidScenario(format!("bad icao {:?}", self.icao)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTarget {
    pub class: TargetClass,
    /// Motor-to-motor span for drones, wingspan or rotor span otherwise.
    pub width_m: f64,
    /// Linear interpolation between waypoints; the target exists only from
    /// the first waypoint's time to the last one's.
    pub waypoints: Vec<Waypoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adsb: Option<AdsbIdentity>,
}

impl SimTarget {
    pub const DRONE_SMALL_M: f64 = 0.1;
    pub const DRONE_MEDIUM_M: f64 = 0.3;
    pub const DRONE_LARGE_M: f64 = 0.4;

    /// A target holding still at `(x, y, z)` for `[0, duration_s]`.
    pub fn stationary(class: TargetClass, width_m: f64, pos: [f64; 3], duration_s: f64) -> Self {
        SimTarget {
            class,
            width_m,
            waypoints: vec![Waypoint::new(0.0, pos[0], pos[1], pos[2]), Waypoint::new(duration_s, pos[0], pos[1], pos[2])],
            adsb: None,
        }
    }

    pub fn position_at(&self, t: f64) -> Option<[f64; 3]> {
        let w = &self.waypoints;
        let (first, last) = (w.first()?, w.last()?);
        if t < first.t || t > last.t {
            return None;
        }
        let i = w.partition_point(|p| p.t <= t).clamp(1, w.len().max(2) - 1);
        if w.len() == 1 {
            return Some([first.x, first.y, first.z]);
        }
        let (a, b) = (&w[i - 1], &w[i]);
        let f = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
        Some([a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z)])
    }

    fn validate(&self, i: usize) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(format!("target {i}: {m}")));
        if !(self.width_m > 0.0) {
            return bad(format!("width_m {} must be positive", self.width_m));
        }
        if self.waypoints.is_empty() {
            return bad("no waypoints".into());
        }
        if self.waypoints.windows(2).any(|p| p[1].t <= p[0].t) {
            return bad("waypoint times must be strictly increasing".into());
        }
        if !matches!(self.class, TargetClass::Airplane | TargetClass::Bird | TargetClass::Drone | TargetClass::Helicopter) {
            return bad(format!("class {} is not a flying target", self.class));
        }
        if let Some(a) = &self.adsb {
            a.icao_u32()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClutterKind {
    /// Lasts 1 to 3 frames.
    Insect,
    /// Lasts 1 to 10 s.
    CloudEdge,
}

/// A spurious single-sensor detection episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterEvent {
    pub kind: ClutterKind,
    pub sensor: SensorId,
    pub start_s: f64,
    pub duration_s: f64,
    pub label: TargetClass,
    pub confidence: f64,
    /// Position in the image, relative to the sensor's boresight.
    #[serde(default)]
    pub offset: AngularOffset,
}

impl ClutterEvent {
    pub fn active(&self, t: f64) -> bool {
        t >= self.start_s && t < self.start_s + self.duration_s
    }
}

/// A sensor that produces nothing for a while.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dropout {
    pub sensor: SensorId,
    pub start_s: f64,
    pub duration_s: f64,
}

impl Dropout {
    pub fn active(&self, t: f64) -> bool {
        t >= self.start_s && t < self.start_s + self.duration_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSensor {
    pub enabled: bool,
    pub camera: CameraModel,
    pub fps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamSensor {
    pub enabled: bool,
    /// Updates per second.
    pub rate_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorSuite {
    pub ircam: CameraSensor,
    pub vcam: CameraSensor,
    pub fcam: CameraSensor,
    pub audio: StreamSensor,
    pub adsb: StreamSensor,
    pub gps: StreamSensor,
    pub main_hz: f64,
}

impl Default for SensorSuite {
    fn default() -> Self {
        SensorSuite {
            ircam: CameraSensor { enabled: true, camera: CameraModel::ircam(), fps: 60.0 },
            vcam: CameraSensor { enabled: true, camera: CameraModel::vcam(), fps: 50.0 },
            fcam: CameraSensor { enabled: true, camera: CameraModel::fisheye(), fps: 30.0 },
            audio: StreamSensor { enabled: true, rate_hz: 20.0 },
            adsb: StreamSensor { enabled: true, rate_hz: 2.0 },
            gps: StreamSensor { enabled: true, rate_hz: 1.0 },
            main_hz: 10.0,
        }
    }
}

impl SensorSuite {
    pub fn camera(&self, sensor: SensorId) -> Option<&CameraSensor> {
        match sensor {
            SensorId::Ircam => Some(&self.ircam),
            SensorId::Vcam => Some(&self.vcam),
            SensorId::Fcam => Some(&self.fcam),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorProfiles {
    pub ircam: DetectorProfile,
    pub vcam: DetectorProfile,
}

impl Default for DetectorProfiles {
    fn default() -> Self {
        DetectorProfiles { ircam: DetectorProfile::ircam_default(), vcam: DetectorProfile::vcam_default() }
    }
}

impl DetectorProfiles {
    pub fn get(&self, sensor: SensorId) -> Option<&DetectorProfile> {
        match sensor {
            SensorId::Ircam => Some(&self.ircam),
            SensorId::Vcam => Some(&self.vcam),
            _ => None,
        }
    }
}

fn default_version() -> u32 {
    Scenario::VERSION
}

fn default_site() -> GeoPosition {
    GeoPosition { lat_deg: 59.6519, lon_deg: 17.9186, alt_m: 30.0 }
}

fn default_pose() -> PlatformPose {
    PlatformPose::new(0.0, 20.0)
}

fn default_max_drone_range() -> f64 {
    200.0
}

/// A complete simulated world: what flies where, what the sensors are, how
/// the detectors behave, and the spurious events they suffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_version")]
    pub scenario_version: u32,
    #[serde(default)]
    pub name: String,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    /// Platform location, used for ADS-B and GPS.
    #[serde(default = "default_site")]
    pub site: GeoPosition,
    #[serde(default = "default_pose")]
    pub initial_pose: PlatformPose,
    #[serde(default)]
    pub sensors: SensorSuite,
    #[serde(default)]
    pub targets: Vec<SimTarget>,
    #[serde(default)]
    pub clutter: Vec<ClutterEvent>,
    #[serde(default)]
    pub dropouts: Vec<Dropout>,
    #[serde(default)]
    pub detectors: DetectorProfiles,
    /// Drones further away than this are invisible to the detectors.
    #[serde(default = "default_max_drone_range")]
    pub max_drone_range_m: f64,
}

impl Scenario {
    pub const VERSION: u32 = 1;

    pub fn new(name: &str, duration_s: f64, seed: u64) -> Self {
        Scenario {
            scenario_version: Self::VERSION,
            name: name.to_string(),
            duration_s,
            seed,
            site: default_site(),
            initial_pose: default_pose(),
            sensors: SensorSuite::default(),
            targets: Vec::new(),
            clutter: Vec::new(),
            dropouts: Vec::new(),
            detectors: DetectorProfiles::default(),
            max_drone_range_m: default_max_drone_range(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if self.scenario_version != Self::VERSION {
            return Err(SimError::Version(self.scenario_version));
        }
        if !(self.duration_s > 0.0) {
            return bad(format!("duration_s {} must be positive", self.duration_s));
        }
        self.site.validate().map_err(|e| SimError::InvalidScenario(e.to_string()))?;
        let s = &self.sensors;
        for (name, cam) in [("ircam", &s.ircam), ("vcam", &s.vcam), ("fcam", &s.fcam)] {
            cam.camera.validate().map_err(|e| SimError::InvalidScenario(format!("{name}: {e}")))?;
            if !(cam.fps > 0.0) {
                return bad(format!("{name}: fps must be positive"));
            }
        }
        for (name, st) in [("audio", &s.audio), ("adsb", &s.adsb), ("gps", &s.gps)] {
            if !(st.rate_hz > 0.0) {
                return bad(format!("{name}: rate_hz must be positive"));
            }
        }
        if !(s.main_hz > 0.0) {
            return bad("main_hz must be positive".into());
        }
        for (i, t) in self.targets.iter().enumerate() {
            t.validate(i)?;
        }
        for (i, c) in self.clutter.iter().enumerate() {
            let Some(cam) = s.camera(c.sensor).filter(|_| c.sensor != SensorId::Fcam) else {
                return bad(format!("clutter {i}: sensor {} has no detector", c.sensor));
            };
            if !skyfence_core::class_allowed(c.sensor, c.label) {
                return bad(format!("clutter {i}: {} cannot emit {}", c.sensor, c.label));
            }
            if !(0.0..=1.0).contains(&c.confidence) {
                return bad(format!("clutter {i}: confidence {}", c.confidence));
            }
            let ok = match c.kind {
                ClutterKind::Insect => {
                    let frames = (c.duration_s * cam.fps).round();
                    (1.0..=3.0).contains(&frames)
                }
                ClutterKind::CloudEdge => (1.0..=10.0).contains(&c.duration_s),
            };
            if !ok {
                return bad(format!("clutter {i}: duration {} s out of range for {:?}", c.duration_s, c.kind));
            }
        }
        for p in [&self.detectors.ircam, &self.detectors.vcam] {
            p.validate()?;
        }
        Ok(())
    }

    pub fn in_dropout(&self, sensor: SensorId, t: f64) -> bool {
        self.dropouts.iter().any(|d| d.sensor == sensor && d.active(t))
    }

    /// Targets present at `t` with their positions.
    pub fn positions_at(&self, t: f64) -> impl Iterator<Item = (usize, &SimTarget, [f64; 3])> {
        self.targets.iter().enumerate().filter_map(move |(i, tg)| tg.position_at(t).map(|p| (i, tg, p)))
    }
}
