use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::{class_allowed, AngularOffset, BoundingBox, CoreError, SensorId, TargetClass};

/// Engine-monotonic milliseconds since start. Never wall-clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0);

    pub fn from_secs_f64(s: f64) -> Self {
        Timestamp((s * 1000.0).round().max(0.0) as u64)
    }

    pub fn millis(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// `self - earlier` in ms, saturating at zero.
    pub fn since(self, earlier: Timestamp) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl Add<u64> for Timestamp {
    type Output = Timestamp;
    fn add(self, ms: u64) -> Timestamp {
        Timestamp(self.0 + ms)
    }
}

impl Sub<u64> for Timestamp {
    type Output = Timestamp;
    fn sub(self, ms: u64) -> Timestamp {
        Timestamp(self.0.saturating_sub(ms))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ms", self.0)
    }
}

/// One sensor's classified observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub sensor: SensorId,
    pub t: Timestamp,
    pub label: TargetClass,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<AngularOffset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoundingBox>,
    #[serde(default)]
    pub worker_fps: f64,
}

impl DetectionReport {
    pub fn new(sensor: SensorId, t: Timestamp, label: TargetClass, confidence: f64) -> Self {
        DetectionReport { sensor, t, label, confidence, offset: None, bbox: None, worker_fps: 0.0 }
    }

    pub fn with_offset(mut self, offset: AngularOffset) -> Self {
        self.offset = Some(offset);
        self
    }

    pub fn with_bbox(mut self, bbox: BoundingBox) -> Self {
        self.bbox = Some(bbox);
        self
    }

    pub fn with_fps(mut self, fps: f64) -> Self {
        self.worker_fps = fps;
        self
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !class_allowed(self.sensor, self.label) {
            return Err(CoreError::ClassNotAllowed { sensor: self.sensor, label: self.label });
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(CoreError::InvalidConfidence(self.confidence));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPosition {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
}

impl GeoPosition {
    pub fn new(lat_deg: f64, lon_deg: f64, alt_m: f64) -> Result<Self, CoreError> {
        let p = GeoPosition { lat_deg, lon_deg, alt_m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let lat_ok = (-90.0..=90.0).contains(&self.lat_deg);
        let lon_ok = self.lon_deg > -180.0 && self.lon_deg <= 180.0;
        if lat_ok && lon_ok && self.alt_m.is_finite() {
            Ok(())
        } else {
            Err(CoreError::InvalidPosition { lat_deg: self.lat_deg, lon_deg: self.lon_deg })
        }
    }

    /// East, north, up metres of `self` relative to `origin`, using a local
    /// flat-earth approximation (adequate within a few kilometres).
    pub fn enu_from(&self, origin: &GeoPosition) -> [f64; 3] {
        let north = (self.lat_deg - origin.lat_deg).to_radians() * EARTH_RADIUS_M;
        let dlon = (self.lon_deg - origin.lon_deg + 540.0).rem_euclid(360.0) - 180.0;
        let east = dlon.to_radians() * EARTH_RADIUS_M * origin.lat_deg.to_radians().cos();
        [east, north, self.alt_m - origin.alt_m]
    }

    /// Inverse of [`GeoPosition::enu_from`].
    pub fn from_enu(origin: &GeoPosition, enu: [f64; 3]) -> GeoPosition {
        let lat = origin.lat_deg + (enu[1] / EARTH_RADIUS_M).to_degrees();
        let lon = origin.lon_deg + (enu[0] / (EARTH_RADIUS_M * origin.lat_deg.to_radians().cos())).to_degrees();
        let lon = if lon > 180.0 { lon - 360.0 } else if lon <= -180.0 { lon + 360.0 } else { lon };
        GeoPosition { lat_deg: lat, lon_deg: lon, alt_m: origin.alt_m + enu[2] }
    }
}

/// Mean Earth radius.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enu_round_trip() {
        let o = GeoPosition { lat_deg: 59.3, lon_deg: 18.1, alt_m: 20.0 };
        let p = GeoPosition::from_enu(&o, [350.0, -1200.0, 80.0]);
        let e = p.enu_from(&o);
        assert!((e[0] - 350.0).abs() < 1e-6 && (e[1] + 1200.0).abs() < 1e-6 && (e[2] - 80.0).abs() < 1e-9);
    }

    #[test]
    fn report_validation() {
        let ok = DetectionReport::new(SensorId::Ircam, Timestamp(5), TargetClass::Drone, 0.9);
        assert!(ok.validate().is_ok());
        let bad_class = DetectionReport::new(SensorId::Audio, Timestamp(5), TargetClass::Airplane, 0.9);
        assert!(matches!(bad_class.validate(), Err(CoreError::ClassNotAllowed { .. })));
        let bad_conf = DetectionReport::new(SensorId::Vcam, Timestamp(5), TargetClass::Bird, 1.2);
        assert!(matches!(bad_conf.validate(), Err(CoreError::InvalidConfidence(_))));
        let fcam = DetectionReport::new(SensorId::Fcam, Timestamp(5), TargetClass::Drone, 0.5);
        assert!(fcam.validate().is_err());
    }

    #[test]
    fn geo_ranges() {
        assert!(GeoPosition::new(90.0, 180.0, 0.0).is_ok());
        assert!(GeoPosition::new(-90.0, -179.9, 0.0).is_ok());
        assert!(GeoPosition::new(10.0, -180.0, 0.0).is_err());
        assert!(GeoPosition::new(90.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn timestamp_arithmetic() {
        assert_eq!(Timestamp(1500).since(Timestamp(400)), 1100);
        assert_eq!(Timestamp(10).since(Timestamp(400)), 0);
        assert_eq!(Timestamp::from_secs_f64(1.25), Timestamp(1250));
        assert_eq!(Timestamp(100) - 200, Timestamp(0));
    }
}
