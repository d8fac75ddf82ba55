use thiserror::Error;

use crate::{SensorId, TargetClass};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("invalid camera model: {0}")]
    InvalidCamera(String),
    #[error("pixel ({x}, {y}) lies outside the {width}x{height} image")]
    OutsideImage { x: f64, y: f64, width: u32, height: u32 },
    #[error("offset ({azimuth_deg}°, {elevation_deg}°) lies outside the camera field of view")]
    OutsideFieldOfView { azimuth_deg: f64, elevation_deg: f64 },
    #[error("sensor {sensor} cannot emit class {label}")]
    ClassNotAllowed { sensor: SensorId, label: TargetClass },
    #[error("confidence {0} outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("geographic position out of range: lat {lat_deg}, lon {lon_deg}")]
    InvalidPosition { lat_deg: f64, lon_deg: f64 },
}
