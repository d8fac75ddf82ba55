use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlatformError {
    #[error("pose (pan {pan_deg}°, tilt {tilt_deg}°) is outside the platform limits")]
    OutOfLimits { pan_deg: f64, tilt_deg: f64 },
    #[error("invalid controller parameters: {0}")]
    InvalidParams(String),
}
