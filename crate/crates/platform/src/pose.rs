use serde::{Deserialize, Serialize};

use crate::PlatformError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlatformPose {
    pub pan_deg: f64,
    pub tilt_deg: f64,
}

impl PlatformPose {
    pub fn new(pan_deg: f64, tilt_deg: f64) -> Self {
        PlatformPose { pan_deg, tilt_deg }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlatformLimits {
    pub pan_min_deg: f64,
    pub pan_max_deg: f64,
    pub tilt_min_deg: f64,
    pub tilt_max_deg: f64,
}

impl Default for PlatformLimits {
    fn default() -> Self {
        PlatformLimits { pan_min_deg: -90.0, pan_max_deg: 90.0, tilt_min_deg: 0.0, tilt_max_deg: 90.0 }
    }
}

impl PlatformLimits {
    pub fn contains(&self, p: PlatformPose) -> bool {
        (self.pan_min_deg..=self.pan_max_deg).contains(&p.pan_deg)
            && (self.tilt_min_deg..=self.tilt_max_deg).contains(&p.tilt_deg)
    }

    pub fn clamp(&self, p: PlatformPose) -> PlatformPose {
        PlatformPose {
            pan_deg: p.pan_deg.clamp(self.pan_min_deg, self.pan_max_deg),
            tilt_deg: p.tilt_deg.clamp(self.tilt_min_deg, self.tilt_max_deg),
        }
    }
}

/// Servo pulse widths in microseconds: each axis maps linearly from its
/// lower limit (1000 µs) to its upper limit (2000 µs).
pub fn pose_to_pulse(pose: PlatformPose, limits: &PlatformLimits) -> Result<(f64, f64), PlatformError> {
    if !limits.contains(pose) {
        return Err(PlatformError::OutOfLimits { pan_deg: pose.pan_deg, tilt_deg: pose.tilt_deg });
    }
    let map = |v: f64, lo: f64, hi: f64| 1000.0 + 1000.0 * (v - lo) / (hi - lo);
    Ok((
        map(pose.pan_deg, limits.pan_min_deg, limits.pan_max_deg),
        map(pose.tilt_deg, limits.tilt_min_deg, limits.tilt_max_deg),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_endpoints_and_midpoint() {
        let l = PlatformLimits::default();
        assert_eq!(pose_to_pulse(PlatformPose::new(0.0, 45.0), &l).unwrap(), (1500.0, 1500.0));
        assert_eq!(pose_to_pulse(PlatformPose::new(-90.0, 0.0), &l).unwrap(), (1000.0, 1000.0));
        assert_eq!(pose_to_pulse(PlatformPose::new(90.0, 90.0), &l).unwrap(), (2000.0, 2000.0));
    }

    #[test]
    fn pulse_rejects_out_of_limits() {
        let l = PlatformLimits::default();
        assert!(pose_to_pulse(PlatformPose::new(91.0, 0.0), &l).is_err());
        assert!(pose_to_pulse(PlatformPose::new(0.0, -1.0), &l).is_err());
    }
}
