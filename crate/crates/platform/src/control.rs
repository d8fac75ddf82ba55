use serde::{Deserialize, Serialize};
use skyfence_core::{AngularOffset, Timestamp};

use crate::{arbitrate, pattern_next, ControlSource, PatternCursor, PlatformError, PlatformLimits, PlatformPose, SearchPattern, SourceTimes};

/// Boresight of the fixed fish-eye camera in platform coordinates.
pub const FISHEYE_MOUNT: PlatformPose = PlatformPose { pan_deg: 0.0, tilt_deg: 45.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerParams {
    /// Proportional gain, in (0, 1].
    pub k: f64,
    pub max_rate_deg_s: f64,
    /// A camera keeps control for this long after its latest report.
    pub hold_ms: u64,
    pub idle_to_search_ms: u64,
    /// A manual slew keeps control for this long.
    pub manual_timeout_ms: u64,
    pub pattern: SearchPattern,
    pub limits: PlatformLimits,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            k: 0.5,
            max_rate_deg_s: 60.0,
            hold_ms: 1000,
            idle_to_search_ms: 5000,
            manual_timeout_ms: 10_000,
            pattern: SearchPattern::Raster,
            limits: PlatformLimits::default(),
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<(), PlatformError> {
        if !(self.k > 0.0 && self.k <= 1.0) {
            return Err(PlatformError::InvalidParams(format!("k = {} not in (0, 1]", self.k)));
        }
        if !(self.max_rate_deg_s > 0.0) {
            return Err(PlatformError::InvalidParams("max_rate must be positive".into()));
        }
        let l = &self.limits;
        if !(l.pan_min_deg < l.pan_max_deg && l.tilt_min_deg < l.tilt_max_deg) {
            return Err(PlatformError::InvalidParams("empty motion limits".into()));
        }
        Ok(())
    }
}

/// Proportional step toward `offset`, at most `max_rate · dt` per axis,
/// clamped to the motion limits.
pub fn step_toward(pose: PlatformPose, offset: AngularOffset, dt_s: f64, p: &ControllerParams) -> PlatformPose {
    let cap = p.max_rate_deg_s * dt_s;
    let d = |e: f64| (p.k * e).clamp(-cap, cap);
    p.limits.clamp(PlatformPose {
        pan_deg: pose.pan_deg + d(offset.azimuth_deg),
        tilt_deg: pose.tilt_deg + d(offset.elevation_deg),
    })
}

/// Re-expresses a fish-eye cue (relative to the fixed fish-eye boresight)
/// as an offset from the platform's current pose.
pub fn fcam_to_platform_offset(cue: AngularOffset, pose: PlatformPose) -> AngularOffset {
    AngularOffset {
        azimuth_deg: FISHEYE_MOUNT.pan_deg + cue.azimuth_deg - pose.pan_deg,
        elevation_deg: FISHEYE_MOUNT.tilt_deg + cue.elevation_deg - pose.tilt_deg,
    }
}

/// Latest inputs seen by the main loop.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlatformInputs {
    pub times: SourceTimes,
    /// Offsets from the platform cameras' boresight.
    pub ircam: Option<AngularOffset>,
    pub vcam: Option<AngularOffset>,
    /// Offset from the fish-eye boresight.
    pub fcam: Option<AngularOffset>,
    pub manual_target: Option<PlatformPose>,
}

/// Pose state owned by the main loop.
#[derive(Debug, Clone)]
pub struct Platform {
    pose: PlatformPose,
    params: ControllerParams,
    cursor: PatternCursor,
    source: ControlSource,
}

impl Platform {
    pub fn new(pose: PlatformPose, params: ControllerParams) -> Result<Self, PlatformError> {
        params.validate()?;
        let pose = params.limits.clamp(pose);
        Ok(Platform { pose, params, cursor: PatternCursor::new(params.pattern, pose, &params), source: ControlSource::Hold })
    }

    pub fn pose(&self) -> PlatformPose {
        self.pose
    }

    pub fn source(&self) -> ControlSource {
        self.source
    }

    pub fn params(&self) -> &ControllerParams {
        &self.params
    }

    pub fn set_pattern(&mut self, pattern: SearchPattern) {
        self.params.pattern = pattern;
        self.cursor = PatternCursor::new(pattern, self.pose, &self.params);
    }

    pub fn pulses(&self) -> (f64, f64) {
        crate::pose_to_pulse(self.pose, &self.params.limits).expect("pose kept within limits")
    }

    /// One control tick of length `dt_s`.
    pub fn tick(&mut self, now: Timestamp, dt_s: f64, inputs: &PlatformInputs) -> ControlSource {
        let src = arbitrate(&inputs.times, now, &self.params);
        if src == ControlSource::Pattern && self.source != ControlSource::Pattern {
            self.cursor = PatternCursor::new(self.params.pattern, self.pose, &self.params);
        }
        let zero = AngularOffset::default();
        self.pose = match src {
            ControlSource::Ircam => step_toward(self.pose, inputs.ircam.unwrap_or(zero), dt_s, &self.params),
            ControlSource::Vcam => step_toward(self.pose, inputs.vcam.unwrap_or(zero), dt_s, &self.params),
            ControlSource::Fcam => {
                let off = inputs.fcam.map_or(zero, |c| fcam_to_platform_offset(c, self.pose));
                step_toward(self.pose, off, dt_s, &self.params)
            }
            ControlSource::Manual => {
                let off = inputs.manual_target.map_or(zero, |t| AngularOffset {
                    azimuth_deg: t.pan_deg - self.pose.pan_deg,
                    elevation_deg: t.tilt_deg - self.pose.tilt_deg,
                });
                step_toward(self.pose, off, dt_s, &self.params)
            }
            ControlSource::Pattern => pattern_next(&mut self.cursor, self.pose, dt_s, &self.params),
            ControlSource::Hold => self.pose,
        };
        self.source = src;
        src
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_offset_keeps_pose() {
        let p = ControllerParams::default();
        let pose = PlatformPose::new(12.0, 30.0);
        assert_eq!(step_toward(pose, AngularOffset::new(0.0, 0.0), 0.1, &p), pose);
    }

    #[test]
    fn proportional_step() {
        let p = ControllerParams::default();
        let next = step_toward(PlatformPose::new(0.0, 10.0), AngularOffset::new(4.0, 0.0), 10.0, &p);
        assert_eq!(next, PlatformPose::new(2.0, 10.0));
    }

    #[test]
    fn clamped_at_limit() {
        let p = ControllerParams::default();
        let next = step_toward(PlatformPose::new(90.0, 10.0), AngularOffset::new(10.0, 0.0), 1.0, &p);
        assert_eq!(next.pan_deg, 90.0);
    }

    #[test]
    fn rate_limited() {
        let p = ControllerParams::default();
        let next = step_toward(PlatformPose::new(0.0, 45.0), AngularOffset::new(80.0, -80.0), 0.1, &p);
        assert!((next.pan_deg - 6.0).abs() < 1e-12);
        assert!((next.tilt_deg - 39.0).abs() < 1e-12);
    }

    #[test]
    fn fcam_cue_relative_to_mount() {
        let off = fcam_to_platform_offset(AngularOffset::new(10.0, -5.0), PlatformPose::new(4.0, 30.0));
        assert_eq!(off, AngularOffset::new(6.0, 10.0));
    }

    #[test]
    fn params_validated() {
        assert!(ControllerParams { k: 0.0, ..Default::default() }.validate().is_err());
        assert!(ControllerParams { k: 1.5, ..Default::default() }.validate().is_err());
        assert!(ControllerParams { max_rate_deg_s: 0.0, ..Default::default() }.validate().is_err());
    }
}
