use serde::{Deserialize, Serialize};

use crate::{ControllerParams, PlatformPose};

pub const RASTER_TILT_STEP_DEG: f64 = 15.0;
pub const SWEEP_TILT_DEG: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchPattern {
    /// Pan from limit to limit, stepping tilt by 15° at each end.
    #[default]
    Raster,
    /// Pan from limit to limit at a fixed 20° tilt.
    Sweep,
    /// No search: the platform holds its pose.
    Off,
}

/// Progress through a search pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternCursor {
    pub pattern: SearchPattern,
    /// +1 moving toward the upper pan limit, -1 toward the lower.
    pub pan_dir: f64,
    pub tilt_dir: f64,
    /// Tilt of the current leg; the pan does not move until it is reached.
    pub leg_tilt: f64,
}

impl PatternCursor {
    pub fn new(pattern: SearchPattern, pose: PlatformPose, p: &ControllerParams) -> Self {
        let l = &p.limits;
        let leg_tilt = match pattern {
            SearchPattern::Raster => {
                let steps = ((pose.tilt_deg - l.tilt_min_deg) / RASTER_TILT_STEP_DEG).round();
                (l.tilt_min_deg + steps * RASTER_TILT_STEP_DEG).clamp(l.tilt_min_deg, l.tilt_max_deg)
            }
            SearchPattern::Sweep => SWEEP_TILT_DEG.clamp(l.tilt_min_deg, l.tilt_max_deg),
            SearchPattern::Off => pose.tilt_deg,
        };
        PatternCursor { pattern, pan_dir: 1.0, tilt_dir: 1.0, leg_tilt }
    }
}

fn approach(from: f64, to: f64, max_step: f64) -> f64 {
    from + (to - from).clamp(-max_step, max_step)
}

/// Advances the pattern by `dt_s` at the rate limit. Tilt moves first (pan
/// holds) until it reaches the leg's tilt; then pan runs to the next limit,
/// where the pan direction reverses and, for raster, the next leg's tilt is
/// one step further (bouncing between the tilt limits).
pub fn pattern_next(cursor: &mut PatternCursor, pose: PlatformPose, dt_s: f64, p: &ControllerParams) -> PlatformPose {
    let l = &p.limits;
    let pose = l.clamp(pose);
    if cursor.pattern == SearchPattern::Off {
        return pose;
    }
    let step = p.max_rate_deg_s * dt_s;
    if (pose.tilt_deg - cursor.leg_tilt).abs() > 1e-9 {
        return PlatformPose { pan_deg: pose.pan_deg, tilt_deg: approach(pose.tilt_deg, cursor.leg_tilt, step) };
    }
    let target = if cursor.pan_dir > 0.0 { l.pan_max_deg } else { l.pan_min_deg };
    let pan = approach(pose.pan_deg, target, step);
    if pan == target {
        cursor.pan_dir = -cursor.pan_dir;
        if cursor.pattern == SearchPattern::Raster {
            let mut next = cursor.leg_tilt + RASTER_TILT_STEP_DEG * cursor.tilt_dir;
            if next > l.tilt_max_deg + 1e-9 || next < l.tilt_min_deg - 1e-9 {
                cursor.tilt_dir = -cursor.tilt_dir;
                next = cursor.leg_tilt + RASTER_TILT_STEP_DEG * cursor.tilt_dir;
            }
            cursor.leg_tilt = next.clamp(l.tilt_min_deg, l.tilt_max_deg);
        }
    }
    PlatformPose { pan_deg: pan, tilt_deg: pose.tilt_deg }
}
