//! Pan/tilt platform control.
//!
//! The platform carries the IR and visible cameras. Each main-loop tick picks
//! one control source ([`arbitrate`]), moves the pose by a rate-limited
//! proportional step toward that source's offset ([`step_toward`]) or along
//! a search pattern ([`pattern_next`]), and maps the pose to servo pulse
//! widths ([`pose_to_pulse`]).

mod arbitration;
mod control;
mod error;
mod pattern;
mod pose;

pub use arbitration::{arbitrate, ControlSource, SourceTimes};
pub use control::{fcam_to_platform_offset, step_toward, ControllerParams, Platform, PlatformInputs, FISHEYE_MOUNT};
pub use error::PlatformError;
pub use pattern::{pattern_next, PatternCursor, SearchPattern, RASTER_TILT_STEP_DEG, SWEEP_TILT_DEG};
pub use pose::{pose_to_pulse, PlatformLimits, PlatformPose};
