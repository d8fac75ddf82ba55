//! Shared vocabulary for the skyfence engine.
//!
//! Everything here is a plain value type: target classes and the sensors that
//! may emit them, engine timestamps, camera geometry and the detection report
//! that flows from the workers to the main loop.

mod class;
mod dri;
mod error;
mod geometry;
mod report;

pub use class::{class_allowed, SensorId, TargetClass, CLASSIFYING_SENSORS, FUSABLE_CLASSES};
pub use dri::{bin_of_width, DriBin};
pub use error::CoreError;
pub use geometry::{offset_to_pixel, pixel_to_offset, AngularOffset, BoundingBox, CameraModel};
pub use report::{DetectionReport, GeoPosition, Timestamp, EARTH_RADIUS_M};
