//! Fish-eye cueing channel.
//!
//! The fish-eye camera does not classify. It finds things that move:
//! a per-pixel Gaussian mixture background model yields a foreground mask,
//! connected components of the mask become blobs, and a constant-velocity
//! Kalman tracker follows the blobs from frame to frame. The confirmed track
//! with the longest history is the one handed to the platform.

mod blobs;
mod error;
mod frame;
mod gmm;
mod pipeline;
mod tracker;

pub use blobs::{extract_blobs, Blob};
pub use error::TrackerError;
pub use frame::{ForegroundMask, GrayFrame};
pub use gmm::{gmm_update, GmmModel, GmmParams};
pub use pipeline::{Cue, FcamChannel};
pub use tracker::{best_track, track_direction, Track, TrackerParams, Tracker};
