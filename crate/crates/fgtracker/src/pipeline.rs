use serde::{Deserialize, Serialize};

use skyfence_core::{AngularOffset, CameraModel};

use crate::{
    best_track, extract_blobs, track_direction, GmmModel, GmmParams, GrayFrame, Tracker, TrackerError,
    TrackerParams,
};

/// Direction of the best-tracked target, relative to the fish-eye boresight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cue {
    pub track_id: u64,
    pub offset: AngularOffset,
    pub age: u32,
}

/// Mask → blobs → tracks for one camera.
#[derive(Debug, Clone)]
pub struct FcamChannel {
    cam: CameraModel,
    gmm: GmmModel,
    tracker: Tracker,
    min_area: usize,
}

impl FcamChannel {
    pub const DEFAULT_MIN_AREA: usize = 4;

    pub fn new(cam: CameraModel, gmm: GmmParams, tracker: TrackerParams) -> Result<Self, TrackerError> {
        Ok(FcamChannel {
            cam,
            gmm: GmmModel::new(cam.width_px, cam.height_px, gmm)?,
            tracker: Tracker::new(tracker)?,
            min_area: Self::DEFAULT_MIN_AREA,
        })
    }

    pub fn with_min_area(mut self, min_area: usize) -> Self {
        self.min_area = min_area;
        self
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    pub fn process(&mut self, frame: &GrayFrame) -> Result<Option<Cue>, TrackerError> {
        let mask = self.gmm.update(frame)?;
        let blobs = extract_blobs(&mask, self.min_area);
        self.tracker.step(&blobs);
        let Some(id) = best_track(self.tracker.tracks()) else {
            return Ok(None);
        };
        let track = self.tracker.tracks().iter().find(|t| t.id == id).expect("best track exists");
        // a coasting track can drift off the image; no cue then
        match track_direction(track, &self.cam) {
            Ok(offset) => Ok(Some(Cue { track_id: id, offset, age: track.age })),
            Err(TrackerError::Geometry(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}
