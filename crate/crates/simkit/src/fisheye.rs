use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use skyfence_core::{CameraModel, SensorId, Timestamp};
use skyfence_fgtracker::GrayFrame;
use skyfence_platform::FISHEYE_MOUNT;

use crate::{project, sensor_rng, Scenario, SimError};

pub const SKY_LEVEL: f64 = 64.0;
pub const SKY_NOISE_SIGMA: f64 = 2.0;
pub const TARGET_LEVEL: u8 = 200;
/// Smallest disc radius drawn, so far targets still cover a few pixels.
pub const MIN_RADIUS_PX: f64 = 1.5;

/// Renders the fish-eye view at `t_s`: a flat noisy sky with every target in
/// view drawn as a bright filled disc of its projected width.
pub fn synth_fisheye_frame<R: Rng>(scn: &Scenario, t_s: f64, cam: &CameraModel, rng: &mut R) -> Result<GrayFrame, SimError> {
    let noise = Normal::new(SKY_LEVEL, SKY_NOISE_SIGMA).expect("positive sigma");
    let (w, h) = (cam.width_px, cam.height_px);
    let pixels: Vec<u8> = (0..w as usize * h as usize)
        .map(|_| noise.sample(rng).round().clamp(0.0, 255.0) as u8)
        .collect();
    let mut frame = GrayFrame::new(w, h, pixels)?;
    for (_, tg, pos) in scn.positions_at(t_s) {
        let Some(p) = project(pos, FISHEYE_MOUNT, cam, tg.width_m)? else { continue };
        let (cx, cy) = p.bbox.center();
        let r = (p.width_px / 2.0).max(MIN_RADIUS_PX);
        let x0 = (cx - r).floor().max(0.0) as u32;
        let y0 = (cy - r).floor().max(0.0) as u32;
        let x1 = ((cx + r).ceil() as u32).min(w);
        let y1 = ((cy + r).ceil() as u32).min(h);
        for y in y0..y1 {
            for x in x0..x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r {
                    frame.set(x, y, TARGET_LEVEL);
                }
            }
        }
    }
    Ok(frame)
}

/// Fish-eye frame stream at the configured rate.
#[derive(Debug, Clone)]
pub struct FisheyeSim {
    cam: CameraModel,
    fps: f64,
    next: u64,
    rng: ChaCha8Rng,
}

impl FisheyeSim {
    pub fn new(scn: &Scenario) -> Self {
        let s = &scn.sensors.fcam;
        FisheyeSim { cam: s.camera, fps: s.fps, next: 0, rng: sensor_rng(scn.seed, SensorId::Fcam) }
    }

    pub fn camera(&self) -> &CameraModel {
        &self.cam
    }

    pub fn frame_time(&self, index: u64) -> Timestamp {
        Timestamp((index as f64 * 1000.0 / self.fps).round() as u64)
    }

    pub fn next_due(&self, scn: &Scenario) -> Option<Timestamp> {
        let t = self.frame_time(self.next);
        (t.as_secs_f64() <= scn.duration_s).then_some(t)
    }

    /// The next frame and its time; the frame is `None` during a dropout.
    pub fn next_frame(&mut self, scn: &Scenario) -> Result<Option<(Timestamp, Option<GrayFrame>)>, SimError> {
        let Some(t) = self.next_due(scn) else { return Ok(None) };
        self.next += 1;
        let ts = t.as_secs_f64();
        if scn.in_dropout(SensorId::Fcam, ts) {
            return Ok(Some((t, None)));
        }
        Ok(Some((t, Some(synth_fisheye_frame(scn, ts, &self.cam, &mut self.rng)?))))
    }
}
