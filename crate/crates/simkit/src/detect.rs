use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use skyfence_core::{
    offset_to_pixel, pixel_to_offset, BoundingBox, CameraModel, DetectionReport, SensorId, TargetClass, Timestamp,
};
use skyfence_platform::PlatformPose;

use crate::{project, sensor_rng, BetaParams, DetectorProfile, Projection, Scenario, SimError};

/// A target inside a camera's field of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibleTarget {
    /// Index into `Scenario::targets`.
    pub target: usize,
    pub class: TargetClass,
    pub projection: Projection,
}

impl VisibleTarget {
    /// Ground-truth box as it appears in the image.
    pub fn bbox(&self, cam: &CameraModel) -> BoundingBox {
        self.projection.bbox.clamp_to(cam)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectionKind {
    /// Correct label on a real target.
    True { target: usize },
    /// Wrong label on a real target.
    Confusion { target: usize },
    /// Report on empty sky.
    Phantom,
    /// Scripted clutter event.
    Clutter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDetection {
    pub report: DetectionReport,
    pub kind: DetectionKind,
}

/// Targets visible to `cam` pointed at `pose` at time `t_s`. Drones past
/// `max_drone_range_m` are left out.
pub fn visible_targets(scn: &Scenario, t_s: f64, pose: PlatformPose, cam: &CameraModel) -> Result<Vec<VisibleTarget>, SimError> {
    let mut out = Vec::new();
    for (i, tg, pos) in scn.positions_at(t_s) {
        let Some(p) = project(pos, pose, cam, tg.width_m)? else { continue };
        if tg.class == TargetClass::Drone && p.range_m > scn.max_drone_range_m {
            continue;
        }
        if p.bbox.clamp_to(cam).area() <= 0.0 {
            continue;
        }
        out.push(VisibleTarget { target: i, class: tg.class, projection: p });
    }
    Ok(out)
}

fn confidence(rng: &mut ChaCha8Rng, p: BetaParams) -> f64 {
    let beta = Beta::new(p.alpha, p.beta).expect("validated beta parameters");
    0.5 + 0.5 * beta.sample(rng)
}

/// Moves the centre and scales the size by up to ±5 % of the width.
fn jitter(rng: &mut ChaCha8Rng, b: &BoundingBox) -> BoundingBox {
    let (cx, cy) = b.center();
    let j = 0.05 * b.w;
    let s = 1.0 + rng.random_range(-0.05..=0.05);
    BoundingBox::centered(cx + rng.random_range(-j..=j), cy + rng.random_range(-j..=j), b.w * s, b.h * s)
}

fn report(sensor: SensorId, t: Timestamp, label: TargetClass, conf: f64, bbox: BoundingBox, cam: &CameraModel) -> DetectionReport {
    let bbox = bbox.clamp_to(cam);
    let (cx, cy) = bbox.center();
    let offset = pixel_to_offset(cam, cx, cy).expect("clamped centre is inside the image");
    DetectionReport::new(sensor, t, label, conf.clamp(0.0, 1.0)).with_offset(offset).with_bbox(bbox)
}

/// Draws one frame's detector output.
///
/// Each visible target is reported with its true class with probability R.
/// False reports for each (class, bin) follow a Poisson law with mean
/// `n·R·(1-P)/P`, `n` being the number of visible targets of that class in
/// that bin, so that precision converges to P.
pub fn sample_detections(
    profile: &DetectorProfile,
    cam: &CameraModel,
    visible: &[VisibleTarget],
    rng: &mut ChaCha8Rng,
    t: Timestamp,
) -> Result<Vec<SimDetection>, SimError> {
    let sensor = profile.sensor;
    let mut out = Vec::new();
    for v in visible {
        let cell = profile.cell(v.class, v.projection.bin)?;
        if rng.random_bool(cell.recall) {
            let b = jitter(rng, &v.projection.bbox);
            let c = confidence(rng, profile.confidence);
            out.push(SimDetection { report: report(sensor, t, v.class, c, b, cam), kind: DetectionKind::True { target: v.target } });
        }
    }

    let mut groups: Vec<(TargetClass, skyfence_core::DriBin, Vec<&VisibleTarget>)> = Vec::new();
    for v in visible {
        match groups.iter_mut().find(|g| g.0 == v.class && g.1 == v.projection.bin) {
            Some(g) => g.2.push(v),
            None => groups.push((v.class, v.projection.bin, vec![v])),
        }
    }
    let truth: Vec<BoundingBox> = visible.iter().map(|v| v.bbox(cam)).collect();
    let fconf = profile.false_confidence.unwrap_or(profile.confidence);
    for (class, bin, members) in &groups {
        let cell = profile.cell(*class, *bin)?;
        let lambda = members.len() as f64 * cell.recall * (1.0 - cell.precision) / cell.precision;
        if lambda <= 0.0 {
            continue;
        }
        let k = Poisson::new(lambda).expect("positive rate").sample(rng) as usize;
        for _ in 0..k {
            let others: Vec<&VisibleTarget> =
                visible.iter().filter(|v| v.class != *class && v.projection.bin == *bin).collect();
            let c = confidence(rng, fconf);
            if !others.is_empty() && rng.random_bool(profile.confusion_fraction) {
                let o = others[rng.random_range(0..others.len())];
                let b = jitter(rng, &o.projection.bbox);
                out.push(SimDetection { report: report(sensor, t, *class, c, b, cam), kind: DetectionKind::Confusion { target: o.target } });
            } else {
                let src = members[rng.random_range(0..members.len())];
                let b = phantom_box(rng, cam, &src.projection.bbox, &truth);
                out.push(SimDetection { report: report(sensor, t, *class, c, b, cam), kind: DetectionKind::Phantom });
            }
        }
    }
    Ok(out)
}

/// A box the size of `like`, inside the image and overlapping no truth box
/// by more than 0.1 IoU where that is achievable.
fn phantom_box(rng: &mut ChaCha8Rng, cam: &CameraModel, like: &BoundingBox, truth: &[BoundingBox]) -> BoundingBox {
    let (iw, ih) = (f64::from(cam.width_px), f64::from(cam.height_px));
    let s = 1.0 + rng.random_range(-0.05..=0.05);
    let (w, h) = ((like.w * s).min(iw), (like.h * s).min(ih));
    let mut b = BoundingBox::new(0.0, 0.0, w, h);
    for _ in 0..64 {
        b = BoundingBox::new(rng.random_range(0.0..=iw - w), rng.random_range(0.0..=ih - h), w, h);
        if truth.iter().all(|t| t.iou(&b) < 0.1) {
            break;
        }
    }
    b
}

/// One camera frame from the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraFrame {
    pub sensor: SensorId,
    pub index: u64,
    pub t: Timestamp,
    pub pose: PlatformPose,
    /// The sensor was in a dropout; `detections` is empty.
    pub dropped: bool,
    pub truth: Vec<VisibleTarget>,
    pub detections: Vec<SimDetection>,
}

/// Frame-by-frame detector output of the thermal or visible camera.
#[derive(Debug, Clone)]
pub struct CameraSim {
    sensor: SensorId,
    cam: CameraModel,
    fps: f64,
    next: u64,
    rng: ChaCha8Rng,
}

impl CameraSim {
    pub fn new(scn: &Scenario, sensor: SensorId) -> Result<Self, SimError> {
        let spec = match sensor {
            SensorId::Ircam | SensorId::Vcam => scn.sensors.camera(sensor).expect("platform camera"),
            other => return Err(SimError::InvalidScenario(format!("{other} is not a platform camera"))),
        };
        Ok(CameraSim { sensor, cam: spec.camera, fps: spec.fps, next: 0, rng: sensor_rng(scn.seed, sensor) })
    }

    pub fn sensor(&self) -> SensorId {
        self.sensor
    }

    pub fn camera(&self) -> &CameraModel {
        &self.cam
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frame_time(&self, index: u64) -> Timestamp {
        Timestamp((index as f64 * 1000.0 / self.fps).round() as u64)
    }

    /// Time of the next frame, or `None` past the end of the scenario.
    pub fn next_due(&self, scn: &Scenario) -> Option<Timestamp> {
        let t = self.frame_time(self.next);
        (t.as_secs_f64() <= scn.duration_s).then_some(t)
    }

    pub fn next_frame(&mut self, scn: &Scenario, pose: PlatformPose) -> Result<Option<CameraFrame>, SimError> {
        let Some(t) = self.next_due(scn) else { return Ok(None) };
        let index = self.next;
        self.next += 1;
        let ts = t.as_secs_f64();
        let truth = visible_targets(scn, ts, pose, &self.cam)?;
        let dropped = scn.in_dropout(self.sensor, ts);
        let mut detections = Vec::new();
        if !dropped {
            let profile = scn.detectors.get(self.sensor).expect("platform camera profile");
            detections = sample_detections(profile, &self.cam, &truth, &mut self.rng, t)?;
            for ev in scn.clutter.iter().filter(|c| c.sensor == self.sensor && c.active(ts)) {
                let Ok((cx, cy)) = offset_to_pixel(&self.cam, ev.offset) else { continue };
                let b = BoundingBox::centered(cx, cy, 8.0, 8.0);
                detections.push(SimDetection {
                    report: report(self.sensor, t, ev.label, ev.confidence, b, &self.cam),
                    kind: DetectionKind::Clutter,
                });
            }
            for d in &mut detections {
                d.report.worker_fps = self.fps;
            }
        }
        Ok(Some(CameraFrame { sensor: self.sensor, index, t, pose, dropped, truth, detections }))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use skyfence_core::DriBin;

    use super::*;
    use crate::{presets, SimTarget};

    fn one_target(class: TargetClass, bin_width_px: f64) -> (Scenario, Vec<VisibleTarget>) {
        let cam = CameraModel::ircam();
        let r = crate::range_for_width(0.4, bin_width_px, &cam);
        let mut s = Scenario::new("t", 10.0, 1);
        s.initial_pose = PlatformPose::new(0.0, 0.0);
        s.targets.push(SimTarget::stationary(class, 0.4, [0.0, r, 0.0], 10.0));
        let v = visible_targets(&s, 1.0, s.initial_pose, &cam).unwrap();
        (s, v)
    }

    #[test]
    fn perfect_detector_is_exact() {
        let (_, v) = one_target(TargetClass::Drone, 20.0);
        let p = DetectorProfile::uniform(SensorId::Ircam, 1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in 0..500 {
            let d = sample_detections(&p, &CameraModel::ircam(), &v, &mut rng, Timestamp(f)).unwrap();
            assert_eq!(d.len(), 1);
            assert_eq!(d[0].kind, DetectionKind::True { target: 0 });
            assert_eq!(d[0].report.label, TargetClass::Drone);
            assert!(d[0].report.confidence >= 0.5);
            assert!(d[0].report.bbox.unwrap().iou(&v[0].bbox(&CameraModel::ircam())) > 0.8);
        }
    }

    #[test]
    fn zero_recall_never_reports_truth() {
        let (_, v) = one_target(TargetClass::Bird, 9.0);
        assert_eq!(v[0].projection.bin, DriBin::Medium);
        let p = DetectorProfile::uniform(SensorId::Ircam, 0.5, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for f in 0..2000 {
            assert!(sample_detections(&p, &CameraModel::ircam(), &v, &mut rng, Timestamp(f)).unwrap().is_empty());
        }
    }

    #[test]
    fn missing_cell_errors() {
        let (_, v) = one_target(TargetClass::Drone, 3.0);
        let mut p = DetectorProfile::ircam_default();
        p.cells.retain(|c| c.bin != DriBin::Distant);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(
            sample_detections(&p, &CameraModel::ircam(), &v, &mut rng, Timestamp(0)),
            Err(SimError::MissingProfile { .. })
        ));
    }

    #[test]
    fn drone_beyond_range_is_invisible() {
        let mut s = Scenario::new("t", 1.0, 0);
        s.initial_pose = PlatformPose::new(0.0, 0.0);
        s.targets.push(SimTarget::stationary(TargetClass::Drone, 2.0, [0.0, 250.0, 0.0], 1.0));
        s.targets.push(SimTarget::stationary(TargetClass::Bird, 2.0, [0.0, 250.0, 0.0], 1.0));
        let v = visible_targets(&s, 0.5, s.initial_pose, &CameraModel::ircam()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].class, TargetClass::Bird);
    }

    #[test]
    fn frame_clock_and_dropouts() {
        let mut s = presets::persistence(7);
        s.dropouts.retain(|d| d.sensor == SensorId::Ircam);
        let mut cam = CameraSim::new(&s, SensorId::Ircam).unwrap();
        assert_eq!(cam.frame_time(1), Timestamp(17));
        assert_eq!(cam.frame_time(60), Timestamp(1000));
        let mut n = 0;
        while let Some(f) = cam.next_frame(&s, s.initial_pose).unwrap() {
            if f.dropped {
                assert!(f.detections.is_empty());
                assert!(s.in_dropout(SensorId::Ircam, f.t.as_secs_f64()));
            }
            n += 1;
        }
        assert_eq!(n as f64, (s.duration_s * 60.0).floor() + 1.0);
        assert!(CameraSim::new(&s, SensorId::Audio).is_err());
    }

    #[test]
    fn clutter_shows_only_on_its_sensor() {
        let s = presets::clutter_only(11);
        for sensor in [SensorId::Ircam, SensorId::Vcam] {
            let mut cam = CameraSim::new(&s, sensor).unwrap();
            while let Some(f) = cam.next_frame(&s, s.initial_pose).unwrap() {
                let ts = f.t.as_secs_f64();
                let expected = s.clutter.iter().filter(|c| c.sensor == sensor && c.active(ts)).count();
                assert_eq!(f.detections.len(), expected);
                assert!(f.detections.iter().all(|d| d.kind == DetectionKind::Clutter && d.report.sensor == sensor));
            }
        }
    }
}
