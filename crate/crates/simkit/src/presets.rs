//! Ready-made scenarios used by the tests, the examples and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skyfence_core::{AngularOffset, CameraModel, DriBin, SensorId, TargetClass};
use skyfence_platform::PlatformPose;

use crate::{
    range_for_width, unit_vector, AdsbIdentity, ClutterEvent, ClutterKind, DetectorProfile, Dropout, Scenario,
    SimTarget, Waypoint,
};

/// Gap between consecutive clutter events, longer than the fusion window.
pub const CLUTTER_GAP_S: (f64, f64) = (1.5, 3.0);

/// Quarter-resolution fish-eye, enough for the cues the presets need at a
/// sixteenth of the background-model cost.
pub const SMALL_FISHEYE: CameraModel = CameraModel { width_px: 256, height_px: 192, hfov_deg: 180.0, vfov_deg: 90.0 };

fn preset_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1000 + stream);
    rng
}

fn at(az_deg: f64, el_deg: f64, range_m: f64) -> [f64; 3] {
    unit_vector(az_deg, el_deg).map(|c| c * range_m)
}

/// No targets at all; only single-sensor insect and cloud-edge clutter on
/// the thermal and visible cameras, never two events at once.
pub fn clutter_only(seed: u64) -> Scenario {
    let mut s = Scenario::new("clutter_only", 120.0, seed);
    s.sensors.fcam.camera = SMALL_FISHEYE;
    s.sensors.adsb.enabled = false;
    let mut rng = preset_rng(seed, 1);
    let labels = [TargetClass::Airplane, TargetClass::Bird, TargetClass::Drone, TargetClass::Helicopter];
    let mut t = 1.0;
    loop {
        let sensor = if rng.random_bool(0.5) { SensorId::Ircam } else { SensorId::Vcam };
        let fps = s.sensors.camera(sensor).expect("camera").fps;
        let (kind, duration_s) = if rng.random_bool(0.6) {
            (ClutterKind::Insect, f64::from(rng.random_range(1u32..=3)) / fps)
        } else {
            (ClutterKind::CloudEdge, rng.random_range(1.0..=10.0))
        };
        if t + duration_s > s.duration_s {
            break;
        }
        s.clutter.push(ClutterEvent {
            kind,
            sensor,
            start_s: t,
            duration_s,
            label: labels[rng.random_range(0..labels.len())],
            confidence: rng.random_range(0.55..0.95),
            offset: AngularOffset::new(rng.random_range(-10.0..10.0), rng.random_range(-8.0..8.0)),
        });
        t += duration_s + rng.random_range(CLUTTER_GAP_S.0..CLUTTER_GAP_S.1);
    }
    s
}

/// A drone hovering on the platform boresight while the thermal and visible
/// streams take turns dropping out for 0.8 s.
pub fn persistence(seed: u64) -> Scenario {
    let mut s = Scenario::new("persistence", 30.0, seed);
    s.sensors.audio.enabled = false;
    s.sensors.adsb.enabled = false;
    s.initial_pose = PlatformPose::new(0.0, 20.0);
    let r = range_for_width(SimTarget::DRONE_LARGE_M, 9.0, &CameraModel::ircam());
    s.targets.push(SimTarget::stationary(TargetClass::Drone, SimTarget::DRONE_LARGE_M, at(0.0, 20.0, r), s.duration_s));
    let mut t = 2.0;
    while t + 2.0 < s.duration_s {
        s.dropouts.push(Dropout { sensor: SensorId::Ircam, start_s: t, duration_s: 0.8 });
        s.dropouts.push(Dropout { sensor: SensorId::Vcam, start_s: t + 1.1, duration_s: 0.8 });
        t += 2.5;
    }
    s
}

/// Where [`slew`] places its drone.
pub const SLEW_TARGET: PlatformPose = PlatformPose { pan_deg: 8.0, tilt_deg: 23.0 };

/// A static drone 8° right of and 3° above the initial boresight, seen by
/// detectors that never report empty sky.
pub fn slew(seed: u64) -> Scenario {
    let mut s = Scenario::new("slew", 10.0, seed);
    s.sensors.fcam.camera = SMALL_FISHEYE;
    s.sensors.audio.enabled = false;
    s.sensors.adsb.enabled = false;
    s.initial_pose = PlatformPose::new(0.0, 20.0);
    s.targets.push(SimTarget::stationary(
        TargetClass::Drone,
        SimTarget::DRONE_LARGE_M,
        at(SLEW_TARGET.pan_deg, SLEW_TARGET.tilt_deg, 40.0),
        s.duration_s,
    ));
    s.detectors.ircam = DetectorProfile::uniform(SensorId::Ircam, 1.0, 0.9);
    s.detectors.vcam = DetectorProfile::uniform(SensorId::Vcam, 1.0, 0.9);
    s
}

/// One target of each class side by side at the range that puts all of them
/// in `bin`, held for `frames` thermal frames and as many visible frames.
pub fn calibration(bin: DriBin, frames: u32, seed: u64) -> Scenario {
    let fps = Scenario::new("", 1.0, 0).sensors.vcam.fps;
    let duration = f64::from(frames) / fps;
    let mut s = Scenario::new(&format!("calibration_{bin}"), duration, seed);
    s.sensors.audio.enabled = false;
    s.sensors.adsb.enabled = false;
    s.sensors.gps.enabled = false;
    s.sensors.fcam.enabled = false;
    s.initial_pose = PlatformPose::new(0.0, 0.0);
    let px = match bin {
        DriBin::Close => 20.0,
        DriBin::Medium => 9.0,
        DriBin::Distant => 3.0,
    };
    let ir = CameraModel::ircam();
    let layout = [
        (TargetClass::Airplane, 30.0, -8.0),
        (TargetClass::Bird, 0.5, -3.0),
        (TargetClass::Drone, SimTarget::DRONE_LARGE_M, 3.0),
        (TargetClass::Helicopter, 12.0, 8.0),
    ];
    for (class, width, az) in layout {
        let r = range_for_width(width, px, &ir);
        s.targets.push(SimTarget::stationary(class, width, at(az, 0.0, r), duration));
    }
    s
}

/// A minute of mixed traffic: a drone crossing close in, a bird, a
/// helicopter and an airliner with a transponder.
pub fn demo(seed: u64) -> Scenario {
    let mut s = Scenario::new("demo", 60.0, seed);
    s.sensors.fcam.camera = SMALL_FISHEYE;
    s.targets.push(SimTarget {
        class: TargetClass::Drone,
        width_m: SimTarget::DRONE_MEDIUM_M,
        waypoints: vec![
            Waypoint::new(2.0, -60.0, 50.0, 20.0),
            Waypoint::new(30.0, 10.0, 45.0, 25.0),
            Waypoint::new(58.0, 60.0, 70.0, 30.0),
        ],
        adsb: None,
    });
    s.targets.push(SimTarget {
        class: TargetClass::Bird,
        width_m: 0.6,
        waypoints: vec![Waypoint::new(0.0, 40.0, 80.0, 15.0), Waypoint::new(25.0, -20.0, 90.0, 18.0)],
        adsb: None,
    });
    s.targets.push(SimTarget {
        class: TargetClass::Helicopter,
        width_m: 11.0,
        waypoints: vec![Waypoint::new(20.0, 800.0, 600.0, 200.0), Waypoint::new(60.0, -400.0, 700.0, 220.0)],
        adsb: Some(AdsbIdentity { icao: "4ac9e1".into(), typecode: 4, category: 7, callsign: "HEMS01".into() }),
    });
    s.targets.push(SimTarget {
        class: TargetClass::Airplane,
        width_m: 34.0,
        waypoints: vec![Waypoint::new(0.0, -6000.0, 4000.0, 1200.0), Waypoint::new(60.0, 3000.0, 4500.0, 1300.0)],
        adsb: Some(AdsbIdentity { icao: "4ca7b5".into(), typecode: 4, category: 3, callsign: "SAS1432".into() }),
    });
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{project, visible_targets};

    #[test]
    fn presets_validate() {
        for s in [clutter_only(1), persistence(1), slew(1), demo(1)] {
            s.validate().unwrap();
        }
        for b in DriBin::ALL {
            calibration(b, 1000, 1).validate().unwrap();
        }
    }

    #[test]
    fn clutter_never_overlaps() {
        let s = clutter_only(5);
        assert!(s.clutter.len() > 10);
        for w in s.clutter.windows(2) {
            assert!(w[1].start_s - (w[0].start_s + w[0].duration_s) >= CLUTTER_GAP_S.0 - 1e-9);
        }
        assert!(s.clutter.iter().any(|c| c.kind == ClutterKind::Insect));
        assert!(s.clutter.iter().any(|c| c.kind == ClutterKind::CloudEdge));
    }

    #[test]
    fn calibration_targets_land_in_their_bin() {
        for b in DriBin::ALL {
            let s = calibration(b, 100, 0);
            let v = visible_targets(&s, 0.5, s.initial_pose, &CameraModel::ircam()).unwrap();
            assert_eq!(v.len(), 4);
            assert!(v.iter().all(|t| t.projection.bin == b), "{b}");
            let vv = visible_targets(&s, 0.5, s.initial_pose, &CameraModel::vcam()).unwrap();
            assert!(vv.iter().all(|t| t.projection.bin == b));
        }
    }

    #[test]
    fn persistence_dropouts_are_shorter_than_a_second() {
        let s = persistence(0);
        assert!(s.dropouts.iter().all(|d| d.duration_s < 1.0));
        let p = project(s.targets[0].position_at(1.0).unwrap(), s.initial_pose, &CameraModel::ircam(), 0.4).unwrap().unwrap();
        assert!(p.offset.magnitude() < 1e-9);
    }
}
