use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skyfence_acoustics::{read_wav, MfccConfig, MfccExtractor};
use skyfence_core::{CameraModel, DriBin, SensorId, TargetClass, Timestamp};
use skyfence_fgtracker::{extract_blobs, gmm_update, GmmModel, GmmParams, GrayFrame};
use skyfence_platform::{PlatformPose, FISHEYE_MOUNT};
use skyfence_simkit::{
    presets, project, range_for_width, sample_detections, synth_audio, synth_fisheye_frame, unit_vector,
    visible_targets, write_audio_wav, CameraSim, DetectionKind, DetectorProfile, FisheyeSim, Scenario, SimTarget,
    Waypoint,
};

#[test]
fn doubling_range_halves_width() {
    let cam = CameraModel::ircam();
    let pose = PlatformPose::new(0.0, 0.0);
    for r in [20.0, 50.0, 150.0] {
        let a = project([0.0, r, 0.0], pose, &cam, 0.4).unwrap().unwrap().width_px;
        let b = project([0.0, 2.0 * r, 0.0], pose, &cam, 0.4).unwrap().unwrap().width_px;
        assert!((a / b - 2.0).abs() < 0.02, "{r}: {a} / {b}");
    }
}

proptest! {
    #[test]
    fn width_never_grows_with_range(az in -10.0f64..10.0, el in -8.0f64..8.0, r in 1.0f64..2000.0, k in 1.0f64..5.0, w in 0.05f64..40.0) {
        let cam = CameraModel::vcam();
        let pose = PlatformPose::new(0.0, 0.0);
        let u = unit_vector(az, el);
        let near = project(u.map(|c| c * r), pose, &cam, w).unwrap().unwrap();
        let far = project(u.map(|c| c * r * k), pose, &cam, w).unwrap().unwrap();
        prop_assert!(far.width_px <= near.width_px + 1e-12);
        prop_assert!(far.bin >= near.bin);
    }
}

#[test]
fn ir_close_drone_recall_matches_profile() {
    let cam = CameraModel::ircam();
    let mut s = Scenario::new("r", 1.0, 0);
    s.initial_pose = PlatformPose::new(0.0, 0.0);
    let r = range_for_width(0.4, 20.0, &cam);
    s.targets.push(SimTarget::stationary(TargetClass::Drone, 0.4, [0.0, r, 0.0], 1.0));
    let v = visible_targets(&s, 0.5, s.initial_pose, &cam).unwrap();
    assert_eq!(v[0].projection.bin, DriBin::Close);
    let profile = DetectorProfile::ircam_default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let frames = 20_000;
    let mut hits = 0;
    for f in 0..frames {
        let d = sample_detections(&profile, &cam, &v, &mut rng, Timestamp(f)).unwrap();
        hits += d.iter().filter(|d| matches!(d.kind, DetectionKind::True { .. })).count();
    }
    let recall = hits as f64 / frames as f64;
    assert!((0.859..=0.899).contains(&recall), "recall {recall}");
}

#[test]
fn generated_precision_and_recall_track_every_cell() {
    for bin in DriBin::ALL {
        let s = presets::calibration(bin, 20_000, 77);
        for sensor in [SensorId::Ircam, SensorId::Vcam] {
            let mut cam = CameraSim::new(&s, sensor).unwrap();
            // per class: opportunities, true, false
            let mut n = [[0usize; 3]; 4];
            let mut frames = 0;
            while let Some(f) = cam.next_frame(&s, s.initial_pose).unwrap() {
                frames += 1;
                if frames > 20_000 {
                    break;
                }
                for t in &f.truth {
                    n[t.class as usize][0] += 1;
                }
                for d in &f.detections {
                    let k = d.report.label as usize;
                    match d.kind {
                        DetectionKind::True { .. } => n[k][1] += 1,
                        _ => n[k][2] += 1,
                    }
                }
            }
            let profile = s.detectors.get(sensor).unwrap();
            for class in [TargetClass::Airplane, TargetClass::Bird, TargetClass::Drone, TargetClass::Helicopter] {
                let [opp, tp, fp] = n[class as usize];
                let cell = profile.cell(class, bin).unwrap();
                let (p, r) = (tp as f64 / (tp + fp) as f64, tp as f64 / opp as f64);
                assert_eq!(opp, 20_000);
                assert!((p - cell.precision).abs() < 0.02, "{sensor} {class} {bin}: P {p} vs {}", cell.precision);
                assert!((r - cell.recall).abs() < 0.02, "{sensor} {class} {bin}: R {r} vs {}", cell.recall);
            }
        }
    }
}

#[test]
fn false_reports_on_empty_sky_avoid_the_truth() {
    let s = presets::calibration(DriBin::Medium, 2000, 5);
    let mut cam = CameraSim::new(&s, SensorId::Ircam).unwrap();
    let ir = CameraModel::ircam();
    let mut phantoms = 0;
    while let Some(f) = cam.next_frame(&s, s.initial_pose).unwrap() {
        for d in f.detections.iter().filter(|d| d.kind == DetectionKind::Phantom) {
            phantoms += 1;
            let b = d.report.bbox.unwrap();
            assert!(f.truth.iter().all(|t| t.bbox(&ir).iou(&b) < 0.1));
        }
    }
    assert!(phantoms > 100);
}

#[test]
fn camera_streams_are_reproducible() {
    let s = presets::demo(42);
    let run = || {
        let mut cam = CameraSim::new(&s, SensorId::Vcam).unwrap();
        let mut all = Vec::new();
        while let Some(f) = cam.next_frame(&s, s.initial_pose).unwrap() {
            all.push(f);
        }
        all
    };
    assert_eq!(run(), run());
}

fn small_fisheye() -> CameraModel {
    CameraModel::new(256, 192, 180.0, 90.0).unwrap()
}

#[test]
fn fisheye_frames_are_reproducible() {
    let mut s = presets::demo(3);
    s.sensors.fcam.camera = small_fisheye();
    let mut a = FisheyeSim::new(&s);
    let mut b = FisheyeSim::new(&s);
    for _ in 0..5 {
        assert_eq!(a.next_frame(&s).unwrap(), b.next_frame(&s).unwrap());
    }
}

#[test]
fn fisheye_target_yields_one_blob_after_convergence() {
    let mut s = Scenario::new("f", 6.0, 8);
    s.sensors.fcam.camera = small_fisheye();
    let dir = unit_vector(FISHEYE_MOUNT.pan_deg + 20.0, FISHEYE_MOUNT.tilt_deg - 10.0);
    let p = dir.map(|c| c * 100.0);
    s.targets.push(SimTarget {
        class: TargetClass::Helicopter,
        width_m: 12.0,
        waypoints: vec![Waypoint::new(4.0, p[0], p[1], p[2]), Waypoint::new(6.0, p[0] + 20.0, p[1], p[2])],
        adsb: None,
    });
    let mut sim = FisheyeSim::new(&s);
    let mut model = GmmModel::new(256, 192, GmmParams::default()).unwrap();
    let mut seen = 0;
    while let Some((t, frame)) = sim.next_frame(&s).unwrap() {
        let mask = gmm_update(&mut model, &frame.unwrap()).unwrap();
        if t.as_secs_f64() >= 4.0 {
            let blobs = extract_blobs(&mask, 4);
            assert_eq!(blobs.len(), 1, "at {t}");
            seen += 1;
        }
        if seen == 5 {
            break;
        }
    }
    assert_eq!(seen, 5);
}

#[test]
fn fisheye_pgm_export() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario::new("f", 1.0, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = synth_fisheye_frame(&s, 0.0, &small_fisheye(), &mut rng).unwrap();
    let path = dir.path().join("f.pgm");
    f.write_pgm(&path).unwrap();
    assert_eq!(GrayFrame::read_pgm(&path).unwrap(), f);
}

/// Direct DFT magnitude at `f` Hz.
fn dft_power(x: &[f64], f: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f / 44100.0;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, v) in x.iter().enumerate() {
        re += v * (w * n as f64).cos();
        im -= v * (w * n as f64).sin();
    }
    re * re + im * im
}

#[test]
fn drone_peak_sits_at_the_fundamental() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = synth_audio(TargetClass::Drone, 1.0, &mut rng).unwrap();
        let seg = &x[..8192];
        let df = 44100.0 / 8192.0;
        let (k, _) = (1..(2000.0 / df) as usize)
            .map(|k| (k, dft_power(seg, k as f64 * df)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let f = k as f64 * df;
        assert!((150.0..=250.0).contains(&f), "seed {seed}: peak at {f} Hz");
    }
}

#[test]
fn background_has_no_harmonic_peaks() {
    let ex = MfccExtractor::new(MfccConfig::default()).unwrap();
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let x = synth_audio(TargetClass::Background, 2.0, &mut rng).unwrap();
        let mut welch = vec![0.0; 513];
        let segs: Vec<_> = (0..(x.len() - 1024) / 512).map(|i| &x[i * 512..i * 512 + 1024]).collect();
        for s in &segs {
            for (a, b) in welch.iter_mut().zip(ex.power_spectrum(s)) {
                *a += b / segs.len() as f64;
            }
        }
        for k in 10..500 {
            let mut local: Vec<f64> = welch[k - 8..=k + 8].to_vec();
            local.sort_by(f64::total_cmp);
            assert!(welch[k] < 3.0 * local[8], "seed {seed} bin {k}");
        }
    }
}

#[test]
fn audio_is_reproducible_and_exports() {
    for class in [TargetClass::Drone, TargetClass::Helicopter, TargetClass::Background] {
        let a = synth_audio(class, 0.3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = synth_audio(class, 0.3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
    let dir = tempfile::tempdir().unwrap();
    let x = synth_audio(TargetClass::Helicopter, 0.5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let path = dir.path().join("h.wav");
    write_audio_wav(&path, &x).unwrap();
    let back = read_wav(&path).unwrap();
    assert_eq!(back.len(), x.len());
    assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-4));
}

#[test]
fn scenario_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = presets::demo(11);
    let path = dir.path().join("demo.json");
    s.save(&path).unwrap();
    assert_eq!(Scenario::load(&path).unwrap(), s);
}
