use proptest::prelude::*;
use skyfence_core::{AngularOffset, Timestamp};
use skyfence_platform::*;

fn opt_time() -> impl Strategy<Value = Option<Timestamp>> {
    proptest::option::of((0u64..20_000).prop_map(Timestamp))
}

fn opt_offset() -> impl Strategy<Value = Option<AngularOffset>> {
    proptest::option::of((-120.0f64..120.0, -120.0f64..120.0).prop_map(|(a, e)| AngularOffset::new(a, e)))
}

fn inputs() -> impl Strategy<Value = PlatformInputs> {
    (
        (opt_time(), opt_time(), opt_time(), opt_time()),
        (opt_offset(), opt_offset(), opt_offset()),
        proptest::option::of((-200.0f64..200.0, -100.0f64..200.0).prop_map(|(p, t)| PlatformPose::new(p, t))),
    )
        .prop_map(|((ir, v, f, m), (oi, ov, of), manual_target)| PlatformInputs {
            times: SourceTimes { ircam: ir, vcam: v, fcam: f, manual: m },
            ircam: oi,
            vcam: ov,
            fcam: of,
            manual_target,
        })
}

proptest! {
    #[test]
    fn pose_within_limits_and_rate_bounded(
        start in (-90.0f64..=90.0, 0.0f64..=90.0),
        steps in proptest::collection::vec((inputs(), 0.01f64..0.5, any::<bool>()), 1..80),
    ) {
        let params = ControllerParams::default();
        let mut plat = Platform::new(PlatformPose::new(start.0, start.1), params).unwrap();
        let mut now = 0u64;
        for (inp, dt, switch) in steps {
            if switch {
                plat.set_pattern(if now % 2 == 0 { SearchPattern::Sweep } else { SearchPattern::Raster });
            }
            now += (dt * 1000.0) as u64;
            let before = plat.pose();
            plat.tick(Timestamp(now), dt, &inp);
            let after = plat.pose();
            prop_assert!(params.limits.contains(after), "{after:?}");
            let cap = params.max_rate_deg_s * dt + 1e-9;
            prop_assert!((after.pan_deg - before.pan_deg).abs() <= cap);
            prop_assert!((after.tilt_deg - before.tilt_deg).abs() <= cap);
            prop_assert!(pose_to_pulse(after, &params.limits).is_ok());
        }
    }

    #[test]
    fn arbitration_deterministic(
        ir in opt_time(), v in opt_time(), f in opt_time(), m in opt_time(), now in 0u64..30_000,
    ) {
        let t = SourceTimes { ircam: ir, vcam: v, fcam: f, manual: m };
        let p = ControllerParams::default();
        let a = arbitrate(&t, Timestamp(now), &p);
        prop_assert_eq!(a, arbitrate(&t, Timestamp(now), &p));
    }

    #[test]
    fn pattern_rate_bound(start in (-90.0f64..=90.0, 0.0f64..=90.0), raster in any::<bool>()) {
        let p = ControllerParams::default();
        let pattern = if raster { SearchPattern::Raster } else { SearchPattern::Sweep };
        let mut pose = PlatformPose::new(start.0, start.1);
        let mut c = PatternCursor::new(pattern, pose, &p);
        let mut moved = 0.0;
        for _ in 0..10 {
            let next = pattern_next(&mut c, pose, 0.1, &p);
            moved += (next.pan_deg - pose.pan_deg).abs();
            pose = next;
        }
        prop_assert!(moved <= p.max_rate_deg_s + 1e-9);
    }
}

#[test]
fn closed_loop_converges_geometrically() {
    let params = ControllerParams::default();
    let target_pan = 10.0;
    let mut plat = Platform::new(PlatformPose::new(0.0, 30.0), params).unwrap();
    let mut prev = target_pan;
    let mut ticks = 0;
    loop {
        let off = AngularOffset::new(target_pan - plat.pose().pan_deg, 0.0);
        if off.magnitude() < 0.1 {
            break;
        }
        let now = Timestamp(100 * ticks);
        let inp = PlatformInputs {
            times: SourceTimes { ircam: Some(now), ..Default::default() },
            ircam: Some(off),
            ..Default::default()
        };
        assert_eq!(plat.tick(now, 0.1, &inp), ControlSource::Ircam);
        let err = target_pan - plat.pose().pan_deg;
        assert!((err - (1.0 - params.k) * prev).abs() < 1e-12);
        prev = err;
        ticks += 1;
    }
    assert_eq!(ticks, 7);
}
