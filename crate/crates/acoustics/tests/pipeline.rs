use std::f64::consts::PI;

use proptest::prelude::*;
use skyfence_acoustics::{featurize, mfcc, AudioBuffer, MfccConfig, MfccExtractor, MfccMatrix};

fn tone(f: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 * (2.0 * PI * f * i as f64 / 44100.0).sin()).collect()
}

/// Direct O(N²) DFT of a Hann-windowed frame, independent of the FFT path.
fn dft_power(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    let w: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, (&x, &wi)) in frame.iter().zip(&w).enumerate() {
                let ph = -2.0 * PI * (k * i) as f64 / n as f64;
                re += x * wi * ph.cos();
                im += x * wi * ph.sin();
            }
            re * re + im * im
        })
        .collect()
}

#[test]
fn fft_matches_direct_dft() {
    let ex = MfccExtractor::new(MfccConfig::default()).unwrap();
    let x: Vec<f64> = (0..1024).map(|i| ((i * 37 % 101) as f64 / 50.0 - 1.0) * 0.3).collect();
    let a = ex.power_spectrum(&x);
    let b = dft_power(&x);
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() < 1e-8 * (1.0 + q), "{p} vs {q}");
    }
}

#[test]
fn one_khz_tone_peaks_in_its_band() {
    let ex = MfccExtractor::new(MfccConfig::default()).unwrap();
    let fb = ex.filterbank();
    // filter whose triangle peak is nearest 1 kHz on the mel scale
    let expected = (0..fb.n_mels())
        .min_by(|&a, &b| {
            let d = |m: usize| (fb.edges_hz()[m + 1] - 1000.0).abs();
            d(a).partial_cmp(&d(b)).unwrap()
        })
        .unwrap();
    assert_eq!(expected, 7);

    let x = tone(1000.0, 44100);
    let cfg = ex.config();
    for f in 0..cfg.frame_count(x.len()) {
        let frame = &x[f * cfg.hop..f * cfg.hop + cfg.window_len];
        let power = dft_power(frame);
        let mut e = vec![0.0; fb.n_mels()];
        fb.apply(&power, &mut e);
        let argmax = (0..e.len()).max_by(|&a, &b| e[a].partial_cmp(&e[b]).unwrap()).unwrap();
        assert_eq!(argmax, expected, "frame {f}");
        let lm = ex.log_mel(frame);
        let fast = (0..lm.len()).max_by(|&a, &b| lm[a].partial_cmp(&lm[b]).unwrap()).unwrap();
        assert_eq!(fast, expected, "frame {f}");
    }
}

#[test]
fn repeated_half_second_repeats_every_fifty_frames() {
    let half: Vec<f64> = (0..22050)
        .map(|i| 0.3 * (2.0 * PI * 613.0 * i as f64 / 44100.0).sin() + 0.1 * ((i * 7 % 13) as f64 / 13.0))
        .collect();
    let mut full = half.clone();
    full.extend(&half);
    let m = mfcc(&AudioBuffer::new(full).unwrap(), &MfccConfig::default()).unwrap();
    assert_eq!(m.n_frames(), 98);
    for f in 0..48 {
        for (a, b) in m.rows[f].iter().zip(&m.rows[f + 50]) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn featurize_examples() {
    let r = vec![1.0, -2.0, 0.5];
    let neg: Vec<f64> = r.iter().map(|v| -v).collect();
    let v = featurize(&MfccMatrix { rows: vec![r.clone(), neg] }).unwrap();
    assert_eq!(&v[..3], &[0.0, 0.0, 0.0]);
    assert_eq!(&v[3..], &[1.0, 2.0, 0.5]);
    let c = featurize(&MfccMatrix { rows: vec![r.clone(); 5] }).unwrap();
    assert!(c[3..].iter().all(|&s| s == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gain_invariance(k in 0.01f64..50.0, f in 100.0f64..8000.0, seed in 0u64..1000) {
        let ex = MfccExtractor::new(MfccConfig::default()).unwrap();
        let x: Vec<f64> = (0..1024)
            .map(|i| 0.2 * (2.0 * PI * f * i as f64 / 44100.0).sin() + 0.01 * (((i as u64 * 7919 + seed) % 211) as f64 / 211.0 - 0.5))
            .collect();
        let y: Vec<f64> = x.iter().map(|v| v * k).collect();
        let (a, b) = (ex.coefficients(&x), ex.coefficients(&y));
        for i in 1..13 {
            prop_assert!((a[i] - b[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn filter_energy_within_spectrum(xs in proptest::collection::vec(-1.0f64..1.0, 1024)) {
        let ex = MfccExtractor::new(MfccConfig::default()).unwrap();
        let p = ex.power_spectrum(&xs);
        let mut e = vec![0.0; 26];
        ex.filterbank().apply(&p, &mut e);
        prop_assert!(e.iter().sum::<f64>() <= p.iter().sum::<f64>() + 1e-9);
    }

    #[test]
    fn featurize_permutation_invariant(rows in proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, 13), 2..20), rot in 0usize..20) {
        let mut shuffled = rows.clone();
        let n = shuffled.len();
        shuffled.rotate_left(rot % n);
        shuffled.reverse();
        let a = featurize(&MfccMatrix { rows }).unwrap();
        let b = featurize(&MfccMatrix { rows: shuffled }).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
