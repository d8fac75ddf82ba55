use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{num_complex::Complex, Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{AudioError, MelFilterbank};

/// Length of the pooled feature vector: mean and standard deviation of each
/// of the 13 coefficients.
pub const FEATURE_DIM: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    pub sample_rate: f64,
    pub window_len: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub n_coeffs: usize,
    /// Filter energies are clamped to this before the natural log.
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            sample_rate: 44100.0,
            window_len: 1024,
            hop: 441,
            n_mels: 26,
            fmin_hz: 20.0,
            fmax_hz: 11025.0,
            n_coeffs: 13,
            log_floor: 1e-10,
        }
    }
}

impl MfccConfig {
    pub fn validate(&self) -> Result<(), AudioError> {
        let bad = |m: &str| Err(AudioError::InvalidConfig(m.to_string()));
        if self.window_len < 2 || self.hop == 0 {
            return bad("window_len must be >= 2 and hop >= 1");
        }
        if self.n_mels == 0 || self.n_coeffs == 0 || self.n_coeffs > self.n_mels {
            return bad("need 1 <= n_coeffs <= n_mels");
        }
        if !(self.fmin_hz >= 0.0 && self.fmin_hz < self.fmax_hz && self.fmax_hz <= self.sample_rate / 2.0) {
            return bad("need 0 <= fmin < fmax <= sample_rate / 2");
        }
        if !(self.log_floor > 0.0) {
            return bad("log_floor must be positive");
        }
        Ok(())
    }

    /// Frames produced from `n` samples (no padding).
    pub fn frame_count(&self, n: usize) -> usize {
        if n < self.window_len {
            0
        } else {
            (n - self.window_len) / self.hop + 1
        }
    }
}

/// One row per frame, `n_coeffs` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MfccMatrix {
    pub rows: Vec<Vec<f64>>,
}

impl MfccMatrix {
    pub fn n_frames(&self) -> usize {
        self.rows.len()
    }
}

/// Reusable MFCC pipeline: periodic Hann window, power spectrum, mel
/// filterbank, natural log with a floor, orthonormal DCT-II.
pub struct MfccExtractor {
    cfg: MfccConfig,
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    filterbank: MelFilterbank,
    dct: Vec<Vec<f64>>,
}

impl std::fmt::Debug for MfccExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MfccExtractor").field("cfg", &self.cfg).finish_non_exhaustive()
    }
}

impl MfccExtractor {
    pub fn new(cfg: MfccConfig) -> Result<Self, AudioError> {
        cfg.validate()?;
        let n = cfg.window_len;
        let fft = FftPlanner::new().plan_fft_forward(n);
        let window = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect();
        let filterbank = MelFilterbank::new(cfg.n_mels, n, cfg.sample_rate, cfg.fmin_hz, cfg.fmax_hz);
        let m = cfg.n_mels as f64;
        let dct = (0..cfg.n_coeffs)
            .map(|k| {
                let scale = if k == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
                (0..cfg.n_mels)
                    .map(|j| scale * (PI * k as f64 * (j as f64 + 0.5) / m).cos())
                    .collect()
            })
            .collect();
        Ok(MfccExtractor { cfg, fft, window, filterbank, dct })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.cfg
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// `|X_k|²` for `k = 0..=N/2` of one windowed frame.
    pub fn power_spectrum(&self, frame: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> =
            frame.iter().zip(&self.window).map(|(&x, &w)| Complex::new(x * w, 0.0)).collect();
        self.fft.process(&mut buf);
        buf[..self.cfg.window_len / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
    }

    /// Floored natural log of the filter energies of one frame.
    pub fn log_mel(&self, frame: &[f64]) -> Vec<f64> {
        let power = self.power_spectrum(frame);
        let mut e = vec![0.0; self.cfg.n_mels];
        self.filterbank.apply(&power, &mut e);
        e.iter().map(|&v| v.max(self.cfg.log_floor).ln()).collect()
    }

    pub fn coefficients(&self, frame: &[f64]) -> Vec<f64> {
        let lm = self.log_mel(frame);
        self.dct.iter().map(|row| row.iter().zip(&lm).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn compute(&self, samples: &[f64]) -> MfccMatrix {
        let n = self.cfg.frame_count(samples.len());
        let rows = (0..n)
            .map(|i| {
                let start = i * self.cfg.hop;
                self.coefficients(&samples[start..start + self.cfg.window_len])
            })
            .collect();
        MfccMatrix { rows }
    }
}

/// Per-coefficient mean followed by per-coefficient population standard
/// deviation.
pub fn featurize(m: &MfccMatrix) -> Result<Vec<f64>, AudioError> {
    let n = m.n_frames();
    if n < 2 {
        return Err(AudioError::TooFewFrames { need: 2, got: n });
    }
    let d = m.rows[0].len();
    let mut mean = vec![0.0; d];
    for row in &m.rows {
        for (a, b) in mean.iter_mut().zip(row) {
            *a += b;
        }
    }
    mean.iter_mut().for_each(|a| *a /= n as f64);
    let mut std = vec![0.0; d];
    for row in &m.rows {
        for ((s, x), mu) in std.iter_mut().zip(row).zip(&mean) {
            *s += (x - mu) * (x - mu);
        }
    }
    std.iter_mut().for_each(|s| *s = (*s / n as f64).sqrt());
    mean.extend(std);
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f: f64, amp: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| amp * (2.0 * PI * f * i as f64 / 44100.0).sin()).collect()
    }

    #[test]
    fn one_second_gives_98_frames() {
        let cfg = MfccConfig::default();
        assert_eq!(cfg.frame_count(44100), 98);
        let ex = MfccExtractor::new(cfg).unwrap();
        let m = ex.compute(&vec![0.0; 44100]);
        assert_eq!(m.n_frames(), 98);
        assert!(m.rows.iter().all(|r| r.len() == 13));
    }

    #[test]
    fn silence_hits_the_floor() {
        let ex = MfccExtractor::new(MfccConfig::default()).unwrap();
        let lm = ex.log_mel(&[0.0; 1024]);
        assert!(lm.iter().all(|&v| v == 1e-10f64.ln()));
        // a constant log-mel vector only has a DC term
        let c = ex.coefficients(&[0.0; 1024]);
        assert!((c[0] - 1e-10f64.ln() * 26f64.sqrt()).abs() < 1e-9);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn periodic_window() {
        let ex = MfccExtractor::new(MfccConfig::default()).unwrap();
        let w = ex.window();
        assert_eq!(w[0], 0.0);
        assert!((w[512] - 1.0).abs() < 1e-15);
        // periodic: w[i] == w[N - i]
        for i in 1..512 {
            assert!((w[i] - w[1024 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn gain_shifts_only_c0() {
        let ex = MfccExtractor::new(MfccConfig::default()).unwrap();
        // broadband term keeps every band above the log floor
        let x: Vec<f64> =
            tone(1500.0, 0.1, 1024).iter().enumerate().map(|(i, v)| v + 0.01 * ((i * 31 % 17) as f64 / 17.0 - 0.5)).collect();
        let y: Vec<f64> = x.iter().map(|v| v * 7.0).collect();
        let (a, b) = (ex.coefficients(&x), ex.coefficients(&y));
        for k in 1..13 {
            assert!((a[k] - b[k]).abs() < 1e-6, "c{k}");
        }
        assert!((b[0] - a[0] - 2.0 * 7f64.ln() * 26f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn filter_energy_bounded_by_spectrum() {
        let ex = MfccExtractor::new(MfccConfig::default()).unwrap();
        let x: Vec<f64> = (0..1024).map(|i| ((i * 7919) % 97) as f64 / 97.0 - 0.5).collect();
        let p = ex.power_spectrum(&x);
        let total: f64 = p.iter().sum();
        let mut e = vec![0.0; 26];
        ex.filterbank().apply(&p, &mut e);
        assert!(e.iter().sum::<f64>() <= total);
    }

    #[test]
    fn featurize_shape_and_errors() {
        let m = MfccMatrix { rows: vec![vec![1.0, 2.0], vec![3.0, 2.0]] };
        assert_eq!(featurize(&m).unwrap(), vec![2.0, 2.0, 1.0, 0.0]);
        let one = MfccMatrix { rows: vec![vec![1.0]] };
        assert!(matches!(featurize(&one), Err(AudioError::TooFewFrames { .. })));
    }

    #[test]
    fn config_validation() {
        let bad = MfccConfig { fmax_hz: 30000.0, ..Default::default() };
        assert!(MfccExtractor::new(bad).is_err());
        let bad = MfccConfig { n_coeffs: 30, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
