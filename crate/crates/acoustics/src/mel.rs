/// Hz to mel, `2595 · log10(1 + f / 700)`.
pub fn mel(f_hz: f64) -> f64 {
    2595.0 * (1.0 + f_hz / 700.0).log10()
}

pub fn hz_from_mel(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale, each rising from the
/// previous filter's centre to its own and falling to the next one's, so
/// neighbours overlap by half and their responses never sum above one.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// `n_mels` rows of `n_fft / 2 + 1` weights.
    weights: Vec<Vec<f64>>,
    edges_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(n_mels: usize, n_fft: usize, sample_rate: f64, fmin: f64, fmax: f64) -> Self {
        let (lo, hi) = (mel(fmin), mel(fmax));
        let edges_hz: Vec<f64> = (0..n_mels + 2)
            .map(|i| hz_from_mel(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let n_bins = n_fft / 2 + 1;
        let weights = (0..n_mels)
            .map(|m| {
                let (left, centre, right) = (edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]);
                (0..n_bins)
                    .map(|k| {
                        let f = k as f64 * sample_rate / n_fft as f64;
                        if f > left && f <= centre {
                            (f - left) / (centre - left)
                        } else if f > centre && f < right {
                            (right - f) / (right - centre)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        MelFilterbank { weights, edges_hz }
    }

    pub fn n_mels(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Filter edge frequencies; filter `m` peaks at `edges_hz()[m + 1]`.
    pub fn edges_hz(&self) -> &[f64] {
        &self.edges_hz
    }

    pub fn apply(&self, power: &[f64], out: &mut [f64]) {
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o = w.iter().zip(power).map(|(a, b)| a * b).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_reference_points() {
        assert_eq!(mel(0.0), 0.0);
        assert!((mel(1000.0) - 999.99).abs() < 0.01);
        assert!((mel(700.0) - 781.17).abs() < 0.01);
    }

    #[test]
    fn mel_inverse() {
        for f in [0.0, 20.0, 440.0, 1000.0, 11025.0, 22050.0] {
            assert!((hz_from_mel(mel(f)) - f).abs() < 1e-9);
        }
    }

    #[test]
    fn triangles_sum_to_at_most_one() {
        let fb = MelFilterbank::new(26, 1024, 44100.0, 20.0, 11025.0);
        for k in 0..513 {
            let s: f64 = fb.weights().iter().map(|row| row[k]).sum();
            assert!(s <= 1.0 + 1e-12, "bin {k}: {s}");
        }
        // every filter catches at least one bin
        assert!(fb.weights().iter().all(|row| row.iter().any(|&w| w > 0.0)));
    }
}
