use serde::{Deserialize, Serialize};
use skyfence_core::TargetClass;

use crate::AudioError;

/// Classes the audio channel can emit, in score order.
pub const AUDIO_CLASSES: [TargetClass; 3] = [TargetClass::Drone, TargetClass::Helicopter, TargetClass::Background];

const VAR_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: TargetClass,
    pub confidence: f64,
    /// Softmax probability per class, aligned with [`AUDIO_CLASSES`].
    pub probabilities: [f64; 3],
}

/// Anything that maps a pooled feature vector to an audio class.
pub trait AudioClassifier {
    fn classify(&self, features: &[f64]) -> Result<Classification, AudioError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: usize,
}

/// Diagonal Gaussian per class, scored by negative normalised squared
/// distance and turned into confidences by a softmax.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel {
    /// Aligned with [`AUDIO_CLASSES`]; `None` until trained.
    pub classes: [Option<ClassStats>; 3],
}

fn slot(class: TargetClass) -> Result<usize, AudioError> {
    AUDIO_CLASSES.iter().position(|&c| c == class).ok_or(AudioError::NotAudioClass(class))
}

impl CentroidModel {
    pub fn fit<'a, I>(samples: I) -> Result<Self, AudioError>
    where
        I: IntoIterator<Item = (TargetClass, &'a [f64])>,
    {
        let mut grouped: [Vec<&[f64]>; 3] = Default::default();
        for (class, v) in samples {
            grouped[slot(class)?].push(v);
        }
        let mut model = CentroidModel::default();
        for (i, group) in grouped.iter().enumerate() {
            if group.is_empty() {
                continue;
            }
            let d = group[0].len();
            if let Some(bad) = group.iter().find(|v| v.len() != d) {
                return Err(AudioError::Dimension { want: d, got: bad.len() });
            }
            let n = group.len() as f64;
            let mean: Vec<f64> = (0..d).map(|j| group.iter().map(|v| v[j]).sum::<f64>() / n).collect();
            let var = (0..d)
                .map(|j| {
                    let s: f64 = group.iter().map(|v| (v[j] - mean[j]).powi(2)).sum();
                    (s / n).max(VAR_FLOOR)
                })
                .collect();
            model.classes[i] = Some(ClassStats { mean, var, count: group.len() });
        }
        Ok(model)
    }

    pub fn set_class(&mut self, class: TargetClass, mean: Vec<f64>, var: Vec<f64>) -> Result<(), AudioError> {
        if mean.len() != var.len() {
            return Err(AudioError::Dimension { want: mean.len(), got: var.len() });
        }
        let var = var.into_iter().map(|v| v.max(VAR_FLOOR)).collect();
        self.classes[slot(class)?] = Some(ClassStats { mean, var, count: 1 });
        Ok(())
    }

    pub fn is_trained(&self) -> bool {
        self.classes.iter().all(Option::is_some)
    }

    /// `-Σ (v - μ)² / σ²` per class.
    pub fn scores(&self, v: &[f64]) -> Result<[f64; 3], AudioError> {
        let mut out = [0.0; 3];
        for (i, stats) in self.classes.iter().enumerate() {
            let s = stats.as_ref().ok_or_else(|| AudioError::Untrained(AUDIO_CLASSES[i].to_string()))?;
            if s.mean.len() != v.len() {
                return Err(AudioError::Dimension { want: s.mean.len(), got: v.len() });
            }
            out[i] = -v.iter().zip(&s.mean).zip(&s.var).map(|((x, m), s2)| (x - m).powi(2) / s2).sum::<f64>();
        }
        Ok(out)
    }
}

impl AudioClassifier for CentroidModel {
    fn classify(&self, v: &[f64]) -> Result<Classification, AudioError> {
        let scores = self.scores(v)?;
        let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e = scores.map(|s| (s - top).exp());
        let z: f64 = e.iter().sum();
        let probabilities = e.map(|x| x / z);
        // first maximum wins, so ties resolve in class order
        let best = (0..3).fold(0, |b, i| if probabilities[i] > probabilities[b] { i } else { b });
        Ok(Classification { label: AUDIO_CLASSES[best], confidence: probabilities[best], probabilities })
    }
}
