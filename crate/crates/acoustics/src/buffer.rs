use std::collections::VecDeque;

use skyfence_core::{DetectionReport, SensorId, Timestamp};

use crate::classifier::AudioClassifier;
use crate::{featurize, AudioError, Classification, MfccConfig, MfccExtractor, MfccMatrix};

pub const SAMPLE_RATE: usize = 44100;

/// Exactly one second of mono audio.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>) -> Result<Self, AudioError> {
        if samples.len() != SAMPLE_RATE {
            return Err(AudioError::BufferLength { want: SAMPLE_RATE, got: samples.len() });
        }
        Ok(AudioBuffer { samples })
    }

    pub fn silent() -> Self {
        AudioBuffer { samples: vec![0.0; SAMPLE_RATE] }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mfcc(&self, ex: &MfccExtractor) -> MfccMatrix {
        ex.compute(&self.samples)
    }
}

/// MFCCs of a full buffer with a one-off extractor.
pub fn mfcc(buf: &AudioBuffer, cfg: &MfccConfig) -> Result<MfccMatrix, AudioError> {
    Ok(MfccExtractor::new(*cfg)?.compute(&buf.samples))
}

/// Fixed-capacity ring that keeps the newest samples.
#[derive(Debug, Clone)]
pub struct RollingBuffer {
    ring: VecDeque<f64>,
    cap: usize,
}

impl RollingBuffer {
    pub fn new(cap: usize) -> Self {
        RollingBuffer { ring: VecDeque::with_capacity(cap), cap }
    }

    pub fn push(&mut self, samples: &[f64]) {
        let skip = samples.len().saturating_sub(self.cap);
        for &s in &samples[skip..] {
            if self.ring.len() == self.cap {
                self.ring.pop_front();
            }
            self.ring.push_back(s);
        }
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.ring.len() == self.cap
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.ring.iter().copied().collect()
    }
}

/// The audio worker's state: a one-second ring plus a classifier, emitting
/// one report per 50 ms of new audio once the ring is full.
#[derive(Debug)]
pub struct AudioChannel<C> {
    ring: RollingBuffer,
    extractor: MfccExtractor,
    classifier: C,
    pending: usize,
    consumed: u64,
    start: Timestamp,
}

impl<C: AudioClassifier> AudioChannel<C> {
    /// Samples between classifications (50 ms).
    pub const TICK_SAMPLES: usize = SAMPLE_RATE / 20;

    /// `start` is the wall time of the first sample pushed.
    pub fn new(extractor: MfccExtractor, classifier: C, start: Timestamp) -> Self {
        AudioChannel { ring: RollingBuffer::new(SAMPLE_RATE), extractor, classifier, pending: 0, consumed: 0, start }
    }

    pub fn classify_buffer(&self, buf: &AudioBuffer) -> Result<Classification, AudioError> {
        let v = featurize(&buf.mfcc(&self.extractor))?;
        self.classifier.classify(&v)
    }

    /// Feeds samples and returns a report for each completed tick, stamped
    /// with the time of the last sample in its buffer.
    pub fn push(&mut self, samples: &[f64]) -> Result<Vec<DetectionReport>, AudioError> {
        let mut out = Vec::new();
        let mut rest = samples;
        while !rest.is_empty() {
            let take = rest.len().min(Self::TICK_SAMPLES - self.pending);
            self.ring.push(&rest[..take]);
            rest = &rest[take..];
            self.pending += take;
            self.consumed += take as u64;
            if self.pending == Self::TICK_SAMPLES {
                self.pending = 0;
                if self.ring.is_full() {
                    let buf = AudioBuffer { samples: self.ring.to_vec() };
                    let c = self.classify_buffer(&buf)?;
                    let t = self.start + self.consumed * 1000 / SAMPLE_RATE as u64;
                    out.push(DetectionReport::new(SensorId::Audio, t, c.label, c.confidence));
                }
            }
        }
        Ok(out)
    }
}
