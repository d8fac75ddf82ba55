//! Audio channel.
//!
//! Audio arrives as 16-bit mono PCM at 44.1 kHz and is kept in a one-second
//! rolling buffer. Every 50 ms the buffer is turned into a matrix of MFCCs,
//! pooled into a fixed-length feature vector (per-coefficient mean and
//! standard deviation) and scored against per-class diagonal Gaussians.

mod buffer;
mod classifier;
mod error;
mod mel;
mod mfcc;
mod wav;

pub use buffer::{mfcc, AudioBuffer, AudioChannel, RollingBuffer, SAMPLE_RATE};
pub use classifier::{AudioClassifier, CentroidModel, ClassStats, Classification, AUDIO_CLASSES};
pub use error::AudioError;
pub use mel::{hz_from_mel, mel, MelFilterbank};
pub use mfcc::{featurize, MfccConfig, MfccExtractor, MfccMatrix, FEATURE_DIM};
pub use wav::{read_wav, write_wav};
