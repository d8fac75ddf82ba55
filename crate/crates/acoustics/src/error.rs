use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("buffer holds {got} samples, expected {want}")]
    BufferLength { want: usize, got: usize },
    #[error("need at least {need} MFCC frames, got {got}")]
    TooFewFrames { need: usize, got: usize },
    #[error("invalid MFCC configuration: {0}")]
    InvalidConfig(String),
    #[error("classifier has no training data for {0}")]
    Untrained(String),
    #[error("{0} is not an audio class")]
    NotAudioClass(skyfence_core::TargetClass),
    #[error("feature vector has {got} entries, model expects {want}")]
    Dimension { want: usize, got: usize },
    #[error("unsupported WAV layout: {0} (need 16-bit signed PCM, mono, 44100 Hz)")]
    UnsupportedWav(String),
    #[error(transparent)]
    Wav(#[from] hound::Error),
}
