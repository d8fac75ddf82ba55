use std::path::Path;

use crate::{AudioError, SAMPLE_RATE};

/// Reads 16-bit signed mono PCM at 44100 Hz into samples in [-1, 1).
pub fn read_wav(path: impl AsRef<Path>) -> Result<Vec<f64>, AudioError> {
    let reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1
        || spec.sample_rate as usize != SAMPLE_RATE
        || spec.bits_per_sample != 16
        || spec.sample_format != hound::SampleFormat::Int
    {
        return Err(AudioError::UnsupportedWav(format!(
            "{} channel(s), {} Hz, {}-bit {:?}",
            spec.channels, spec.sample_rate, spec.bits_per_sample, spec.sample_format
        )));
    }
    reader
        .into_samples::<i16>()
        .map(|s| Ok(f64::from(s?) / 32768.0))
        .collect()
}

/// Writes samples (clipped to [-1, 1]) as 16-bit mono PCM at 44100 Hz.
pub fn write_wav(path: impl AsRef<Path>, samples: &[f64]) -> Result<(), AudioError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE as u32,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &s in samples {
        w.write_sample((s.clamp(-1.0, 1.0) * 32767.0).round() as i16)?;
    }
    w.finalize()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        let x: Vec<f64> = (0..500).map(|i| ((i as f64) * 0.01).sin() * 0.8).collect();
        write_wav(&p, &x).unwrap();
        let y = read_wav(&p).unwrap();
        assert_eq!(y.len(), 500);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn stereo_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let spec = hound::WavSpec { channels: 2, sample_rate: 44100, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        w.write_sample(0i16).unwrap();
        w.write_sample(0i16).unwrap();
        w.finalize().unwrap();
        let err = read_wav(&p).unwrap_err();
        assert!(matches!(err, AudioError::UnsupportedWav(_)));
        assert!(err.to_string().contains("2 channel"));
    }
}
