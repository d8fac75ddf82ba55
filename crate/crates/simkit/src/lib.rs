//! Deterministic scenario simulator.
//!
//! A [`Scenario`] describes targets moving through a platform-centred
//! east/north/up frame, the sensor suite, detector behaviour and scripted
//! clutter. The simulators turn it into sensor output: detector reports for
//! the thermal and visible cameras ([`CameraSim`]), fish-eye frames
//! ([`FisheyeSim`]), microphone audio ([`AudioSim`]), ADS-B squitters and
//! GPS sentences. Everything is a pure function of the scenario and its
//! seed; each sensor draws from its own random stream.

mod audio;
mod detect;
mod error;
mod fisheye;
pub mod presets;
mod profile;
mod scenario;
mod traffic;
mod world;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skyfence_core::SensorId;

pub use audio::{audible_class, synth_audio, AudioChunk, AudioSim, AUDIBLE_RANGE_M, AUDIO_RATE, PEAK};
pub use detect::{sample_detections, visible_targets, CameraFrame, CameraSim, DetectionKind, SimDetection, VisibleTarget};
pub use error::SimError;
pub use fisheye::{synth_fisheye_frame, FisheyeSim, MIN_RADIUS_PX, SKY_LEVEL, SKY_NOISE_SIGMA, TARGET_LEVEL};
pub use profile::{BetaParams, DetectorProfile, ProfileCell};
pub use scenario::{
    AdsbIdentity, CameraSensor, ClutterEvent, ClutterKind, DetectorProfiles, Dropout, Scenario, SensorSuite, SimTarget,
    StreamSensor, Waypoint,
};
pub use traffic::{adsb_frames, gga_sentence, gps_sentences, target_geo};
pub use world::{direction, project, range_for_width, subtense_deg, unit_vector, wrap_deg, Projection};

/// The random stream of one sensor under a scenario seed.
pub fn sensor_rng(seed: u64, sensor: SensorId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sensor as u64 + 1);
    rng
}

/// Writes samples as 16-bit mono WAV at the simulator's audio rate.
pub fn write_audio_wav(path: impl AsRef<std::path::Path>, samples: &[f64]) -> Result<(), SimError> {
    let spec = hound::WavSpec { channels: 1, sample_rate: AUDIO_RATE, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &s in samples {
        w.write_sample((s.clamp(-1.0, 1.0) * f64::from(i16::MAX)).round() as i16)?;
    }
    w.finalize()?;
    Ok(())
}
