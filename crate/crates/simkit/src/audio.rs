use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use skyfence_core::{SensorId, TargetClass, Timestamp};

use crate::{direction, sensor_rng, Scenario, SimError};

pub const AUDIO_RATE: u32 = 44_100;
/// Every clip is scaled so its largest absolute sample equals this.
pub const PEAK: f64 = 0.5;
/// Drones and helicopters further away than this are not heard.
pub const AUDIBLE_RANGE_M: f64 = 300.0;

fn normalize(mut x: Vec<f64>) -> Vec<f64> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= PEAK / peak);
    }
    x
}

fn white<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-1.0..1.0)
}

/// Harmonic stack: fundamental in 150–250 Hz, six harmonics falling as
/// `1/h`, with a slow 1 % frequency wobble and a little hiss.
fn drone<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let f0 = rng.random_range(150.0..250.0);
    let fm = rng.random_range(2.0..6.0);
    let fm_phase = rng.random_range(0.0..2.0 * PI);
    let sr = f64::from(AUDIO_RATE);
    let mut phase = rng.random_range(0.0..2.0 * PI);
    (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            let f = f0 * (1.0 + 0.01 * (2.0 * PI * fm * t + fm_phase).sin());
            phase += 2.0 * PI * f / sr;
            let tone: f64 = (1..=6).map(|h| (h as f64 * phase).sin() / h as f64).sum();
            tone + 0.02 * white(rng)
        })
        .collect()
}

/// Blade slap: bursts of low-passed noise at 12–20 Hz, each decaying over
/// about 15 ms.
fn helicopter<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let rate = rng.random_range(12.0..20.0);
    let sr = f64::from(AUDIO_RATE);
    let period = sr / rate;
    let decay = (-1.0 / (0.015 * sr)).exp();
    // one-pole low-pass near 400 Hz
    let a = (-2.0 * PI * 400.0 / sr).exp();
    let mut next_pulse = rng.random_range(0.0..period);
    let (mut env, mut lp) = (0.0, 0.0);
    (0..n)
        .map(|i| {
            if i as f64 >= next_pulse {
                env = 1.0;
                next_pulse += period;
            }
            env *= decay;
            lp = a * lp + (1.0 - a) * white(rng);
            env * lp + 0.002 * white(rng)
        })
        .collect()
}

/// Pink noise from Paul Kellet's economy filter.
fn background<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    (0..n)
        .map(|_| {
            let w = white(rng);
            b0 = 0.99765 * b0 + w * 0.0990460;
            b1 = 0.96300 * b1 + w * 0.2965164;
            b2 = 0.57000 * b2 + w * 1.0526913;
            b0 + b1 + b2 + w * 0.1848
        })
        .collect()
}

/// Synthetic 44.1 kHz audio for one of the three audio classes.
pub fn synth_audio<R: Rng>(class: TargetClass, seconds: f64, rng: &mut R) -> Result<Vec<f64>, SimError> {
    let n = (seconds * f64::from(AUDIO_RATE)).round() as usize;
    let x = match class {
        TargetClass::Drone => drone(n, rng),
        TargetClass::Helicopter => helicopter(n, rng),
        TargetClass::Background => background(n, rng),
        other => return Err(SimError::NotAudioClass(other)),
    };
    Ok(normalize(x))
}

/// What the microphone hears at `t_s`: the nearest drone or helicopter in
/// earshot, else background.
pub fn audible_class(scn: &Scenario, t_s: f64) -> TargetClass {
    scn.positions_at(t_s)
        .filter(|(_, tg, _)| matches!(tg.class, TargetClass::Drone | TargetClass::Helicopter))
        .map(|(_, tg, p)| (direction(p).2, tg.class))
        .filter(|(r, _)| *r <= AUDIBLE_RANGE_M)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(TargetClass::Background, |(_, c)| c)
}

/// One audio tick worth of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioChunk {
    /// Time of the first sample.
    pub t: Timestamp,
    /// `None` during a dropout.
    pub samples: Option<Vec<f64>>,
    /// Class of the segment the chunk was cut from.
    pub truth: TargetClass,
}

/// Microphone stream cut into ticks. A fresh one-second segment is
/// synthesised each second for whatever class is audible at its start, at
/// the level of the first segment of that class run.
#[derive(Debug, Clone)]
pub struct AudioSim {
    rng: ChaCha8Rng,
    tick_samples: usize,
    rate_hz: f64,
    next_tick: u64,
    segment: Vec<f64>,
    segment_class: TargetClass,
    segment_index: Option<u64>,
    /// RMS of the first segment of the current class run. Later segments of
    /// the same class are scaled to it so a steady source has a steady level.
    level: Option<(TargetClass, f64)>,
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt()
}

impl AudioSim {
    pub fn new(scn: &Scenario) -> Self {
        let rate_hz = scn.sensors.audio.rate_hz;
        AudioSim {
            rng: sensor_rng(scn.seed, SensorId::Audio),
            tick_samples: (f64::from(AUDIO_RATE) / rate_hz).round() as usize,
            rate_hz,
            next_tick: 0,
            segment: Vec::new(),
            segment_class: TargetClass::Background,
            segment_index: None,
            level: None,
        }
    }

    pub fn tick_samples(&self) -> usize {
        self.tick_samples
    }

    fn tick_time(&self, i: u64) -> Timestamp {
        Timestamp((i as f64 * 1000.0 / self.rate_hz).round() as u64)
    }

    pub fn next_due(&self, scn: &Scenario) -> Option<Timestamp> {
        let t = self.tick_time(self.next_tick);
        (t.as_secs_f64() < scn.duration_s).then_some(t)
    }

    pub fn next_chunk(&mut self, scn: &Scenario) -> Result<Option<AudioChunk>, SimError> {
        let Some(t) = self.next_due(scn) else { return Ok(None) };
        let sr = AUDIO_RATE as usize;
        let start = self.next_tick as usize * self.tick_samples;
        self.next_tick += 1;
        let mut out = Vec::with_capacity(self.tick_samples);
        let mut truth = None;
        for pos in start..start + self.tick_samples {
            let seg = (pos / sr) as u64;
            if self.segment_index != Some(seg) {
                self.segment_class = audible_class(scn, seg as f64);
                let mut segment = synth_audio(self.segment_class, 1.0, &mut self.rng)?;
                match self.level {
                    Some((class, level)) if class == self.segment_class => {
                        let k = level / rms(&segment).max(1e-12);
                        segment.iter_mut().for_each(|v| *v *= k);
                    }
                    _ => self.level = Some((self.segment_class, rms(&segment))),
                }
                self.segment = segment;
                self.segment_index = Some(seg);
            }
            truth.get_or_insert(self.segment_class);
            out.push(self.segment[pos % sr]);
        }
        let samples = (!scn.in_dropout(SensorId::Audio, t.as_secs_f64())).then_some(out);
        Ok(Some(AudioChunk { t, samples, truth: truth.unwrap_or(TargetClass::Background) }))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::SimTarget;

    #[test]
    fn clips_are_peak_normalised() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for c in [TargetClass::Drone, TargetClass::Helicopter, TargetClass::Background] {
            let x = synth_audio(c, 0.5, &mut rng).unwrap();
            assert_eq!(x.len(), 22050);
            let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((peak - PEAK).abs() < 1e-12, "{c}");
        }
        assert!(matches!(synth_audio(TargetClass::Bird, 1.0, &mut rng), Err(SimError::NotAudioClass(_))));
    }

    #[test]
    fn stream_follows_the_nearest_target() {
        let mut s = Scenario::new("a", 3.0, 2);
        s.targets.push(SimTarget::stationary(TargetClass::Drone, 0.3, [0.0, 50.0, 10.0], 1.5));
        assert_eq!(audible_class(&s, 1.0), TargetClass::Drone);
        assert_eq!(audible_class(&s, 2.0), TargetClass::Background);
        let mut sim = AudioSim::new(&s);
        assert_eq!(sim.tick_samples(), 2205);
        let mut chunks = Vec::new();
        while let Some(c) = sim.next_chunk(&s).unwrap() {
            chunks.push(c);
        }
        assert_eq!(chunks.len(), 60);
        assert_eq!(chunks[0].truth, TargetClass::Drone);
        assert_eq!(chunks[59].truth, TargetClass::Background);
        assert_eq!(chunks[1].t, Timestamp(50));
    }

    #[test]
    fn steady_source_keeps_its_level() {
        let scn = Scenario::new("quiet", 5.0, 3);
        let mut sim = AudioSim::new(&scn);
        let mut samples = Vec::new();
        while let Some(c) = sim.next_chunk(&scn).unwrap() {
            samples.extend(c.samples.unwrap());
        }
        let sr = AUDIO_RATE as usize;
        let first = rms(&samples[..sr]);
        for seg in samples.chunks(sr) {
            assert!((rms(seg) - first).abs() < 1e-9 * first);
        }
    }
}
