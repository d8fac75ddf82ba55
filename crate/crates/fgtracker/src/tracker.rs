//! Constant-velocity multi-target Kalman tracker over blob centroids.
//!
//! State is `[x, y, vx, vy]` in pixels and pixels per frame. Process noise
//! is the discrete white-noise acceleration model scaled by `q`; the
//! measurement is the blob centroid with isotropic variance `r`.
//!
//! Association is greedy nearest neighbour on predicted positions: all
//! (track, blob) pairs inside `gate_px` are sorted by distance and taken in
//! order while both sides are still free.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use skyfence_core::{pixel_to_offset, AngularOffset, CameraModel};

use crate::{Blob, TrackerError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerParams {
    pub gate_px: f64,
    pub confirm_hits: u32,
    pub delete_misses: u32,
    pub process_noise: f64,
    pub measurement_noise: f64,
    pub dt: f64,
    /// Initial velocity variance of a freshly spawned track.
    pub init_velocity_var: f64,
}

impl Default for TrackerParams {
    fn default() -> Self {
        TrackerParams {
            gate_px: 40.0,
            confirm_hits: 3,
            delete_misses: 10,
            process_noise: 1.0,
            measurement_noise: 4.0,
            dt: 1.0,
            init_velocity_var: 25.0,
        }
    }
}

impl TrackerParams {
    pub fn validate(&self) -> Result<(), TrackerError> {
        let ok = self.gate_px > 0.0
            && self.confirm_hits > 0
            && self.delete_misses > 0
            && self.process_noise >= 0.0
            && self.measurement_noise >= 0.0
            && self.dt > 0.0
            && self.init_velocity_var > 0.0;
        if ok {
            Ok(())
        } else {
            Err(TrackerError::InvalidParams("tracker parameters must be positive".into()))
        }
    }

    fn transition(&self) -> Matrix4<f64> {
        let dt = self.dt;
        Matrix4::new(
            1.0, 0.0, dt, 0.0, //
            0.0, 1.0, 0.0, dt, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        )
    }

    fn process_cov(&self) -> Matrix4<f64> {
        let dt = self.dt;
        let (a, b, c) = (dt.powi(4) / 4.0, dt.powi(3) / 2.0, dt * dt);
        self.process_noise
            * Matrix4::new(
                a, 0.0, b, 0.0, //
                0.0, a, 0.0, b, //
                b, 0.0, c, 0.0, //
                0.0, b, 0.0, c,
            )
    }
}

fn observation() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub state: Vector4<f64>,
    pub covariance: Matrix4<f64>,
    /// Frames since creation, counting the spawning frame.
    pub age: u32,
    pub hits: u32,
    pub misses: u32,
    pub confirmed: bool,
}

impl Track {
    fn spawn(id: u64, blob: &Blob, p: &TrackerParams) -> Self {
        let (x, y) = blob.centroid;
        let r = p.measurement_noise.max(1e-6);
        Track {
            id,
            state: Vector4::new(x, y, 0.0, 0.0),
            covariance: Matrix4::from_diagonal(&Vector4::new(r, r, p.init_velocity_var, p.init_velocity_var)),
            age: 1,
            hits: 1,
            misses: 0,
            confirmed: p.confirm_hits <= 1,
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.state[0], self.state[1])
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.state[2], self.state[3])
    }

    fn predict(&mut self, p: &TrackerParams) {
        let f = p.transition();
        self.state = f * self.state;
        self.covariance = symmetrize(f * self.covariance * f.transpose() + p.process_cov());
    }

    fn correct(&mut self, z: Vector2<f64>, p: &TrackerParams) {
        let h = observation();
        let r = Matrix2::identity() * p.measurement_noise;
        let innovation = z - h * self.state;
        let s = h * self.covariance * h.transpose() + r;
        let Some(s_inv) = s.try_inverse() else {
            // degenerate (zero noise, zero covariance): snap to measurement
            self.state[0] = z[0];
            self.state[1] = z[1];
            return;
        };
        let k = self.covariance * h.transpose() * s_inv;
        self.state += k * innovation;
        // Joseph form keeps the covariance symmetric and PSD
        let i_kh = Matrix4::identity() - k * h;
        self.covariance = symmetrize(i_kh * self.covariance * i_kh.transpose() + k * r * k.transpose());
    }
}

fn symmetrize(m: Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

#[derive(Debug, Clone)]
pub struct Tracker {
    params: TrackerParams,
    tracks: Vec<Track>,
    next_id: u64,
}

impl Tracker {
    pub fn new(params: TrackerParams) -> Result<Self, TrackerError> {
        params.validate()?;
        Ok(Tracker { params, tracks: Vec::new(), next_id: 1 })
    }

    pub fn params(&self) -> &TrackerParams {
        &self.params
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn confirmed(&self) -> impl Iterator<Item = &Track> {
        self.tracks.iter().filter(|t| t.confirmed)
    }

    /// Predict, associate, correct, coast, spawn and prune.
    pub fn step(&mut self, blobs: &[Blob]) -> &[Track] {
        let p = self.params;
        for t in &mut self.tracks {
            t.predict(&p);
        }

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, t) in self.tracks.iter().enumerate() {
            let (px, py) = t.position();
            for (bi, b) in blobs.iter().enumerate() {
                let d = (b.centroid.0 - px).hypot(b.centroid.1 - py);
                if d <= p.gate_px {
                    pairs.push((d, ti, bi));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut track_used = vec![false; self.tracks.len()];
        let mut blob_used = vec![false; blobs.len()];
        for (_, ti, bi) in pairs {
            if track_used[ti] || blob_used[bi] {
                continue;
            }
            track_used[ti] = true;
            blob_used[bi] = true;
            let t = &mut self.tracks[ti];
            t.correct(Vector2::new(blobs[bi].centroid.0, blobs[bi].centroid.1), &p);
            t.hits += 1;
            t.misses = 0;
        }

        for (t, used) in self.tracks.iter_mut().zip(&track_used) {
            t.age += 1;
            if !used {
                t.misses += 1;
            }
            if t.hits >= p.confirm_hits {
                t.confirmed = true;
            }
        }
        self.tracks.retain(|t| t.misses <= p.delete_misses);

        for (b, used) in blobs.iter().zip(blob_used) {
            if !used {
                self.tracks.push(Track::spawn(self.next_id, b, &p));
                self.next_id += 1;
            }
        }
        &self.tracks
    }
}

/// Confirmed track with the longest history; ties go to the lowest id.
pub fn best_track<'a>(tracks: impl IntoIterator<Item = &'a Track>) -> Option<u64> {
    tracks
        .into_iter()
        .filter(|t| t.confirmed)
        .max_by(|a, b| a.age.cmp(&b.age).then(b.id.cmp(&a.id)))
        .map(|t| t.id)
}

/// Direction of a track's position relative to the camera boresight.
pub fn track_direction(track: &Track, cam: &CameraModel) -> Result<AngularOffset, TrackerError> {
    let (x, y) = track.position();
    Ok(pixel_to_offset(cam, x, y)?)
}
