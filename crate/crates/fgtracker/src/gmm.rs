//! Per-pixel adaptive Gaussian mixture background model (Stauffer–Grimson).
//!
//! Each pixel keeps `K` weighted 1-D Gaussians over intensity. For a new
//! value `x`:
//!
//! 1. the matching component is the nearest one (in standard deviations)
//!    with `|x - μ| < match_sigma * σ`;
//! 2. weights decay as `w ← (1 - α) w + α·[matched]`;
//! 3. the matched component moves toward `x` at rate `α`, both mean and
//!    variance; if nothing matched, the lightest component is replaced by a
//!    new one centred on `x` with `init_sigma` and weight `min_weight`;
//! 4. weights are renormalised to sum to one.
//!
//! Components are ranked by weight. The heaviest ones whose cumulative weight
//! first exceeds `bg_ratio` describe the background; a pixel is foreground
//! when its matched component is outside that set.

use serde::{Deserialize, Serialize};

use crate::{ForegroundMask, GrayFrame, TrackerError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmmParams {
    /// Mixture components per pixel.
    pub k: usize,
    pub alpha: f64,
    pub match_sigma: f64,
    pub bg_ratio: f64,
    pub init_sigma: f64,
    pub min_weight: f64,
    /// Lower bound on each component's standard deviation.
    pub min_sigma: f64,
}

impl Default for GmmParams {
    fn default() -> Self {
        GmmParams {
            k: 3,
            alpha: 0.01,
            match_sigma: 2.5,
            bg_ratio: 0.7,
            init_sigma: 15.0,
            min_weight: 0.01,
            min_sigma: 3.0,
        }
    }
}

impl GmmParams {
    pub fn validate(&self) -> Result<(), TrackerError> {
        let bad = |m: &str| Err(TrackerError::InvalidParams(m.to_string()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        // alpha = 0 is accepted as a frozen model
        if !(0.0..1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1)");
        }
        if !(self.bg_ratio > 0.0 && self.bg_ratio <= 1.0) {
            return bad("bg_ratio must lie in (0, 1]");
        }
        if self.match_sigma <= 0.0 || self.init_sigma <= 0.0 || self.min_sigma < 0.0 {
            return bad("sigmas must be positive");
        }
        if !(self.min_weight > 0.0 && self.min_weight < 1.0) {
            return bad("min_weight must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Component {
    weight: f64,
    mean: f64,
    var: f64,
}

/// Background model for one camera. Created empty; the first frame seeds it.
#[derive(Debug, Clone)]
pub struct GmmModel {
    width: u32,
    height: u32,
    params: GmmParams,
    components: Vec<Component>,
    seeded: bool,
}

impl GmmModel {
    pub fn new(width: u32, height: u32, params: GmmParams) -> Result<Self, TrackerError> {
        params.validate()?;
        let n = width as usize * height as usize * params.k;
        let blank = Component { weight: 0.0, mean: 0.0, var: params.init_sigma * params.init_sigma };
        Ok(GmmModel { width, height, params, components: vec![blank; n], seeded: false })
    }

    pub fn params(&self) -> &GmmParams {
        &self.params
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Weights of the mixture at pixel `(x, y)`.
    pub fn weights_at(&self, x: u32, y: u32) -> Vec<f64> {
        let base = (y as usize * self.width as usize + x as usize) * self.params.k;
        self.components[base..base + self.params.k].iter().map(|c| c.weight).collect()
    }

    fn seed(&mut self, frame: &GrayFrame) {
        let k = self.params.k;
        let var = self.params.init_sigma * self.params.init_sigma;
        for (i, &px) in frame.pixels().iter().enumerate() {
            let mix = &mut self.components[i * k..(i + 1) * k];
            for (j, c) in mix.iter_mut().enumerate() {
                *c = Component { weight: if j == 0 { 1.0 } else { 0.0 }, mean: f64::from(px), var };
            }
        }
        self.seeded = true;
    }

    /// Updates the model with `frame` and classifies its pixels.
    pub fn update(&mut self, frame: &GrayFrame) -> Result<ForegroundMask, TrackerError> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(TrackerError::DimensionMismatch {
                want_w: self.width,
                want_h: self.height,
                got_w: frame.width(),
                got_h: frame.height(),
            });
        }
        if !self.seeded {
            self.seed(frame);
            return Ok(ForegroundMask::empty(self.width, self.height));
        }
        let p = self.params;
        let k = p.k;
        let bits = frame
            .pixels()
            .iter()
            .zip(self.components.chunks_exact_mut(k))
            .map(|(&px, mix)| update_pixel(mix, f64::from(px), &p))
            .collect();
        ForegroundMask::from_bits(self.width, self.height, bits)
    }
}

/// Runs one model update; see the module docs.
pub fn gmm_update(model: &mut GmmModel, frame: &GrayFrame) -> Result<ForegroundMask, TrackerError> {
    model.update(frame)
}

fn update_pixel(mix: &mut [Component], x: f64, p: &GmmParams) -> bool {
    let min_var = p.min_sigma * p.min_sigma;

    let mut matched: Option<usize> = None;
    let mut best = f64::INFINITY;
    for (j, c) in mix.iter().enumerate() {
        if c.weight <= 0.0 {
            continue;
        }
        let d = (x - c.mean).abs() / c.var.sqrt();
        if d < p.match_sigma && d < best {
            best = d;
            matched = Some(j);
        }
    }

    for (j, c) in mix.iter_mut().enumerate() {
        let hit = if matched == Some(j) { 1.0 } else { 0.0 };
        c.weight = (1.0 - p.alpha) * c.weight + p.alpha * hit;
    }

    let owner = match matched {
        Some(j) => {
            let c = &mut mix[j];
            c.mean += p.alpha * (x - c.mean);
            let dev = x - c.mean;
            c.var = ((1.0 - p.alpha) * c.var + p.alpha * dev * dev).max(min_var);
            j
        }
        None => {
            let j = lightest(mix);
            mix[j] = Component { weight: p.min_weight, mean: x, var: p.init_sigma * p.init_sigma };
            j
        }
    };

    let total: f64 = mix.iter().map(|c| c.weight).sum();
    for c in mix.iter_mut() {
        c.weight /= total;
    }

    !is_background(mix, owner, p.bg_ratio)
}

fn lightest(mix: &[Component]) -> usize {
    let mut idx = 0;
    for (j, c) in mix.iter().enumerate() {
        if c.weight < mix[idx].weight {
            idx = j;
        }
    }
    idx
}

/// `owner` is background when the components ranked strictly ahead of it
/// carry less than `ratio` of the total weight.
fn is_background(mix: &[Component], owner: usize, ratio: f64) -> bool {
    let w = mix[owner].weight;
    let ahead: f64 = mix
        .iter()
        .enumerate()
        .filter(|&(j, c)| c.weight > w || (c.weight == w && j < owner))
        .map(|(_, c)| c.weight)
        .sum();
    ahead < ratio
}
