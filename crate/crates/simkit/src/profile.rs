use serde::{Deserialize, Serialize};
use skyfence_core::{DriBin, SensorId, TargetClass};

use crate::SimError;

/// Precision and recall of one detector for one class in one distance bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileCell {
    pub class: TargetClass,
    pub bin: DriBin,
    pub precision: f64,
    pub recall: f64,
}

/// Shape parameters of a Beta distribution mapped onto `[0.5, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BetaParams {
    fn default() -> Self {
        BetaParams { alpha: 8.0, beta: 2.0 }
    }
}

fn default_confusion() -> f64 {
    0.5
}

/// Statistical stand-in for a trained detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorProfile {
    pub sensor: SensorId,
    pub cells: Vec<ProfileCell>,
    #[serde(default)]
    pub confidence: BetaParams,
    /// Confidence of false reports; same as `confidence` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_confidence: Option<BetaParams>,
    /// Share of false reports placed on a visible target of another class
    /// (a misclassification). The rest land on empty sky.
    #[serde(default = "default_confusion")]
    pub confusion_fraction: f64,
}

const CLASSES: [TargetClass; 4] = [TargetClass::Airplane, TargetClass::Bird, TargetClass::Drone, TargetClass::Helicopter];

fn table(sensor: SensorId, rows: [([f64; 4], [f64; 4]); 3]) -> DetectorProfile {
    let cells = DriBin::ALL
        .iter()
        .zip(rows)
        .flat_map(|(&bin, (p, r))| {
            CLASSES.iter().enumerate().map(move |(i, &class)| ProfileCell { class, bin, precision: p[i], recall: r[i] })
        })
        .collect();
    DetectorProfile {
        sensor,
        cells,
        confidence: BetaParams::default(),
        false_confidence: None,
        confusion_fraction: default_confusion(),
    }
}

impl DetectorProfile {
    /// Thermal detector results per class (airplane, bird, drone, helicopter)
    /// and distance bin.
    pub fn ircam_default() -> Self {
        table(
            SensorId::Ircam,
            [
                ([0.9197, 0.7591, 0.9159, 0.9993], [0.87367, 0.85087, 0.87907, 0.87927]),
                ([0.82817, 0.50637, 0.89517, 0.95547], [0.70397, 0.70337, 0.80347, 0.83557]),
                ([0.78227, 0.61617, 0.82787, 0.79827], [0.40437, 0.74317, 0.48367, 0.45647]),
            ],
        )
    }

    /// Visible-camera detector results, same layout as the thermal table.
    pub fn vcam_default() -> Self {
        table(
            SensorId::Vcam,
            [
                ([0.8989, 0.8284, 0.8283, 0.9225], [0.7355, 0.7949, 0.9536, 0.9832]),
                ([0.8391, 0.7186, 0.7710, 0.9680], [0.7306, 0.7830, 0.7987, 0.7526]),
                ([0.7726, 0.6479, 0.8378, 0.6631], [0.7785, 0.7841, 0.5519, 0.5171]),
            ],
        )
    }

    /// Every cell set to the same precision and recall.
    pub fn uniform(sensor: SensorId, precision: f64, recall: f64) -> Self {
        let row = ([precision; 4], [recall; 4]);
        table(sensor, [row, row, row])
    }

    pub fn cell(&self, class: TargetClass, bin: DriBin) -> Result<&ProfileCell, SimError> {
        self.cells
            .iter()
            .find(|c| c.class == class && c.bin == bin)
            .ok_or(SimError::MissingProfile { sensor: self.sensor, class, bin })
    }

    pub fn cell_mut(&mut self, class: TargetClass, bin: DriBin) -> Option<&mut ProfileCell> {
        self.cells.iter_mut().find(|c| c.class == class && c.bin == bin)
    }

    /// Precision must lie in (0, 1]. Recall may be zero, which silences the
    /// cell.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(format!("{} profile: {m}", self.sensor)));
        for c in &self.cells {
            if !(c.precision > 0.0 && c.precision <= 1.0) || !(0.0..=1.0).contains(&c.recall) {
                return bad(format!("{} / {}: P={} R={}", c.class, c.bin, c.precision, c.recall));
            }
        }
        for b in std::iter::once(&self.confidence).chain(&self.false_confidence) {
            if !(b.alpha > 0.0 && b.beta > 0.0) {
                return bad("beta parameters must be positive".into());
            }
        }
        if !(0.0..=1.0).contains(&self.confusion_fraction) {
            return bad(format!("confusion_fraction {}", self.confusion_fraction));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_every_cell() {
        for p in [DetectorProfile::ircam_default(), DetectorProfile::vcam_default()] {
            assert_eq!(p.cells.len(), 12);
            p.validate().unwrap();
            for class in CLASSES {
                for bin in DriBin::ALL {
                    p.cell(class, bin).unwrap();
                }
            }
        }
        let ir = DetectorProfile::ircam_default();
        let c = ir.cell(TargetClass::Drone, DriBin::Close).unwrap();
        assert_eq!((c.precision, c.recall), (0.9159, 0.87907));
        let v = DetectorProfile::vcam_default();
        let c = v.cell(TargetClass::Helicopter, DriBin::Distant).unwrap();
        assert_eq!((c.precision, c.recall), (0.6631, 0.5171));
    }

    #[test]
    fn missing_cell_is_an_error() {
        let mut p = DetectorProfile::ircam_default();
        p.cells.retain(|c| c.class != TargetClass::Bird);
        assert!(matches!(p.cell(TargetClass::Bird, DriBin::Medium), Err(SimError::MissingProfile { .. })));
    }

    #[test]
    fn zero_precision_rejected() {
        assert!(DetectorProfile::uniform(SensorId::Ircam, 0.0, 0.5).validate().is_err());
        assert!(DetectorProfile::uniform(SensorId::Ircam, 1.0, 0.0).validate().is_ok());
    }
}
