use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use skyfence_core::{BoundingBox, TargetClass};

use crate::EvalError;

/// Intersection over union of two boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    a.iou(b)
}

/// Ground-truth box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub frame: u64,
    pub class: TargetClass,
    pub bbox: BoundingBox,
}

/// Detector output box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub frame: u64,
    pub class: TargetClass,
    pub confidence: f64,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalParams {
    pub iou_threshold: f64,
    pub confidence_threshold: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams { iou_threshold: 0.5, confidence_threshold: 0.5 }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<(), EvalError> {
        for (name, v) in [("iou_threshold", self.iou_threshold), ("confidence_threshold", self.confidence_threshold)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(EvalError::InvalidParams(format!("{name} {v} not in (0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn add(&mut self, o: &Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }

    /// `None` when nothing was predicted.
    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    /// `None` when nothing was annotated.
    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }
}

/// Of several predictions on one object, the one overlapping `target` most;
/// equal overlap goes to the higher confidence, then to the earlier one.
pub fn select_strongest<'a>(target: &BoundingBox, preds: &'a [Prediction]) -> Result<&'a Prediction, EvalError> {
    let mut best: Option<(&Prediction, f64)> = None;
    for p in preds {
        let v = iou(target, &p.bbox);
        match best {
            Some((b, bv)) if v < bv || (v == bv && p.confidence <= b.confidence) => {}
            _ => best = Some((p, v)),
        }
    }
    best.map(|b| b.0).ok_or(EvalError::Empty)
}

/// Per-class TP/FP/FN for one frame.
///
/// Predictions below the confidence threshold are dropped. The rest, most
/// confident first, each take the unmatched same-class annotation they
/// overlap most, provided the IoU reaches the threshold.
pub fn match_frame(preds: &[Prediction], annots: &[Annotation], p: &EvalParams) -> BTreeMap<TargetClass, Counts> {
    let mut out: BTreeMap<TargetClass, Counts> = BTreeMap::new();
    let mut kept: Vec<&Prediction> = preds.iter().filter(|x| x.confidence >= p.confidence_threshold).collect();
    kept.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    let mut taken = vec![false; annots.len()];
    for pr in kept {
        let mut best: Option<(usize, f64)> = None;
        for (i, a) in annots.iter().enumerate() {
            if taken[i] || a.class != pr.class {
                continue;
            }
            let v = iou(&a.bbox, &pr.bbox);
            if v >= p.iou_threshold && best.map_or(true, |(_, bv)| v > bv) {
                best = Some((i, v));
            }
        }
        let c = out.entry(pr.class).or_default();
        match best {
            Some((i, _)) => {
                taken[i] = true;
                c.tp += 1;
            }
            None => c.fp += 1,
        }
    }
    for (a, t) in annots.iter().zip(taken) {
        if !t {
            out.entry(a.class).or_default().fn_ += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(x, y, w, h)
    }

    fn pred(class: TargetClass, confidence: f64, bbox: BoundingBox) -> Prediction {
        Prediction { frame: 0, class, confidence, bbox }
    }

    #[test]
    fn iou_examples() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bx(20.0, 20.0, 5.0, 5.0)), 0.0);
        assert!((iou(&a, &bx(5.0, 0.0, 10.0, 10.0)) - 50.0 / 150.0).abs() < 1e-9);
    }

    #[test]
    fn strongest_box() {
        let t = bx(0.0, 0.0, 10.0, 10.0);
        let one = [pred(TargetClass::Drone, 0.7, bx(1.0, 0.0, 10.0, 10.0))];
        assert_eq!(select_strongest(&t, &one).unwrap(), &one[0]);
        // IoU 0.6 vs 0.9
        let a = pred(TargetClass::Drone, 0.9, bx(0.0, 0.0, 6.0, 10.0));
        let b = pred(TargetClass::Drone, 0.6, bx(0.0, 0.0, 9.0, 10.0));
        assert_eq!(select_strongest(&t, &[a, b]).unwrap(), &b);
        // equal IoU 0.7, confidences 0.6 and 0.8
        let c = pred(TargetClass::Drone, 0.6, bx(0.0, 0.0, 7.0, 10.0));
        let d = pred(TargetClass::Drone, 0.8, bx(3.0, 0.0, 7.0, 10.0));
        assert!((iou(&t, &c.bbox) - 0.7).abs() < 1e-12 && (iou(&t, &d.bbox) - 0.7).abs() < 1e-12);
        assert_eq!(select_strongest(&t, &[c, d]).unwrap(), &d);
        assert!(matches!(select_strongest(&t, &[]), Err(EvalError::Empty)));
    }

    #[test]
    fn matching_examples() {
        let p = EvalParams::default();
        let a = Annotation { frame: 0, class: TargetClass::Drone, bbox: bx(0.0, 0.0, 10.0, 10.0) };
        let perfect = match_frame(&[pred(TargetClass::Drone, 0.9, a.bbox)], &[a], &p);
        assert_eq!(perfect[&TargetClass::Drone], Counts { tp: 1, fp: 0, fn_: 0 });

        // IoU 0.4
        let weak = pred(TargetClass::Drone, 0.9, bx(0.0, 0.0, 4.0, 10.0));
        let m = match_frame(&[weak], &[a], &p);
        assert_eq!(m[&TargetClass::Drone], Counts { tp: 0, fp: 1, fn_: 1 });

        let bird = pred(TargetClass::Bird, 0.9, bx(0.0, 0.0, 9.0, 10.0));
        let m = match_frame(&[bird], &[a], &p);
        assert_eq!(m[&TargetClass::Bird], Counts { tp: 0, fp: 1, fn_: 0 });
        assert_eq!(m[&TargetClass::Drone], Counts { tp: 0, fp: 0, fn_: 1 });

        let faint = pred(TargetClass::Drone, 0.3, a.bbox);
        let m = match_frame(&[faint], &[a], &p);
        assert_eq!(m[&TargetClass::Drone], Counts { tp: 0, fp: 0, fn_: 1 });
    }

    #[test]
    fn duplicate_predictions_count_once() {
        let a = Annotation { frame: 0, class: TargetClass::Drone, bbox: bx(0.0, 0.0, 10.0, 10.0) };
        let preds = [pred(TargetClass::Drone, 0.6, a.bbox), pred(TargetClass::Drone, 0.9, bx(1.0, 0.0, 10.0, 10.0))];
        let m = match_frame(&preds, &[a], &EvalParams::default());
        assert_eq!(m[&TargetClass::Drone], Counts { tp: 1, fp: 1, fn_: 0 });
    }

    #[test]
    fn params_validate() {
        assert!(EvalParams::default().validate().is_ok());
        assert!(EvalParams { iou_threshold: 0.0, ..Default::default() }.validate().is_err());
        assert!(EvalParams { confidence_threshold: 1.5, ..Default::default() }.validate().is_err());
    }
}
