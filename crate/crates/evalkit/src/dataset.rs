//! Clip files on disk.
//!
//! An annotation directory holds, per clip, `NAME.csv` with lines
//! `frame,class,x,y,w,h` and a `NAME.json` [`ClipMeta`] sidecar. A detection
//! directory holds `NAME.csv` with lines `frame,class,confidence,x,y,w,h`.
//! Both CSV files start with that header line.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skyfence_core::{BoundingBox, DriBin, SensorId, TargetClass};

use crate::{match_frame, summarize, Annotation, CountTable, EvalError, EvalParams, MetricsReport, Prediction};

/// Description of one annotated video clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipMeta {
    pub sensor: SensorId,
    pub width_px: u32,
    pub height_px: u32,
    pub hfov_deg: f64,
    /// Distance bin every frame of the clip is scored in.
    pub bin: DriBin,
    /// Main class in the clip, if it has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<TargetClass>,
}

impl ClipMeta {
    pub fn validate(&self) -> Result<(), String> {
        if !matches!(self.sensor, SensorId::Ircam | SensorId::Vcam) {
            return Err(format!("sensor {} has no detector", self.sensor));
        }
        if self.width_px == 0 || self.height_px == 0 || !(self.hfov_deg > 0.0) {
            return Err("resolution and hfov must be positive".into());
        }
        if self.class.is_some_and(|c| !c.is_fusable()) {
            return Err(format!("clip class {} is not a target class", self.class.unwrap()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub name: String,
    pub meta: ClipMeta,
    pub annotations: Vec<Annotation>,
}

#[derive(Serialize, Deserialize)]
struct AnnotationRow {
    frame: u64,
    class: TargetClass,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

#[derive(Serialize, Deserialize)]
struct PredictionRow {
    frame: u64,
    class: TargetClass,
    confidence: f64,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

fn schema(path: &Path, msg: impl ToString) -> EvalError {
    EvalError::Schema { path: path.to_path_buf(), msg: msg.to_string() }
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, EvalError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_path(path).map_err(|e| schema(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| schema(path, e))).collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| schema(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| schema(path, e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>, EvalError> {
    let path = path.as_ref();
    let rows: Vec<AnnotationRow> = read_rows(path)?;
    rows.into_iter()
        .map(|r| {
            if !r.class.is_fusable() {
                return Err(schema(path, format!("frame {}: {} is not a target class", r.frame, r.class)));
            }
            Ok(Annotation { frame: r.frame, class: r.class, bbox: BoundingBox::new(r.x, r.y, r.w, r.h) })
        })
        .collect()
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>, EvalError> {
    let path = path.as_ref();
    let rows: Vec<PredictionRow> = read_rows(path)?;
    rows.into_iter()
        .map(|r| {
            if !(0.0..=1.0).contains(&r.confidence) {
                return Err(schema(path, format!("frame {}: confidence {}", r.frame, r.confidence)));
            }
            Ok(Prediction { frame: r.frame, class: r.class, confidence: r.confidence, bbox: BoundingBox::new(r.x, r.y, r.w, r.h) })
        })
        .collect()
}

pub fn write_annotations(path: impl AsRef<Path>, annots: &[Annotation]) -> Result<(), EvalError> {
    let rows = annots.iter().map(|a| AnnotationRow { frame: a.frame, class: a.class, x: a.bbox.x, y: a.bbox.y, w: a.bbox.w, h: a.bbox.h });
    write_rows(path.as_ref(), rows)
}

pub fn write_predictions(path: impl AsRef<Path>, preds: &[Prediction]) -> Result<(), EvalError> {
    let rows = preds.iter().map(|p| PredictionRow {
        frame: p.frame,
        class: p.class,
        confidence: p.confidence,
        x: p.bbox.x,
        y: p.bbox.y,
        w: p.bbox.w,
        h: p.bbox.h,
    });
    write_rows(path.as_ref(), rows)
}

/// Writes `NAME.csv` and `NAME.json` into `dir`.
pub fn write_clip(dir: impl AsRef<Path>, clip: &Clip) -> Result<(), EvalError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_annotations(dir.join(format!("{}.csv", clip.name)), &clip.annotations)?;
    let meta = serde_json::to_string_pretty(&clip.meta).expect("meta serialises");
    fs::write(dir.join(format!("{}.json", clip.name)), meta)?;
    Ok(())
}

fn csv_files(dir: &Path) -> Result<Vec<(String, PathBuf)>, EvalError> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), p.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Every clip in an annotation directory, sorted by name.
pub fn load_clips(dir: impl AsRef<Path>) -> Result<Vec<Clip>, EvalError> {
    let dir = dir.as_ref();
    csv_files(dir)?
        .into_iter()
        .map(|(name, csv)| {
            let meta_path = dir.join(format!("{name}.json"));
            let text = fs::read_to_string(&meta_path).map_err(|e| schema(&meta_path, e))?;
            let meta: ClipMeta = serde_json::from_str(&text).map_err(|e| schema(&meta_path, e))?;
            meta.validate().map_err(|m| schema(&meta_path, m))?;
            Ok(Clip { name, meta, annotations: read_annotations(&csv)? })
        })
        .collect()
}

/// Per-clip predictions keyed by clip name.
pub fn load_predictions(dir: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<Prediction>>, EvalError> {
    csv_files(dir.as_ref())?.into_iter().map(|(name, p)| Ok((name, read_predictions(&p)?))).collect()
}

/// Counts for one clip, all in the clip's bin.
pub fn evaluate_clip(meta: &ClipMeta, annots: &[Annotation], preds: &[Prediction], p: &EvalParams) -> CountTable {
    let mut frames: BTreeMap<u64, (Vec<Annotation>, Vec<Prediction>)> = BTreeMap::new();
    for a in annots {
        frames.entry(a.frame).or_default().0.push(*a);
    }
    for pr in preds {
        frames.entry(pr.frame).or_default().1.push(*pr);
    }
    let mut table = CountTable::default();
    for (a, pr) in frames.values() {
        for (class, c) in match_frame(pr, a, p) {
            table.add(meta.bin, class, &c);
        }
    }
    table
}

/// Metrics for each sensor found in an annotation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub params: EvalParams,
    pub clips: usize,
    pub sensors: BTreeMap<SensorId, MetricsReport>,
    pub counts: BTreeMap<SensorId, CountTable>,
}

pub fn evaluate(clips: &[Clip], preds: &BTreeMap<String, Vec<Prediction>>, p: &EvalParams) -> Result<EvaluationReport, EvalError> {
    p.validate()?;
    if let Some(name) = preds.keys().find(|k| !clips.iter().any(|c| &c.name == *k)) {
        return Err(EvalError::UnknownClip(name.clone()));
    }
    let mut counts: BTreeMap<SensorId, CountTable> = BTreeMap::new();
    for clip in clips {
        let pr = preds.get(&clip.name).map(Vec::as_slice).unwrap_or(&[]);
        counts.entry(clip.meta.sensor).or_default().merge(&evaluate_clip(&clip.meta, &clip.annotations, pr, p));
    }
    let sensors = counts.iter().map(|(s, t)| (*s, summarize(t))).collect();
    Ok(EvaluationReport { params: *p, clips: clips.len(), sensors, counts })
}

/// Loads both directories and evaluates. A clip without a detection file
/// counts as having no detections.
pub fn evaluate_dirs(annotations: impl AsRef<Path>, detections: impl AsRef<Path>, p: &EvalParams) -> Result<EvaluationReport, EvalError> {
    evaluate(&load_clips(annotations)?, &load_predictions(detections)?, p)
}
