//! Detection evaluation.
//!
//! Predictions are matched to annotations frame by frame ([`match_frame`]),
//! counted per distance bin and class ([`CountTable`]) and summarised as
//! macro precision, recall and F1 per bin plus the mean bin F1
//! ([`summarize`]). [`persistence`] measures how often each source reported
//! a drone while one was in view.

mod dataset;
mod error;
mod matching;
mod metrics;
mod persistence;

pub use dataset::{
    evaluate, evaluate_clip, evaluate_dirs, load_clips, load_predictions, read_annotations, read_predictions,
    write_annotations, write_clip, write_predictions, Clip, ClipMeta, EvaluationReport,
};
pub use error::EvalError;
pub use matching::{iou, match_frame, select_strongest, Annotation, Counts, EvalParams, Prediction};
pub use metrics::{f1, summarize, BinMetrics, ClassMetrics, CountTable, MetricsReport, RateRow};
pub use persistence::{persistence, Timeline};
