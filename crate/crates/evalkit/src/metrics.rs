use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use skyfence_core::{DriBin, TargetClass};

use crate::Counts;

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Detection counts by distance bin and class.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountTable {
    pub cells: BTreeMap<DriBin, BTreeMap<TargetClass, Counts>>,
}

impl CountTable {
    pub fn add(&mut self, bin: DriBin, class: TargetClass, c: &Counts) {
        self.cells.entry(bin).or_default().entry(class).or_default().add(c);
    }

    pub fn merge(&mut self, other: &CountTable) {
        for (bin, classes) in &other.cells {
            for (class, c) in classes {
                self.add(*bin, *class, c);
            }
        }
    }

    pub fn get(&self, bin: DriBin, class: TargetClass) -> Counts {
        self.cells.get(&bin).and_then(|m| m.get(&class)).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: TargetClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
    /// `None` when the class was never predicted in this bin.
    pub precision: Option<f64>,
    /// `None` when the class was never annotated in this bin.
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMetrics {
    pub bin: DriBin,
    pub classes: Vec<ClassMetrics>,
    /// Unweighted mean of the defined class precisions.
    pub precision: f64,
    /// Unweighted mean of the defined class recalls.
    pub recall: f64,
    pub f1: f64,
}

impl BinMetrics {
    fn from_classes(bin: DriBin, classes: Vec<ClassMetrics>) -> Self {
        let mean = |v: Vec<f64>| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        let precision = mean(classes.iter().filter_map(|c| c.precision).collect());
        let recall = mean(classes.iter().filter_map(|c| c.recall).collect());
        BinMetrics { bin, classes, precision, recall, f1: f1(precision, recall) }
    }

    pub fn class(&self, class: TargetClass) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.class == class)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub bins: Vec<BinMetrics>,
    /// Mean of the bin F1 scores.
    pub overall_f1: f64,
}

/// One distance bin of a published table: class, precision, recall.
pub type RateRow = (DriBin, Vec<(TargetClass, f64, f64)>);

impl MetricsReport {
    fn from_bins(bins: Vec<BinMetrics>) -> Self {
        let overall_f1 = if bins.is_empty() { 0.0 } else { bins.iter().map(|b| b.f1).sum::<f64>() / bins.len() as f64 };
        MetricsReport { bins, overall_f1 }
    }

    /// Report built directly from per-class precision and recall, as
    /// published in result tables.
    pub fn from_rates(rows: &[RateRow]) -> Self {
        let bins = rows
            .iter()
            .map(|(bin, cells)| {
                let classes = cells
                    .iter()
                    .map(|&(class, p, r)| ClassMetrics { class, counts: None, precision: Some(p), recall: Some(r) })
                    .collect();
                BinMetrics::from_classes(*bin, classes)
            })
            .collect();
        Self::from_bins(bins)
    }

    pub fn bin(&self, bin: DriBin) -> Option<&BinMetrics> {
        self.bins.iter().find(|b| b.bin == bin)
    }
}

/// Per-bin macro precision, recall and F1, and their mean over bins.
/// Classes that were neither annotated nor predicted in a bin are left out;
/// bins with no data at all are skipped.
pub fn summarize(table: &CountTable) -> MetricsReport {
    let bins = table
        .cells
        .iter()
        .filter(|(_, classes)| classes.values().any(|c| c.tp + c.fp + c.fn_ > 0))
        .map(|(&bin, classes)| {
            let classes = classes
                .iter()
                .filter(|(_, c)| c.tp + c.fp + c.fn_ > 0)
                .map(|(&class, c)| ClassMetrics { class, counts: Some(*c), precision: c.precision(), recall: c.recall() })
                .collect();
            BinMetrics::from_classes(bin, classes)
        })
        .collect();
    MetricsReport::from_bins(bins)
}
