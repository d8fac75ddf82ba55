use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::EvalError;

/// Per-frame drone outputs of several sources over a common frame clock.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timeline {
    /// Frames where a drone was inside at least one platform camera's view.
    pub opportunity: Vec<bool>,
    /// For each source (a sensor name or "fused"), whether it output a
    /// drone classification in that frame.
    pub sources: BTreeMap<String, Vec<bool>>,
}

impl Timeline {
    pub fn new(frames: usize) -> Self {
        Timeline { opportunity: vec![false; frames], sources: BTreeMap::new() }
    }

    pub fn source_mut(&mut self, name: &str) -> &mut Vec<bool> {
        let n = self.opportunity.len();
        self.sources.entry(name.to_string()).or_insert_with(|| vec![false; n])
    }
}

/// Share of opportunity frames in which each source output a drone; 0 for
/// every source when there was no opportunity.
pub fn persistence(t: &Timeline) -> Result<BTreeMap<String, f64>, EvalError> {
    let n = t.opportunity.len();
    let total = t.opportunity.iter().filter(|&&o| o).count();
    t.sources
        .iter()
        .map(|(name, out)| {
            if out.len() != n {
                return Err(EvalError::TimelineLength { name: name.clone(), got: out.len(), expected: n });
            }
            let hits = t.opportunity.iter().zip(out).filter(|(&o, &d)| o && d).count();
            Ok((name.clone(), if total == 0 { 0.0 } else { hits as f64 / total as f64 }))
        })
        .collect()
}
