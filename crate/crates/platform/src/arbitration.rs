use serde::{Deserialize, Serialize};
use skyfence_core::Timestamp;

use crate::ControllerParams;

/// Who drives the platform this tick. `Hold` keeps the current pose when
/// no camera is tracking and the idle period has not yet elapsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlSource {
    Ircam,
    Vcam,
    Fcam,
    Pattern,
    Manual,
    Hold,
}

impl ControlSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlSource::Ircam => "ircam",
            ControlSource::Vcam => "vcam",
            ControlSource::Fcam => "fcam",
            ControlSource::Pattern => "pattern",
            ControlSource::Manual => "manual",
            ControlSource::Hold => "hold",
        }
    }
}

impl std::fmt::Display for ControlSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Time of the latest steering-capable report from each source.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SourceTimes {
    pub ircam: Option<Timestamp>,
    pub vcam: Option<Timestamp>,
    pub fcam: Option<Timestamp>,
    pub manual: Option<Timestamp>,
}

fn fresh(t: Option<Timestamp>, now: Timestamp, window_ms: u64) -> bool {
    t.is_some_and(|t| t <= now && now.since(t) <= window_ms)
}

/// Manual first, then the freshest camera by priority ircam > vcam > fcam,
/// then the search pattern once every camera has been silent for
/// `idle_to_search_ms` (counted from time zero if none ever reported).
pub fn arbitrate(times: &SourceTimes, now: Timestamp, p: &ControllerParams) -> ControlSource {
    if fresh(times.manual, now, p.manual_timeout_ms) {
        return ControlSource::Manual;
    }
    for (t, src) in [(times.ircam, ControlSource::Ircam), (times.vcam, ControlSource::Vcam), (times.fcam, ControlSource::Fcam)] {
        if fresh(t, now, p.hold_ms) {
            return src;
        }
    }
    let last = [times.ircam, times.vcam, times.fcam].into_iter().flatten().max().unwrap_or(Timestamp(0));
    if now.since(last) >= p.idle_to_search_ms {
        ControlSource::Pattern
    } else {
        ControlSource::Hold
    }
}
