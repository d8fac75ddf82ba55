use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use skyfence_core::{GeoPosition, TargetClass, Timestamp};

mod icao_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(icao: &u32, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{icao:06X}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
        let s = String::deserialize(d)?;
        u32::from_str_radix(&s, 16).map_err(serde::de::Error::custom)
    }
}

/// Everything known about one aircraft.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftState {
    #[serde(with = "icao_hex")]
    pub icao: u32,
    pub callsign: String,
    pub category_class: TargetClass,
    pub position: Option<GeoPosition>,
    pub altitude_ft: Option<f64>,
    pub ground_speed_kt: Option<f64>,
    pub track_deg: Option<f64>,
    pub last_seen: Timestamp,
}

impl AircraftState {
    pub fn new(icao: u32, t: Timestamp) -> Self {
        AircraftState {
            icao,
            callsign: String::new(),
            category_class: TargetClass::NoData,
            position: None,
            altitude_ft: None,
            ground_speed_kt: None,
            track_deg: None,
            last_seen: t,
        }
    }

    /// Fields present in `u` replace the stored ones.
    pub fn merge(&mut self, u: &AircraftUpdate) {
        if let Some(c) = &u.callsign {
            self.callsign.clone_from(c);
        }
        if let Some(c) = u.category_class {
            self.category_class = c;
        }
        if u.position.is_some() {
            self.position = u.position;
        }
        if u.altitude_ft.is_some() {
            self.altitude_ft = u.altitude_ft;
        }
        if u.ground_speed_kt.is_some() {
            self.ground_speed_kt = u.ground_speed_kt;
        }
        if u.track_deg.is_some() {
            self.track_deg = u.track_deg;
        }
        self.last_seen = self.last_seen.max(u.t);
    }
}

/// The fields carried by one decoded message.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AircraftUpdate {
    #[serde(with = "icao_hex")]
    pub icao: u32,
    pub t: Timestamp,
    pub callsign: Option<String>,
    pub category_class: Option<TargetClass>,
    pub position: Option<GeoPosition>,
    pub altitude_ft: Option<f64>,
    pub ground_speed_kt: Option<f64>,
    pub track_deg: Option<f64>,
}

impl AircraftUpdate {
    pub fn new(icao: u32, t: Timestamp) -> Self {
        AircraftUpdate { icao, t, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistorySample {
    pub t: Timestamp,
    pub position: GeoPosition,
    pub altitude_ft: Option<f64>,
}

/// Current aircraft keyed by ICAO address, plus a 1 Hz position history per
/// address that outlives the aircraft's presence in `current`.
#[derive(Debug, Clone)]
pub struct TrackStore {
    current: BTreeMap<u32, AircraftState>,
    history: BTreeMap<u32, VecDeque<HistorySample>>,
    capacity: usize,
    stale_ms: u64,
    sample_ms: u64,
}

impl Default for TrackStore {
    fn default() -> Self {
        TrackStore::new()
    }
}

impl TrackStore {
    pub const HISTORY_CAPACITY: usize = 600;
    pub const STALE_MS: u64 = 60_000;
    pub const SAMPLE_MS: u64 = 1_000;

    pub fn new() -> Self {
        TrackStore {
            current: BTreeMap::new(),
            history: BTreeMap::new(),
            capacity: Self::HISTORY_CAPACITY,
            stale_ms: Self::STALE_MS,
            sample_ms: Self::SAMPLE_MS,
        }
    }

    pub fn update(&mut self, u: &AircraftUpdate, now: Timestamp) {
        let state = self.current.entry(u.icao).or_insert_with(|| AircraftState::new(u.icao, u.t));
        state.merge(u);
        if let Some(position) = u.position {
            let ring = self.history.entry(u.icao).or_default();
            let due = ring.back().map_or(true, |last| u.t.since(last.t) >= self.sample_ms);
            if due {
                if ring.len() == self.capacity {
                    ring.pop_front();
                }
                ring.push_back(HistorySample { t: u.t, position, altitude_ft: state.altitude_ft });
            }
        }
        self.evict(now);
    }

    /// Drops aircraft not heard from for more than a minute; history stays.
    pub fn evict(&mut self, now: Timestamp) {
        let stale = self.stale_ms;
        self.current.retain(|_, s| now.since(s.last_seen) <= stale);
    }

    pub fn current(&self) -> impl Iterator<Item = &AircraftState> {
        self.current.values()
    }

    pub fn get(&self, icao: u32) -> Option<&AircraftState> {
        self.current.get(&icao)
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    pub fn history(&self, icao: u32) -> Option<&VecDeque<HistorySample>> {
        self.history.get(&icao)
    }

    pub fn history_all(&self) -> &BTreeMap<u32, VecDeque<HistorySample>> {
        &self.history
    }
}
