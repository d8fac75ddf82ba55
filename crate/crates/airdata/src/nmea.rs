use chrono::{NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};
use skyfence_core::GeoPosition;

use crate::NmeaError;

/// Fields gathered from one GGA or RMC sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmeaFix {
    /// Sentence type, `GGA` or `RMC`.
    pub sentence: String,
    pub utc: Option<NaiveTime>,
    pub date: Option<NaiveDate>,
    pub lat_deg: Option<f64>,
    pub lon_deg: Option<f64>,
    pub alt_m: Option<f64>,
    pub fix_quality: Option<u8>,
    pub speed_kt: Option<f64>,
    pub course_deg: Option<f64>,
}

impl NmeaFix {
    fn empty(sentence: &str) -> Self {
        NmeaFix {
            sentence: sentence.to_string(),
            utc: None,
            date: None,
            lat_deg: None,
            lon_deg: None,
            alt_m: None,
            fix_quality: None,
            speed_kt: None,
            course_deg: None,
        }
    }

    /// Position if the sentence carried both coordinates.
    pub fn position(&self) -> Option<GeoPosition> {
        Some(GeoPosition { lat_deg: self.lat_deg?, lon_deg: self.lon_deg?, alt_m: self.alt_m.unwrap_or(0.0) })
    }
}

/// XOR of every byte between `$` and `*`.
pub fn nmea_checksum(body: &str) -> u8 {
    body.bytes().fold(0, |acc, b| acc ^ b)
}

/// Parses a GGA or RMC sentence. Other sentence types return `Ok(None)`
/// once their checksum has been verified.
pub fn nmea_parse(line: &str) -> Result<Option<NmeaFix>, NmeaError> {
    let line = line.trim();
    let rest = line.strip_prefix('$').ok_or_else(|| NmeaError::Malformed("missing '$'".into()))?;
    let (body, cs) = rest.rsplit_once('*').ok_or_else(|| NmeaError::Malformed("missing '*'".into()))?;
    if cs.len() != 2 {
        return Err(NmeaError::Malformed(format!("checksum field {cs:?}")));
    }
    let stated = u8::from_str_radix(cs, 16).map_err(|_| NmeaError::Malformed(format!("checksum field {cs:?}")))?;
    let computed = nmea_checksum(body);
    if stated != computed {
        return Err(NmeaError::Checksum { stated, computed });
    }

    let fields: Vec<&str> = body.split(',').collect();
    let tag = fields[0];
    if tag.len() < 5 || !tag.is_ascii() {
        return Err(NmeaError::Malformed(format!("address field {tag:?}")));
    }
    let kind = &tag[tag.len() - 3..];
    let get = |i: usize| fields.get(i).copied().unwrap_or("");
    match kind {
        "GGA" => {
            let mut fix = NmeaFix::empty(kind);
            fix.utc = time(get(1))?;
            fix.lat_deg = coord(get(2), get(3), "lat", 'N', 'S', 90.0)?;
            fix.lon_deg = coord(get(4), get(5), "lon", 'E', 'W', 180.0)?;
            fix.fix_quality = opt_num::<u8>(get(6), "fix_quality")?;
            fix.alt_m = opt_num::<f64>(get(9), "altitude")?;
            Ok(Some(fix))
        }
        "RMC" => {
            let mut fix = NmeaFix::empty(kind);
            fix.utc = time(get(1))?;
            fix.lat_deg = coord(get(3), get(4), "lat", 'N', 'S', 90.0)?;
            fix.lon_deg = coord(get(5), get(6), "lon", 'E', 'W', 180.0)?;
            fix.speed_kt = opt_num::<f64>(get(7), "speed")?;
            fix.course_deg = opt_num::<f64>(get(8), "course")?;
            fix.date = date(get(9))?;
            Ok(Some(fix))
        }
        _ => Ok(None),
    }
}

fn opt_num<T: std::str::FromStr>(s: &str, field: &'static str) -> Result<Option<T>, NmeaError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| NmeaError::Field { field, value: s.to_string() })
}

fn time(s: &str) -> Result<Option<NaiveTime>, NmeaError> {
    if s.is_empty() {
        return Ok(None);
    }
    NaiveTime::parse_from_str(s, "%H%M%S%.f")
        .map(Some)
        .map_err(|_| NmeaError::Field { field: "utc", value: s.to_string() })
}

fn date(s: &str) -> Result<Option<NaiveDate>, NmeaError> {
    if s.is_empty() {
        return Ok(None);
    }
    NaiveDate::parse_from_str(s, "%d%m%y")
        .map(Some)
        .map_err(|_| NmeaError::Field { field: "date", value: s.to_string() })
}

/// `[d]ddmm.mmmm` plus hemisphere letter to signed decimal degrees.
fn coord(v: &str, hemi: &str, field: &'static str, pos: char, neg: char, limit: f64) -> Result<Option<f64>, NmeaError> {
    if v.is_empty() && hemi.is_empty() {
        return Ok(None);
    }
    let bad = || NmeaError::Field { field, value: format!("{v},{hemi}") };
    let raw: f64 = v.parse().map_err(|_| bad())?;
    let deg = (raw / 100.0).trunc();
    let min = raw - deg * 100.0;
    if !(0.0..60.0).contains(&min) {
        return Err(bad());
    }
    let mag = deg + min / 60.0;
    if mag > limit {
        return Err(bad());
    }
    match hemi.chars().next() {
        Some(c) if c == pos => Ok(Some(mag)),
        Some(c) if c == neg => Ok(Some(-mag)),
        _ => Err(bad()),
    }
}
