//! Compact Position Reporting, airborne format (17-bit), global decoding.

use serde::{Deserialize, Serialize};
use skyfence_core::{GeoPosition, Timestamp};

use crate::AirdataError;

const SCALE: f64 = 131072.0; // 2^17
const NZ: f64 = 15.0;

/// Even and odd frames further apart than this are not combined.
pub const CPR_MAX_AGE_MS: u64 = 10_000;

/// Number of longitude zones at latitude `lat`.
pub fn nl(lat: f64) -> u32 {
    let lat = lat.abs();
    if lat == 0.0 {
        return 59;
    }
    if lat == 87.0 {
        return 2;
    }
    if lat > 87.0 {
        return 1;
    }
    let a = 1.0 - (std::f64::consts::PI / (2.0 * NZ)).cos();
    let b = lat.to_radians().cos().powi(2);
    (2.0 * std::f64::consts::PI / (1.0 - a / b).acos()).floor() as u32
}

fn modulo(x: f64, y: f64) -> f64 {
    x - y * (x / y).floor()
}

/// One encoded airborne position with its reception time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CprFrame {
    pub odd: bool,
    pub lat_cpr: u32,
    pub lon_cpr: u32,
    pub t: Timestamp,
    pub alt_ft: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CprFramePair {
    pub even: CprFrame,
    pub odd: CprFrame,
}

impl CprFramePair {
    pub fn new(a: CprFrame, b: CprFrame) -> Result<Self, AirdataError> {
        match (a.odd, b.odd) {
            (false, true) => Ok(CprFramePair { even: a, odd: b }),
            (true, false) => Ok(CprFramePair { even: b, odd: a }),
            _ => Err(AirdataError::SameParity),
        }
    }

    fn newer(&self) -> &CprFrame {
        if self.even.t > self.odd.t {
            &self.even
        } else {
            &self.odd
        }
    }
}

/// Encodes `(lat, lon)` as a 17-bit CPR pair for the even (`odd = false`)
/// or odd format.
pub fn cpr_encode(lat: f64, lon: f64, odd: bool) -> (u32, u32) {
    let i = if odd { 1.0 } else { 0.0 };
    let dlat = 360.0 / (4.0 * NZ - i);
    let yz = (SCALE * modulo(lat, dlat) / dlat + 0.5).floor();
    let rlat = dlat * (yz / SCALE + (lat / dlat).floor());
    let dlon = 360.0 / (f64::from(nl(rlat)) - i).max(1.0);
    let xz = (SCALE * modulo(lon, dlon) / dlon + 0.5).floor();
    ((yz as u32) & 0x1FFFF, (xz as u32) & 0x1FFFF)
}

/// Globally unambiguous decoding. Latitude and longitude come from the more
/// recently received frame; the altitude (if any) from the same frame.
pub fn decode_position(pair: &CprFramePair) -> Result<GeoPosition, AirdataError> {
    let gap = pair.even.t.millis().abs_diff(pair.odd.t.millis());
    if gap > CPR_MAX_AGE_MS {
        return Err(AirdataError::StalePair(gap));
    }
    let lat_e = f64::from(pair.even.lat_cpr) / SCALE;
    let lat_o = f64::from(pair.odd.lat_cpr) / SCALE;
    let lon_e = f64::from(pair.even.lon_cpr) / SCALE;
    let lon_o = f64::from(pair.odd.lon_cpr) / SCALE;

    let j = (59.0 * lat_e - 60.0 * lat_o + 0.5).floor();
    let mut rlat_e = 360.0 / 60.0 * (modulo(j, 60.0) + lat_e);
    let mut rlat_o = 360.0 / 59.0 * (modulo(j, 59.0) + lat_o);
    if rlat_e >= 270.0 {
        rlat_e -= 360.0;
    }
    if rlat_o >= 270.0 {
        rlat_o -= 360.0;
    }
    if nl(rlat_e) != nl(rlat_o) {
        return Err(AirdataError::NlMismatch);
    }

    let use_even = pair.even.t > pair.odd.t;
    let lat = if use_even { rlat_e } else { rlat_o };
    if lat.abs() >= 87.0 {
        return Err(AirdataError::Polar(lat));
    }
    let nl_lat = f64::from(nl(lat));
    let m = (lon_e * (nl_lat - 1.0) - lon_o * nl_lat + 0.5).floor();
    let (ni, frac) = if use_even { (nl_lat.max(1.0), lon_e) } else { ((nl_lat - 1.0).max(1.0), lon_o) };
    let mut lon = 360.0 / ni * (modulo(m, ni) + frac);
    if lon > 180.0 {
        lon -= 360.0;
    }
    let alt_m = pair.newer().alt_ft.map_or(0.0, |ft| ft * 0.3048);
    Ok(GeoPosition { lat_deg: lat, lon_deg: lon, alt_m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nl_matches_transition_table() {
        // zone boundaries from the published lookup table
        let table = [
            (10.47047130, 59),
            (14.82817437, 58),
            (45.54626723, 42),
            (59.95459277, 30),
            (76.39684391, 14),
            (86.53536998, 3),
        ];
        for (edge, below) in table {
            assert_eq!(nl(edge - 1e-6), below, "below {edge}");
            assert_eq!(nl(edge + 1e-6), below - 1, "above {edge}");
            assert_eq!(nl(-(edge - 1e-6)), below);
        }
        assert_eq!(nl(0.0), 59);
        assert_eq!(nl(87.0), 2);
        assert_eq!(nl(88.0), 1);
    }

    fn frame(odd: bool, lat: u32, lon: u32, t: u64) -> CprFrame {
        CprFrame { odd, lat_cpr: lat, lon_cpr: lon, t: Timestamp(t), alt_ft: None }
    }

    #[test]
    fn stale_and_parity_errors() {
        let a = frame(false, 1, 1, 0);
        let b = frame(true, 1, 1, 10_001);
        let p = CprFramePair::new(a, b).unwrap();
        assert_eq!(decode_position(&p), Err(AirdataError::StalePair(10_001)));
        assert_eq!(CprFramePair::new(a, a), Err(AirdataError::SameParity));
    }

    #[test]
    fn encode_decode_point() {
        let (lat, lon) = (-33.8688, 151.2093);
        let (le, oe) = cpr_encode(lat, lon, false);
        let (lo, oo) = cpr_encode(lat, lon, true);
        let p = CprFramePair { even: frame(false, le, oe, 0), odd: frame(true, lo, oo, 1000) };
        let g = decode_position(&p).unwrap();
        assert!((g.lat_deg - lat).abs() < 1e-4);
        assert!((g.lon_deg - lon).abs() < 1e-4);
    }
}
