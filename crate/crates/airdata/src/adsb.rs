use serde::{Deserialize, Serialize};
use skyfence_core::TargetClass;

use crate::{cpr_encode, AirdataError, ModeSFrame};

const CHARSET: &[u8; 64] = b"#ABCDEFGHIJKLMNOPQRSTUVWXYZ##### ###############0123456789######";

/// `len` bits of the 56-bit message field starting at `start` (0 = MSB).
fn field(me: u64, start: u32, len: u32) -> u64 {
    (me >> (56 - start - len)) & ((1 << len) - 1)
}

pub fn typecode(me: u64) -> u8 {
    field(me, 0, 5) as u8
}

/// Eight 6-bit characters of an identification message, trailing spaces
/// removed. Codes outside the charset decode as `#`.
pub fn decode_callsign(me: u64) -> Result<String, AirdataError> {
    let tc = typecode(me);
    if !(1..=4).contains(&tc) {
        return Err(AirdataError::NotIdentification(tc));
    }
    let s: String = (0..8).map(|i| CHARSET[field(me, 8 + 6 * i, 6) as usize] as char).collect();
    Ok(s.trim_end_matches(' ').to_string())
}

/// Maps an emitter category onto the classes the ADS-B channel may report.
pub fn decode_category(tc: u8, cat: u8) -> TargetClass {
    match (tc, cat) {
        (_, 0) => TargetClass::NoData,
        (4, 7) => TargetClass::Helicopter,
        (4, 1..=6) => TargetClass::Airplane,
        (3, 6) => TargetClass::Drone,
        // glider, ultralight
        (3, 1) | (3, 4) => TargetClass::Airplane,
        _ => TargetClass::NoData,
    }
}

/// 12-bit barometric altitude field in feet. Only the 25 ft (Q = 1)
/// encoding is decoded; an all-zero field means no altitude.
pub fn decode_altitude(field12: u16) -> Option<f64> {
    if field12 == 0 || field12 & 0x10 == 0 {
        return None;
    }
    let n = ((field12 >> 5) << 4) | (field12 & 0xF);
    Some(25.0 * f64::from(n) - 1000.0)
}

pub fn encode_altitude(alt_ft: f64) -> u16 {
    let n = ((alt_ft + 1000.0) / 25.0).round().clamp(0.0, 2047.0) as u16;
    ((n >> 4) << 5) | 0x10 | (n & 0xF)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Velocity {
    pub ground_speed_kt: Option<f64>,
    /// Degrees clockwise from true north.
    pub track_deg: Option<f64>,
    pub vertical_rate_fpm: Option<f64>,
}

impl Velocity {
    pub fn from_components(v_ew_kt: f64, v_ns_kt: f64) -> (f64, f64) {
        let speed = v_ew_kt.hypot(v_ns_kt);
        let track = v_ew_kt.atan2(v_ns_kt).to_degrees().rem_euclid(360.0);
        (speed, track)
    }
}

/// Ground speed and track from an airborne velocity message (subtypes 1
/// and 2). Airspeed subtypes carry no ground vector and decode as absent.
pub fn decode_velocity(me: u64) -> Result<Velocity, AirdataError> {
    let tc = typecode(me);
    if tc != 19 {
        return Err(AirdataError::NotVelocity(tc));
    }
    let st = field(me, 5, 3);
    let vr_raw = field(me, 37, 9);
    let vertical_rate_fpm = (vr_raw != 0).then(|| {
        let v = (vr_raw - 1) as f64 * 64.0;
        if field(me, 36, 1) == 1 {
            -v
        } else {
            v
        }
    });
    if st != 1 && st != 2 {
        return Ok(Velocity { ground_speed_kt: None, track_deg: None, vertical_rate_fpm });
    }
    let scale = if st == 2 { 4.0 } else { 1.0 };
    let (ew, ns) = (field(me, 14, 10), field(me, 25, 10));
    if ew == 0 || ns == 0 {
        return Ok(Velocity { ground_speed_kt: None, track_deg: None, vertical_rate_fpm });
    }
    let signed = |sign: u64, raw: u64| {
        let v = (raw - 1) as f64 * scale;
        if sign == 1 {
            -v
        } else {
            v
        }
    };
    let v_ew = signed(field(me, 13, 1), ew);
    let v_ns = signed(field(me, 24, 1), ns);
    let (speed, track) = Velocity::from_components(v_ew, v_ns);
    Ok(Velocity { ground_speed_kt: Some(speed), track_deg: Some(track), vertical_rate_fpm })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdsbMessage {
    Identification { icao: u32, callsign: String, category_class: TargetClass },
    AirbornePosition { icao: u32, odd: bool, lat_cpr: u32, lon_cpr: u32, alt_ft: Option<f64> },
    Velocity { icao: u32, velocity: Velocity },
    /// Parity-clean but not used here (surface position, status, ...).
    Other { icao: u32, typecode: u8 },
}

impl AdsbMessage {
    pub fn icao(&self) -> u32 {
        match self {
            AdsbMessage::Identification { icao, .. }
            | AdsbMessage::AirbornePosition { icao, .. }
            | AdsbMessage::Velocity { icao, .. }
            | AdsbMessage::Other { icao, .. } => *icao,
        }
    }
}

pub fn decode_message(frame: &ModeSFrame) -> Result<AdsbMessage, AirdataError> {
    frame.check()?;
    let (icao, me) = (frame.icao(), frame.me());
    let tc = typecode(me);
    Ok(match tc {
        1..=4 => AdsbMessage::Identification {
            icao,
            callsign: decode_callsign(me)?,
            category_class: decode_category(tc, field(me, 5, 3) as u8),
        },
        9..=18 | 20..=22 => {
            let raw = field(me, 8, 12) as u16;
            let alt_ft = if tc >= 20 {
                // GNSS height in metres
                (raw != 0).then(|| f64::from(raw) / 0.3048)
            } else {
                decode_altitude(raw)
            };
            AdsbMessage::AirbornePosition {
                icao,
                odd: field(me, 21, 1) == 1,
                lat_cpr: field(me, 22, 17) as u32,
                lon_cpr: field(me, 39, 17) as u32,
                alt_ft,
            }
        }
        19 => AdsbMessage::Velocity { icao, velocity: decode_velocity(me)? },
        _ => AdsbMessage::Other { icao, typecode: tc },
    })
}

/// Identification frame; characters outside the charset become spaces.
pub fn encode_identification(icao: u32, tc: u8, cat: u8, callsign: &str) -> ModeSFrame {
    let mut me = (u64::from(tc) << 51) | (u64::from(cat & 7) << 48);
    let padded: Vec<u8> = callsign.bytes().map(|b| b.to_ascii_uppercase()).chain(std::iter::repeat(b' ')).take(8).collect();
    for (i, c) in padded.iter().enumerate() {
        let code = CHARSET.iter().skip(1).position(|x| x == c).map_or(32, |p| p + 1) as u64;
        me |= code << (42 - 6 * i);
    }
    ModeSFrame::from_me(icao, me)
}

/// Airborne position frame (typecode 11, barometric altitude).
pub fn encode_position(icao: u32, lat: f64, lon: f64, alt_ft: f64, odd: bool) -> ModeSFrame {
    let (yz, xz) = cpr_encode(lat, lon, odd);
    let me = (11u64 << 51)
        | (u64::from(encode_altitude(alt_ft)) << 36)
        | (u64::from(odd) << 34)
        | (u64::from(yz) << 17)
        | u64::from(xz);
    ModeSFrame::from_me(icao, me)
}

/// Subtype-1 velocity frame from east and north components in knots.
pub fn encode_velocity(icao: u32, v_ew_kt: f64, v_ns_kt: f64, vrate_fpm: f64) -> ModeSFrame {
    let mag = |v: f64| ((v.abs().round() as u64) + 1).min(1023);
    let vr = (((vrate_fpm.abs() / 64.0).round() as u64) + 1).min(511);
    let me = (19u64 << 51)
        | (1u64 << 48)
        | (u64::from(v_ew_kt < 0.0) << 42)
        | (mag(v_ew_kt) << 32)
        | (u64::from(v_ns_kt < 0.0) << 31)
        | (mag(v_ns_kt) << 21)
        | (u64::from(vrate_fpm < 0.0) << 19)
        | (vr << 10);
    ModeSFrame::from_me(icao, me)
}
