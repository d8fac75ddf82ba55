use skyfence_airdata::{encode_identification, encode_position, encode_velocity, nmea_checksum, ModeSFrame};
use skyfence_core::{GeoPosition, SensorId, Timestamp};

use crate::{Scenario, SimError, SimTarget};

const POSITION_PERIOD_MS: u64 = 500;
const VELOCITY_PERIOD_MS: u64 = 1000;
const IDENT_PERIOD_MS: u64 = 5000;
const M_TO_FT: f64 = 1.0 / 0.3048;
const MS_TO_KT: f64 = 1.943_844;
const MS_TO_FPM: f64 = 196.850_394;

/// Geodetic position of a target at `t_s`.
pub fn target_geo(scn: &Scenario, tg: &SimTarget, t_s: f64) -> Option<GeoPosition> {
    tg.position_at(t_s).map(|p| GeoPosition::from_enu(&scn.site, p))
}

/// East, north and up velocity by central difference, m/s.
fn velocity(tg: &SimTarget, t_s: f64) -> [f64; 3] {
    let h = 0.25;
    let (Some(a), Some(b)) = (tg.position_at(t_s - h).or(tg.position_at(t_s)), tg.position_at(t_s + h).or(tg.position_at(t_s))) else {
        return [0.0; 3];
    };
    let dt = if tg.position_at(t_s - h).is_some() && tg.position_at(t_s + h).is_some() { 2.0 * h } else { h };
    [(b[0] - a[0]) / dt, (b[1] - a[1]) / dt, (b[2] - a[2]) / dt]
}

fn schedule(offset: u64, period: u64, from: u64, to: u64) -> impl Iterator<Item = u64> {
    let first = if from <= offset { 0 } else { (from - offset).div_ceil(period) };
    (first..).map(move |k| offset + k * period).take_while(move |&t| t < to)
}

/// Extended squitters broadcast by transponder-equipped targets in
/// `[from, to)`, sorted by time.
///
/// Each aircraft alternates even and odd position frames every 500 ms,
/// sends velocity every second and identification every 5 s, on its own
/// phase offset.
pub fn adsb_frames(scn: &Scenario, from: Timestamp, to: Timestamp) -> Result<Vec<(Timestamp, ModeSFrame)>, SimError> {
    let mut out = Vec::new();
    if !scn.sensors.adsb.enabled {
        return Ok(out);
    }
    for (k, tg) in scn.targets.iter().enumerate() {
        let Some(id) = &tg.adsb else { continue };
        let icao = id.icao_u32()?;
        let offset = (k as u64 * 97) % POSITION_PERIOD_MS;
        let (f, t) = (from.millis(), to.millis());
        for ms in schedule(offset, POSITION_PERIOD_MS, f, t) {
            let ts = ms as f64 / 1000.0;
            let Some(g) = target_geo(scn, tg, ts) else { continue };
            let odd = ((ms - offset) / POSITION_PERIOD_MS) % 2 == 1;
            out.push((Timestamp(ms), encode_position(icao, g.lat_deg, g.lon_deg, g.alt_m * M_TO_FT, odd)));
        }
        for ms in schedule(offset + 250, VELOCITY_PERIOD_MS, f, t) {
            let ts = ms as f64 / 1000.0;
            if tg.position_at(ts).is_none() {
                continue;
            }
            let v = velocity(tg, ts);
            out.push((Timestamp(ms), encode_velocity(icao, v[0] * MS_TO_KT, v[1] * MS_TO_KT, v[2] * MS_TO_FPM)));
        }
        for ms in schedule(offset + 125, IDENT_PERIOD_MS, f, t) {
            if tg.position_at(ms as f64 / 1000.0).is_none() {
                continue;
            }
            out.push((Timestamp(ms), encode_identification(icao, id.typecode, id.category, &id.callsign)));
        }
    }
    out.retain(|(t, _)| !scn.in_dropout(SensorId::Adsb, t.as_secs_f64()));
    out.sort_by_key(|(t, f)| (*t, f.icao()));
    Ok(out)
}

fn dm(deg: f64, deg_digits: usize) -> String {
    let d = deg.abs().trunc();
    let m = (deg.abs() - d) * 60.0;
    format!("{:0w$}{:07.4}", d as u32, m, w = deg_digits)
}

/// GGA sentence for a fix at `pos`, stamped `t` after 12:00:00 UTC.
pub fn gga_sentence(t: Timestamp, pos: &GeoPosition) -> String {
    let s = 12 * 3600 + t.millis() / 1000;
    let cs = (t.millis() % 1000) / 10;
    let body = format!(
        "GPGGA,{:02}{:02}{:02}.{:02},{},{},{},{},1,08,0.9,{:.1},M,0.0,M,,",
        (s / 3600) % 24,
        (s / 60) % 60,
        s % 60,
        cs,
        dm(pos.lat_deg, 2),
        if pos.lat_deg < 0.0 { 'S' } else { 'N' },
        dm(pos.lon_deg, 3),
        if pos.lon_deg < 0.0 { 'W' } else { 'E' },
        pos.alt_m,
    );
    format!("${body}*{:02X}", nmea_checksum(&body))
}

/// Once-per-period GGA fixes of the platform site in `[from, to)`.
pub fn gps_sentences(scn: &Scenario, from: Timestamp, to: Timestamp) -> Vec<(Timestamp, String)> {
    if !scn.sensors.gps.enabled {
        return Vec::new();
    }
    let period = (1000.0 / scn.sensors.gps.rate_hz).round().max(1.0) as u64;
    schedule(0, period, from.millis(), to.millis())
        .map(Timestamp)
        .map(|t| (t, gga_sentence(t, &scn.site)))
        .collect()
}
