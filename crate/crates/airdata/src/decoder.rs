use std::collections::HashMap;

use skyfence_core::Timestamp;

use crate::{decode_message, decode_position, AdsbMessage, AircraftUpdate, AirdataError, CprFrame, CprFramePair, ModeSFrame};

/// Stateful frame decoder: remembers each aircraft's latest even and odd
/// position frames so positions can be resolved globally.
#[derive(Debug, Clone, Default)]
pub struct AdsbDecoder {
    cpr: HashMap<u32, [Option<CprFrame>; 2]>,
}

impl AdsbDecoder {
    pub fn new() -> Self {
        AdsbDecoder::default()
    }

    /// Decodes one frame received at `t`. Parity or format failures are
    /// errors; unused message types give `Ok(None)`. A position message
    /// whose pair cannot be resolved still yields its altitude.
    pub fn feed(&mut self, frame: &ModeSFrame, t: Timestamp) -> Result<Option<AircraftUpdate>, AirdataError> {
        let msg = decode_message(frame)?;
        let mut u = AircraftUpdate::new(msg.icao(), t);
        match msg {
            AdsbMessage::Identification { callsign, category_class, .. } => {
                u.callsign = Some(callsign);
                u.category_class = Some(category_class);
            }
            AdsbMessage::AirbornePosition { icao, odd, lat_cpr, lon_cpr, alt_ft } => {
                u.altitude_ft = alt_ft;
                let slots = self.cpr.entry(icao).or_default();
                slots[usize::from(odd)] = Some(CprFrame { odd, lat_cpr, lon_cpr, t, alt_ft });
                if let [Some(even), Some(odd)] = *slots {
                    if let Ok(p) = decode_position(&CprFramePair { even, odd }) {
                        u.position = Some(p);
                    }
                }
            }
            AdsbMessage::Velocity { velocity, .. } => {
                u.ground_speed_kt = velocity.ground_speed_kt;
                u.track_deg = velocity.track_deg;
            }
            AdsbMessage::Other { .. } => return Ok(None),
        }
        Ok(Some(u))
    }
}
