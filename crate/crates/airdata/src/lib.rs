//! Cooperative-traffic channel.
//!
//! Decodes demodulated Mode S extended squitter frames (DF17/18): parity,
//! identification and emitter category, airborne CPR position and ground
//! velocity. Parses the GGA and RMC sentences of the local GPS receiver.
//! Keeps a store of current aircraft plus a per-aircraft position history.

mod adsb;
mod cpr;
mod decoder;
mod error;
mod frame;
mod nmea;
mod store;

pub use adsb::{
    decode_altitude, decode_callsign, decode_category, decode_message, decode_velocity, encode_altitude,
    encode_identification, encode_position, encode_velocity, typecode, AdsbMessage, Velocity,
};
pub use cpr::{cpr_encode, decode_position, nl, CprFrame, CprFramePair, CPR_MAX_AGE_MS};
pub use decoder::AdsbDecoder;
pub use error::{AirdataError, NmeaError};
pub use frame::{crc24, parse_frame_line, ModeSFrame};
pub use nmea::{nmea_checksum, nmea_parse, NmeaFix};
pub use store::{AircraftState, AircraftUpdate, HistorySample, TrackStore};
