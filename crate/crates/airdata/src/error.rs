use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AirdataError {
    #[error("invalid hex frame: {0}")]
    BadHex(String),
    #[error("Mode S frame must be 56 or 112 bits, got {0}")]
    WrongLength(usize),
    #[error("parity check failed (remainder {0:06X})")]
    Crc(u32),
    #[error("downlink format {0} is not an extended squitter")]
    UnsupportedDf(u8),
    #[error("typecode {0} is not an identification message")]
    NotIdentification(u8),
    #[error("typecode {0} is not an airborne velocity message")]
    NotVelocity(u8),
    #[error("CPR frames are {0} ms apart")]
    StalePair(u64),
    #[error("CPR even/odd frames fall in different longitude zones")]
    NlMismatch,
    #[error("CPR latitude {0:.3} is in the polar region")]
    Polar(f64),
    #[error("CPR pair needs one even and one odd frame")]
    SameParity,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NmeaError {
    #[error("malformed sentence: {0}")]
    Malformed(String),
    #[error("checksum mismatch: sentence says {stated:02X}, computed {computed:02X}")]
    Checksum { stated: u8, computed: u8 },
    #[error("bad {field} field: {value:?}")]
    Field { field: &'static str, value: String },
}
