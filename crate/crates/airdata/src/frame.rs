use skyfence_core::Timestamp;

use crate::AirdataError;

const GENERATOR: u128 = 0x1FF_F409;

/// Mode S parity remainder over a 56- or 112-bit message, parity bits
/// included. A valid extended squitter leaves 0.
pub fn crc24(bytes: &[u8]) -> Result<u32, AirdataError> {
    let bits = bytes.len() * 8;
    if bits != 56 && bits != 112 {
        return Err(AirdataError::WrongLength(bits));
    }
    let mut v = bytes.iter().fold(0u128, |acc, &b| (acc << 8) | u128::from(b));
    for i in (24..bits).rev() {
        if (v >> i) & 1 == 1 {
            v ^= GENERATOR << (i - 24);
        }
    }
    Ok((v & 0xFF_FFFF) as u32)
}

/// A 112-bit extended squitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeSFrame {
    bytes: [u8; 14],
}

impl ModeSFrame {
    pub fn from_bytes(bytes: [u8; 14]) -> Self {
        ModeSFrame { bytes }
    }

    pub fn from_hex(hex: &str) -> Result<Self, AirdataError> {
        let hex = hex.trim();
        if !hex.is_ascii() {
            return Err(AirdataError::BadHex(hex.to_string()));
        }
        if hex.len() != 28 {
            return Err(AirdataError::WrongLength(hex.len() * 4));
        }
        let mut bytes = [0u8; 14];
        for (i, b) in bytes.iter_mut().enumerate() {
            *b = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).map_err(|_| AirdataError::BadHex(hex.to_string()))?;
        }
        Ok(ModeSFrame { bytes })
    }

    /// Builds DF17 with capability 5 and computes the parity field.
    pub fn from_me(icao: u32, me: u64) -> Self {
        let mut bytes = [0u8; 14];
        bytes[0] = (17 << 3) | 5;
        bytes[1..4].copy_from_slice(&icao.to_be_bytes()[1..]);
        bytes[4..11].copy_from_slice(&me.to_be_bytes()[1..]);
        let pi = crc24(&bytes).expect("112-bit frame");
        bytes[11..].copy_from_slice(&pi.to_be_bytes()[1..]);
        ModeSFrame { bytes }
    }

    pub fn bytes(&self) -> &[u8; 14] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02X}")).collect()
    }

    pub fn df(&self) -> u8 {
        self.bytes[0] >> 3
    }

    pub fn ca(&self) -> u8 {
        self.bytes[0] & 7
    }

    pub fn icao(&self) -> u32 {
        u32::from_be_bytes([0, self.bytes[1], self.bytes[2], self.bytes[3]])
    }

    /// The 56-bit message field, right-aligned.
    pub fn me(&self) -> u64 {
        self.bytes[4..11].iter().fold(0u64, |acc, &b| (acc << 8) | u64::from(b))
    }

    pub fn pi(&self) -> u32 {
        u32::from_be_bytes([0, self.bytes[11], self.bytes[12], self.bytes[13]])
    }

    pub fn crc(&self) -> u32 {
        crc24(&self.bytes).expect("112-bit frame")
    }

    /// Rejects anything that is not a parity-clean DF17/18.
    pub fn check(&self) -> Result<(), AirdataError> {
        let df = self.df();
        if df != 17 && df != 18 {
            return Err(AirdataError::UnsupportedDf(df));
        }
        match self.crc() {
            0 => Ok(()),
            r => Err(AirdataError::Crc(r)),
        }
    }

    pub fn with_bit_flipped(&self, bit: usize) -> Self {
        let mut f = *self;
        f.bytes[bit / 8] ^= 0x80 >> (bit % 8);
        f
    }
}

/// One frame per line, optionally prefixed by `@<millis> `. dump1090-style
/// `*...;` wrapping is tolerated. Blank and `#` lines yield `None`.
pub fn parse_frame_line(line: &str) -> Option<Result<(Option<Timestamp>, ModeSFrame), AirdataError>> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return None;
    }
    let (t, rest) = match line.strip_prefix('@') {
        Some(r) => {
            let (ts, hex) = r.split_once(char::is_whitespace).unwrap_or((r, ""));
            match ts.parse::<u64>() {
                Ok(ms) => (Some(Timestamp(ms)), hex.trim()),
                Err(_) => return Some(Err(AirdataError::BadHex(line.to_string()))),
            }
        }
        None => (None, line),
    };
    let hex = rest.trim_start_matches('*').trim_end_matches(';');
    Some(ModeSFrame::from_hex(hex).map(|f| (t, f)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KLM: &str = "8D4840D6202CC371C32CE0576098";

    #[test]
    fn zero_frame_has_zero_remainder() {
        assert_eq!(crc24(&[0u8; 14]).unwrap(), 0);
    }

    #[test]
    fn reference_frame_is_clean() {
        let f = ModeSFrame::from_hex(KLM).unwrap();
        assert_eq!(f.crc(), 0);
        assert_eq!(f.df(), 17);
        assert_eq!(f.icao(), 0x4840D6);
        assert!(f.check().is_ok());
        assert_eq!(f.to_hex(), KLM);
    }

    #[test]
    fn last_bit_flip_detected() {
        let f = ModeSFrame::from_hex(KLM).unwrap().with_bit_flipped(111);
        assert_eq!(f.crc(), 1);
        assert!(matches!(f.check(), Err(AirdataError::Crc(1))));
    }

    #[test]
    fn every_single_bit_flip_detected() {
        let f = ModeSFrame::from_hex(KLM).unwrap();
        for bit in 0..112 {
            assert_ne!(f.with_bit_flipped(bit).crc(), 0, "bit {bit}");
        }
    }

    #[test]
    fn wrong_lengths() {
        assert!(matches!(crc24(&[0u8; 10]), Err(AirdataError::WrongLength(80))));
        assert!(ModeSFrame::from_hex("8D4840").is_err());
        assert!(ModeSFrame::from_hex("ZZ4840D6202CC371C32CE0576098").is_err());
    }

    #[test]
    fn from_me_round_trip() {
        let f = ModeSFrame::from_hex(KLM).unwrap();
        let g = ModeSFrame::from_me(f.icao(), f.me());
        assert_eq!(g, f);
    }

    #[test]
    fn line_formats() {
        let (t, f) = parse_frame_line(&format!("@1500 {KLM}")).unwrap().unwrap();
        assert_eq!(t, Some(Timestamp(1500)));
        assert_eq!(f.to_hex(), KLM);
        let (t, _) = parse_frame_line(&format!("*{KLM};")).unwrap().unwrap();
        assert_eq!(t, None);
        assert!(parse_frame_line("  ").is_none());
        assert!(parse_frame_line("# comment").is_none());
        assert!(parse_frame_line("@x 00").unwrap().is_err());
    }
}
