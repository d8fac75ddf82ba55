use std::fmt;

use serde::{Deserialize, Serialize};

/// Output class of a detector or classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetClass {
    Airplane,
    Bird,
    Drone,
    Helicopter,
    /// Audio only: nothing but ambient sound in the buffer.
    Background,
    /// ADS-B only: the emitter category field was empty.
    NoData,
}

impl TargetClass {
    pub const ALL: [TargetClass; 6] = [
        TargetClass::Airplane,
        TargetClass::Bird,
        TargetClass::Drone,
        TargetClass::Helicopter,
        TargetClass::Background,
        TargetClass::NoData,
    ];

    /// True for the four classes that describe an actual airborne object.
    pub fn is_fusable(self) -> bool {
        FUSABLE_CLASSES.contains(&self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TargetClass::Airplane => "airplane",
            TargetClass::Bird => "bird",
            TargetClass::Drone => "drone",
            TargetClass::Helicopter => "helicopter",
            TargetClass::Background => "background",
            TargetClass::NoData => "no_data",
        }
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TargetClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TargetClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown target class {s:?}"))
    }
}

/// The classes a fused decision may carry.
pub const FUSABLE_CLASSES: [TargetClass; 4] = [
    TargetClass::Airplane,
    TargetClass::Bird,
    TargetClass::Drone,
    TargetClass::Helicopter,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorId {
    /// Thermal infrared camera on the pan/tilt platform.
    Ircam,
    /// Visible-range camera on the pan/tilt platform.
    Vcam,
    /// Fish-eye motion cueing camera. Never classifies.
    Fcam,
    Audio,
    Adsb,
}

impl SensorId {
    pub const ALL: [SensorId; 5] = [
        SensorId::Ircam,
        SensorId::Vcam,
        SensorId::Fcam,
        SensorId::Audio,
        SensorId::Adsb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SensorId::Ircam => "ircam",
            SensorId::Vcam => "vcam",
            SensorId::Fcam => "fcam",
            SensorId::Audio => "audio",
            SensorId::Adsb => "adsb",
        }
    }
}

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SensorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SensorId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown sensor {s:?}"))
    }
}

/// Sensors that produce class labels.
pub const CLASSIFYING_SENSORS: [SensorId; 4] =
    [SensorId::Ircam, SensorId::Vcam, SensorId::Audio, SensorId::Adsb];

/// Output class table: which labels each sensor is able to produce.
pub fn class_allowed(sensor: SensorId, label: TargetClass) -> bool {
    use SensorId::*;
    use TargetClass::*;
    match sensor {
        Ircam | Vcam => matches!(label, Airplane | Bird | Drone | Helicopter),
        Audio => matches!(label, Drone | Helicopter | Background),
        Adsb => matches!(label, Airplane | Drone | Helicopter | NoData),
        Fcam => false,
    }
}
