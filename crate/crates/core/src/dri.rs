use std::fmt;

use serde::{Deserialize, Serialize};

/// Distance bin by apparent target width in the thermal image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriBin {
    Close,
    Medium,
    Distant,
}

impl DriBin {
    pub const ALL: [DriBin; 3] = [DriBin::Close, DriBin::Medium, DriBin::Distant];

    pub fn as_str(self) -> &'static str {
        match self {
            DriBin::Close => "close",
            DriBin::Medium => "medium",
            DriBin::Distant => "distant",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DriBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Close from 15 px up, medium from 5 px up, distant below.
pub fn bin_of_width(width_px: f64) -> DriBin {
    if width_px >= 15.0 {
        DriBin::Close
    } else if width_px >= 5.0 {
        DriBin::Medium
    } else {
        DriBin::Distant
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries() {
        assert_eq!(bin_of_width(15.0), DriBin::Close);
        assert_eq!(bin_of_width(14.99), DriBin::Medium);
        assert_eq!(bin_of_width(5.0), DriBin::Medium);
        assert_eq!(bin_of_width(4.9), DriBin::Distant);
        assert_eq!(bin_of_width(0.0), DriBin::Distant);
    }
}
