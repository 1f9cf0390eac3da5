//! Unit system: energies in cm⁻¹, times in fs, ħ = 1.
//!
//! A wavenumber ν̃ corresponds to the angular frequency ω = 2π c ν̃ in rad/fs.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Speed of light in cm/fs.
pub const SPEED_OF_LIGHT_CM_PER_FS: f64 = 2.997_924_58e-5;

/// Conversion factor from cm⁻¹ to rad/fs.
pub const RAD_PER_FS_PER_WAVENUMBER: f64 = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_FS;

/// An energy in cm⁻¹.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Wavenumber(pub f64);

/// A time in fs.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Femtoseconds(pub f64);

/// A rate in fs⁻¹.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rate(pub f64);

impl Wavenumber {
    /// Angular frequency in rad/fs.
    pub fn angular(self) -> f64 {
        self.0 * RAD_PER_FS_PER_WAVENUMBER
    }

    pub fn from_angular(rad_per_fs: f64) -> Self {
        Wavenumber(rad_per_fs / RAD_PER_FS_PER_WAVENUMBER)
    }

    /// Phase accumulated over `t`, in rad.
    pub fn phase(self, t: Femtoseconds) -> f64 {
        self.angular() * t.0
    }

    /// Oscillation period 2π/ω.
    pub fn period(self) -> Femtoseconds {
        Femtoseconds(2.0 * std::f64::consts::PI / self.angular())
    }
}

impl Rate {
    /// Rate whose inverse is `lifetime`, e.g. `Rate::per(Femtoseconds(500.0))`.
    pub fn per(lifetime: Femtoseconds) -> Self {
        Rate(1.0 / lifetime.0)
    }

    pub fn lifetime(self) -> Femtoseconds {
        Femtoseconds(1.0 / self.0)
    }

    /// The same rate expressed as an energy width in cm⁻¹.
    pub fn as_wavenumber(self) -> Wavenumber {
        Wavenumber::from_angular(self.0)
    }
}

impl Femtoseconds {
    pub fn from_microseconds(us: f64) -> Self {
        Femtoseconds(us * 1e9)
    }

    pub fn from_nanoseconds(ns: f64) -> Self {
        Femtoseconds(ns * 1e6)
    }
}

macro_rules! scalar_ops {
    ($t:ident) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                $t(self.0 + rhs.0)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                $t(self.0 - rhs.0)
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $t(-self.0)
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, rhs: f64) -> $t {
                $t(self.0 * rhs)
            }
        }
    };
}

scalar_ops!(Wavenumber);
scalar_ops!(Femtoseconds);
scalar_ops!(Rate);

impl fmt::Display for Wavenumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} cm^-1", self.0)
    }
}

impl fmt::Display for Femtoseconds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} fs", self.0)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3} fs)^-1", 1.0 / self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vibrational_period_near_22_fs() {
        let p = Wavenumber(1500.0).period();
        assert!((p.0 - 22.24).abs() < 0.01, "{p}");
    }

    #[test]
    fn rate_width_round_trip() {
        let r = Rate::per(Femtoseconds(112.5));
        let back = r.as_wavenumber().angular();
        assert!((back - r.0).abs() / r.0 < 1e-12);
    }
}
