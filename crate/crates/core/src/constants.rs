//! Physical constants and unit helpers.
//!
//! Everything inside the crate is SI: amperes, farads, seconds, rad/s for
//! angular frequencies and 1/s for rates. GHz, μA and friends only appear at
//! the configuration and report boundary.

use std::f64::consts::PI;

/// Magnetic flux quantum Φ₀ in webers.
pub const FLUX_QUANTUM: f64 = 2.067833848e-15;

/// Reduced Planck constant ħ in J·s.
pub const HBAR: f64 = 1.054571817e-34;

pub const TWO_PI: f64 = 2.0 * PI;

/// Converts a frequency in hertz to an angular frequency in rad/s.
#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    TWO_PI * f
}

/// Converts an angular frequency in rad/s to hertz.
#[inline]
pub fn rad_to_hz(w: f64) -> f64 {
    w / TWO_PI
}
