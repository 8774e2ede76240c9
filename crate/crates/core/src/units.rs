//! Conversion between cyclic frequencies as quoted in experiments (MHz, kHz)
//! and the angular units (rad/s) used everywhere internally.

use std::f64::consts::TAU;

/// `f` MHz ↦ `2π·f·10⁶` rad/s.
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TAU * f_mhz * 1e6
}

/// `f` kHz ↦ `2π·f·10³` rad/s.
pub fn khz_to_angular(f_khz: f64) -> f64 {
    TAU * f_khz * 1e3
}

pub fn angular_to_mhz(w: f64) -> f64 {
    w / (TAU * 1e6)
}

pub fn angular_to_khz(w: f64) -> f64 {
    w / (TAU * 1e3)
}

pub fn seconds_to_us(t: f64) -> f64 {
    t * 1e6
}
