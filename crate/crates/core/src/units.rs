//! Unit conventions.
//!
//! Frequencies are stored internally as angular frequencies in rad/μs, which
//! is numerically 2π × (frequency in MHz). Times are in μs and lengths in μm.
//! Configuration files and tables quote frequencies as f/2π in MHz.

use std::f64::consts::TAU;

/// Default van der Waals coefficient C₆/2π for the |71S₁/₂⟩ state, in MHz·μm⁶.
pub const DEFAULT_C6_MHZ_UM6: f64 = 1.023e6;

/// Convert a frequency quoted as f/2π in MHz to rad/μs.
#[inline]
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    f_mhz * TAU
}

/// Convert rad/μs back to f/2π in MHz.
#[inline]
pub fn angular_to_mhz(w: f64) -> f64 {
    w / TAU
}
