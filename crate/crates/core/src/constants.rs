//! Physical constants (CODATA 2018 exact SI values) and unit helpers.
//!
//! Internally every energy is stored as an angular frequency `E/ħ` in rad/s.
//! Configuration files and CSV outputs use ordinary frequencies `E/h` in Hz.

use std::f64::consts::PI;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Magnetic flux quantum `h/2e` in webers.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// Reduced flux quantum `ħ/2e` in webers.
pub const REDUCED_FLUX_QUANTUM: f64 = HBAR / (2.0 * ELEMENTARY_CHARGE);

/// Resistance quantum `ħ/e²` in ohms.
pub const RESISTANCE_UNIT: f64 = HBAR / (ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);

#[inline]
pub fn hz_to_angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

#[inline]
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Bose-Einstein occupation of a mode at angular frequency `omega` and
/// temperature `kelvin`.
pub fn thermal_occupation(omega: f64, kelvin: f64) -> f64 {
    if kelvin <= 0.0 {
        return 0.0;
    }
    1.0 / ((HBAR * omega / (BOLTZMANN * kelvin)).exp_m1())
}

/// `sin(πx)` with exact zeros at integers and exact ±1 at half-integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        0.0
    } else if r == 0.5 {
        1.0
    } else if r == 1.5 {
        -1.0
    } else {
        (PI * r).sin()
    }
}

/// `cos(πx)` with exact zeros at half-integers and exact ±1 at integers.
pub fn cos_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.5 || r == 1.5 {
        0.0
    } else if r == 0.0 {
        1.0
    } else if r == 1.0 {
        -1.0
    } else {
        (PI * r).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_trig_points() {
        assert_eq!(cos_pi(0.5), 0.0);
        assert_eq!(cos_pi(-0.5), 0.0);
        assert_eq!(sin_pi(1.0), 0.0);
        assert_eq!(sin_pi(0.5), 1.0);
        assert!((sin_pi(0.3) - (0.3 * PI).sin()).abs() < 1e-15);
        assert!((cos_pi(-0.3) - (0.3 * PI).cos()).abs() < 1e-15);
    }

    #[test]
    fn flux_quantum_value() {
        assert!((FLUX_QUANTUM - 2.067_833_848e-15).abs() < 1e-23);
    }

    #[test]
    fn ten_millikelvin_megahertz_bath() {
        // ~200 phonons for a 1 MHz beam at 10 mK
        let n = thermal_occupation(hz_to_angular(1e6), 0.01);
        assert!((n - 207.9).abs() < 0.5, "{n}");
    }
}
