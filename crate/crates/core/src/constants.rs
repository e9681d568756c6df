//! Physical constants (CODATA 2018 exact SI values).

use std::f64::consts::PI;

/// Elementary charge (C).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant (J s).
pub const H_PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = H_PLANCK / (2.0 * PI);
/// Boltzmann constant (J/K).
pub const K_BOLTZMANN: f64 = 1.380_649e-23;
/// Superconducting flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = H_PLANCK / (2.0 * E_CHARGE);
/// Reduced flux quantum ħ/2e = Φ0/2π (Wb).
pub const REDUCED_FLUX_QUANTUM: f64 = HBAR / (2.0 * E_CHARGE);

/// Energy in joules of a level whose angular frequency divided by 2π is `ghz` GHz.
pub fn ghz_to_joule(ghz: f64) -> f64 {
    H_PLANCK * ghz * 1e9
}

/// Inverse of [`ghz_to_joule`].
pub fn joule_to_ghz(joule: f64) -> f64 {
    joule / H_PLANCK / 1e9
}

/// Angular frequency (rad/s) of a frequency given in GHz.
pub fn ghz_to_angular(ghz: f64) -> f64 {
    2.0 * PI * ghz * 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_quantum_value() {
        assert!((FLUX_QUANTUM - 2.067_833_848e-15).abs() < 1e-23);
        assert!((REDUCED_FLUX_QUANTUM * 2.0 * PI - FLUX_QUANTUM).abs() < 1e-28);
    }

    #[test]
    fn ghz_round_trip() {
        let j = ghz_to_joule(10.0);
        assert!((joule_to_ghz(j) - 10.0).abs() < 1e-14);
    }
}
