//! Measurement budget: thermal floor, dephasing-limited transfer, emitted
//! photons and power under cavity decay, HEMT-limited discrimination time.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, H_PLANCK, K_BOLTZMANN};
use crate::error::{Error, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Mean thermal occupation and probability of exactly two photons for a mode
/// at `freq_ghz` (ordinary frequency) and temperature `theta_mk`.
pub fn thermal_stats(freq_ghz: f64, theta_mk: f64) -> Result<(f64, f64)> {
    positive("mode frequency", freq_ghz)?;
    if theta_mk == 0.0 {
        return Ok((0.0, 0.0));
    }
    positive("temperature", theta_mk)?;
    let x = H_PLANCK * freq_ghz * 1e9 / (K_BOLTZMANN * theta_mk * 1e-3);
    let n = 1.0 / x.exp_m1();
    Ok((n, n * n / (1.0 + n).powi(3)))
}

/// Same quantities from the Boltzmann weights e^{−kx} summed over k < `terms`.
pub fn thermal_stats_sum(freq_ghz: f64, theta_mk: f64, terms: usize) -> (f64, f64) {
    let x = H_PLANCK * freq_ghz * 1e9 / (K_BOLTZMANN * theta_mk * 1e-3);
    let w: Vec<f64> = (0..terms).map(|k| (-(k as f64) * x).exp()).collect();
    let z: f64 = w.iter().sum();
    let n = w.iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>() / z;
    (n, w.get(2).copied().unwrap_or(0.0) / z)
}

/// p_2 = 1/3 + (2/3)·exp(−3κ_φT²/(16τ)) with κ_φ = 3κ/2.
pub fn dephasing_penalty(kappa: f64, t_width: f64, tau: f64) -> Result<f64> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa must be non-negative, got {kappa}")));
    }
    positive("T", t_width)?;
    positive("tau", tau)?;
    let kappa_phi = 1.5 * kappa;
    Ok(1.0 / 3.0 + 2.0 / 3.0 * (-3.0 * kappa_phi * t_width * t_width / (16.0 * tau)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Emission {
    pub n_out: f64,
    /// 2ħω_c/(3T + t_m), W.
    pub p_m: f64,
    /// 2ħω_c·κ/2π, W.
    pub p_m_alt: f64,
    pub n_m: f64,
    pub q: f64,
}

/// SI inputs: κ in 1/s, ω_c in rad/s, times in s.
pub fn emission_estimates(p2_transfer: f64, kappa: f64, omega_c: f64, t_m: f64, t_width: f64) -> Result<Emission> {
    if !(0.0..=1.0).contains(&p2_transfer) {
        return Err(Error::Domain(format!("p2_transfer must lie in [0, 1], got {p2_transfer}")));
    }
    positive("kappa", kappa)?;
    positive("omega_c", omega_c)?;
    positive("T", t_width)?;
    if !(t_m >= 0.0) {
        return Err(Error::Domain(format!("t_m must be non-negative, got {t_m}")));
    }
    let n_out = 2.0 * p2_transfer * -(-kappa * t_m).exp_m1();
    let p_m = 2.0 * HBAR * omega_c / (3.0 * t_width + t_m);
    let p_m_alt = 2.0 * HBAR * omega_c * kappa / (2.0 * PI);
    log::debug!("P_m / P_m(alt) = {:.3}", p_m / p_m_alt);
    Ok(Emission { n_out, p_m, p_m_alt, n_m: p_m / (kappa * HBAR * omega_c), q: omega_c / kappa })
}

/// τ_m from P_m/(k_B T_N κ) = 1/√(κ τ_m).
pub fn snr_time(p_m: f64, t_noise_k: f64, kappa: f64) -> Result<f64> {
    positive("P_m", p_m)?;
    positive("T_N", t_noise_k)?;
    positive("kappa", kappa)?;
    let snr = p_m / (K_BOLTZMANN * t_noise_k * kappa);
    Ok(1.0 / (kappa * snr * snr))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementParams {
    pub theta_mk: f64,
    pub t_noise_k: f64,
    /// κ = 1/(kappa_t_factor·T).
    pub kappa_t_factor: f64,
    /// Measurement time in 1/E_J units.
    pub t_m: f64,
    /// STIRAP delay in units of T.
    pub tau: f64,
}

impl Default for MeasurementParams {
    fn default() -> Self {
        MeasurementParams { theta_mk: 50.0, t_noise_k: 2.0, kappa_t_factor: 3.0, t_m: 4.0e4, tau: 0.7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementEstimate {
    pub theta_eff_mk: f64,
    pub omega_c_ghz: f64,
    pub t_width_s: f64,
    pub t_m_s: f64,
    pub kappa: f64,
    pub kappa_phi: f64,
    pub n_th: f64,
    pub p2_th: f64,
    pub p2_transfer: f64,
    pub n_out: f64,
    pub p_m: f64,
    pub p_m_alt: f64,
    pub n_m: f64,
    pub n_m_over_n_th: f64,
    pub q: f64,
    pub t_noise_k: f64,
    pub tau_m: f64,
}

impl MeasurementEstimate {
    pub const CSV_HEADER: &'static str = "theta_mk,omega_c_ghz,T_s,t_m_s,kappa_per_s,kappa_phi_per_s,n_th,p2_th,p2_transfer,n_out,P_m_W,P_m_alt_W,n_m,n_m_over_n_th,Q,T_N_K,tau_m_s";

    pub fn csv_row(&self) -> String {
        use crate::design::fmt_num;
        [
            self.theta_eff_mk,
            self.omega_c_ghz,
            self.t_width_s,
            self.t_m_s,
            self.kappa,
            self.kappa_phi,
            self.n_th,
            self.p2_th,
            self.p2_transfer,
            self.n_out,
            self.p_m,
            self.p_m_alt,
            self.n_m,
            self.n_m_over_n_th,
            self.q,
            self.t_noise_k,
            self.tau_m,
        ]
        .iter()
        .map(|&v| fmt_num(v))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Budget for a mode at ω_c (E_J units) driven with pulse width `t_width`
/// (1/E_J units), for a device with the given E_J/2π in GHz.
pub fn estimate(omega_c_over_ej: f64, ej_ghz: f64, t_width: f64, p: &MeasurementParams) -> Result<MeasurementEstimate> {
    positive("omega_c", omega_c_over_ej)?;
    positive("ej_ghz", ej_ghz)?;
    positive("T", t_width)?;
    positive("kappa_t_factor", p.kappa_t_factor)?;
    let ej_rad = 2.0 * PI * ej_ghz * 1e9;
    let t_s = t_width / ej_rad;
    let t_m_s = p.t_m / ej_rad;
    let kappa = 1.0 / (p.kappa_t_factor * t_s);
    let freq_ghz = omega_c_over_ej * ej_ghz;
    let (n_th, p2_th) = thermal_stats(freq_ghz, p.theta_mk)?;
    let p2_transfer = dephasing_penalty(kappa, t_s, p.tau * t_s)?;
    let em = emission_estimates(p2_transfer, kappa, 2.0 * PI * freq_ghz * 1e9, t_m_s, t_s)?;
    Ok(MeasurementEstimate {
        theta_eff_mk: p.theta_mk,
        omega_c_ghz: freq_ghz,
        t_width_s: t_s,
        t_m_s,
        kappa,
        kappa_phi: 1.5 * kappa,
        n_th,
        p2_th,
        p2_transfer,
        n_out: em.n_out,
        p_m: em.p_m,
        p_m_alt: em.p_m_alt,
        n_m: em.n_m,
        n_m_over_n_th: em.n_m / n_th,
        q: em.q,
        t_noise_k: p.t_noise_k,
        tau_m: snr_time(em.p_m, p.t_noise_k, kappa)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_table_values() {
        let (n, p2) = thermal_stats(2.0, 50.0).unwrap();
        assert!((n - 0.17).abs() < 0.005 && (p2 - 0.018).abs() < 0.001, "{n} {p2}");
        let (n, p2) = thermal_stats(2.2, 50.0).unwrap();
        assert!((n - 0.14).abs() < 0.005 && (p2 - 0.012).abs() < 0.001, "{n} {p2}");
    }

    #[test]
    fn thermal_matches_brute_force() {
        for &(f, th) in &[(2.0, 50.0), (2.2, 50.0), (0.5, 100.0), (5.0, 20.0)] {
            let (n, p2) = thermal_stats(f, th).unwrap();
            let (nb, p2b) = thermal_stats_sum(f, th, 200);
            assert!((n - nb).abs() < 1e-10 && (p2 - p2b).abs() < 1e-10);
        }
    }

    #[test]
    fn thermal_cold_limit() {
        assert_eq!(thermal_stats(2.0, 0.0).unwrap(), (0.0, 0.0));
        let (n, p2) = thermal_stats(2.0, 1.0).unwrap();
        assert!(n < 1e-40 && p2 < 1e-80);
    }

    #[test]
    fn dephasing_limits() {
        let t = 3000.0;
        assert!((dephasing_penalty(0.0, t, 0.7 * t).unwrap() - 1.0).abs() < 1e-15);
        let p = dephasing_penalty(1.0 / (3.0 * t), t, 0.7 * t).unwrap();
        assert!((p - 0.917).abs() < 1e-3, "{p}");
        assert!((dephasing_penalty(1e6, t, 0.7 * t).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn set_two_budget() {
        let e = estimate(0.2, 10.0, 3000.0, &MeasurementParams::default()).unwrap();
        assert!((e.q - 1800.0).abs() < 50.0, "{}", e.q);
        assert!((e.p_m / 3e-18 - 1.0).abs() < 0.3, "{}", e.p_m);
        assert!((e.n_m - 0.363).abs() < 0.02, "{}", e.n_m);
        assert!((e.n_m_over_n_th - 2.13).abs() < 0.15, "{}", e.n_m_over_n_th);
        assert!(-(-e.kappa * e.t_m_s).exp_m1() > 0.98);
        assert!(e.tau_m > 1e-4 && e.tau_m < 1e-3, "{}", e.tau_m);
    }

    #[test]
    fn emission_bounds() {
        let (k, w, t) = (6.9e6, 2.0 * PI * 2e9, 48e-9);
        let mut last = 0.0;
        for i in 0..50 {
            let n = emission_estimates(0.9, k, w, i as f64 * 1e-7, t).unwrap().n_out;
            assert!(n >= last && n <= 1.8);
            last = n;
        }
        assert!((emission_estimates(0.9, k, w, 1.0, t).unwrap().n_out - 1.8).abs() < 1e-12);
    }

    #[test]
    fn snr_scaling() {
        let a = snr_time(3e-18, 2.0, 6.9e6).unwrap();
        assert!((snr_time(6e-18, 2.0, 6.9e6).unwrap() - a / 4.0).abs() < 1e-12 * a);
        let b = snr_time(6e-18, 2.0, 13.8e6).unwrap();
        assert!((b - a / 2.0).abs() < 1e-12 * a);
    }
}
