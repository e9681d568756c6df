//! Figures of merit for faithful conversion of virtual photons.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::atom::{AaSpectrum, LEVEL_E, LEVEL_F, LEVEL_G, LEVEL_U};
use crate::circuit::CircuitDesign;
use crate::design::fmt_num;
use crate::eqr::{Label, LabeledEigensystem};
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::study::{prepare, StudyOptions};

/// Amplitudes smaller than this count as zero when forming ratios.
pub const AMPLITUDE_FLOOR: f64 = 1e-13;

/// A = (ε_gu − ε_eg)/(2ε_eg) · γ_ge²/γ_ug². Returns +∞ when γ_ug vanishes.
pub fn simple_criterion(spec: &AaSpectrum) -> Result<f64> {
    if spec.n_levels() < 3 {
        return Err(Error::Domain("the simple criterion needs three levels".into()));
    }
    let eps_gu = spec.splitting(LEVEL_U, LEVEL_G);
    let eps_eg = spec.splitting(LEVEL_G, LEVEL_E);
    let g_ge = spec.gamma[(LEVEL_G, LEVEL_E)];
    let g_ug = spec.gamma[(LEVEL_U, LEVEL_G)];
    Ok(simple_criterion_from(eps_gu, eps_eg, g_ge, g_ug))
}

pub fn simple_criterion_from(eps_gu: f64, eps_eg: f64, gamma_ge: f64, gamma_ug: f64) -> f64 {
    let num = (eps_gu - eps_eg) / (2.0 * eps_eg) * gamma_ge * gamma_ge;
    if gamma_ug == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY.copysign(num) };
    }
    num / (gamma_ug * gamma_ug)
}

/// |a/b|, or +∞ when |b| is below the floor.
pub fn ratio(a: f64, b: f64) -> f64 {
    if b.abs() < AMPLITUDE_FLOOR {
        f64::INFINITY
    } else {
        (a / b).abs()
    }
}

/// Stokes amplitudes for one atomic operator. For q̂ the matrix passed is
/// Im q (q̂ is purely imaginary), so every amplitude is i times the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StokesAmplitudes {
    pub full: f64,
    pub rw: f64,
    pub jc: f64,
}

/// Σ' ⟨Ψ_2u|n,i⟩ o_ij ⟨n,j|Ψ_0⟩ over even n+i, odd n+j.
pub fn stokes_restricted(eig: &LabeledEigensystem, op: &DMatrix<f64>) -> Result<f64> {
    let a = eig.get(Label::Nu(2))?;
    let b = eig.get(Label::FalseVacuum)?;
    let mut s = 0.0;
    for n in 0..eig.n_fock {
        for i in (0..eig.n_atom).filter(|i| (n + i) % 2 == 0) {
            let left = eig.amplitude(a, n, i);
            for j in (0..eig.n_atom).filter(|j| (n + j) % 2 == 1) {
                s += left * op[(i, j)] * eig.amplitude(b, n, j);
            }
        }
    }
    Ok(s)
}

/// ⟨Ψ_2u|ô ⊗ 1|Ψ_0⟩ summed over every product-basis term.
pub fn stokes_direct(eig: &LabeledEigensystem, op: &DMatrix<f64>) -> Result<f64> {
    matrix_element(eig, Label::Nu(2), Label::FalseVacuum, op)
}

/// ⟨Ψ_a|ô ⊗ 1|Ψ_b⟩.
pub fn matrix_element(eig: &LabeledEigensystem, a: Label, b: Label, op: &DMatrix<f64>) -> Result<f64> {
    let a = eig.get(a)?;
    let b = eig.get(b)?;
    Ok(state_element(eig, a, b, op))
}

/// ⟨Ψ_a|ô ⊗ 1|Ψ_b⟩ by eigenindex.
pub fn state_element(eig: &LabeledEigensystem, a: usize, b: usize, op: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for n in 0..eig.n_fock {
        for i in 0..eig.n_atom {
            let left = eig.amplitude(a, n, i);
            if left == 0.0 {
                continue;
            }
            for j in 0..eig.n_atom {
                s += left * op[(i, j)] * eig.amplitude(b, n, j);
            }
        }
    }
    s
}

/// o_gu⟨Ψ_2u|1g⟩⟨1u|Ψ_0⟩ + o_eg⟨Ψ_2u|0e⟩⟨0g|Ψ_0⟩.
pub fn stokes_rw(eig: &LabeledEigensystem, op: &DMatrix<f64>) -> Result<f64> {
    let a = eig.get(Label::Nu(2))?;
    let b = eig.get(Label::FalseVacuum)?;
    Ok(op[(LEVEL_G, LEVEL_U)] * eig.amplitude(a, 1, LEVEL_G) * eig.amplitude(b, 1, LEVEL_U)
        + op[(LEVEL_E, LEVEL_G)] * eig.amplitude(a, 0, LEVEL_E) * eig.amplitude(b, 0, LEVEL_G))
}

pub fn amplitudes(eig_full: &LabeledEigensystem, eig_rw: &LabeledEigensystem, op: &DMatrix<f64>) -> Result<StokesAmplitudes> {
    Ok(StokesAmplitudes {
        full: stokes_restricted(eig_full, op)?,
        rw: stokes_rw(eig_full, op)?,
        jc: stokes_direct(eig_rw, op)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeritReport {
    pub simple_a: f64,
    pub q: StokesAmplitudes,
    pub gamma: StokesAmplitudes,
    pub a_q: f64,
    pub a_prime_q: f64,
    pub a_gamma: f64,
    pub a_prime_gamma: f64,
    /// g_ef/ε_fe with g_ef = g_ge·γ_ef/γ_ge.
    pub g_ef_over_eps_fe: f64,
    /// Flags points where the rotating-wave channel alone already produces
    /// photons comparably to the full model (A′ < 10 for the port).
    pub jc_photons_q: bool,
    pub jc_photons_gamma: bool,
}

pub fn stokes_amplitudes(
    eig_full: &LabeledEigensystem,
    eig_rw: &LabeledEigensystem,
    spec: &AaSpectrum,
    g_prefactor: f64,
) -> Result<MeritReport> {
    let n = eig_full.n_atom;
    let q = spec.q_imag.view((0, 0), (n, n)).into_owned();
    let gm = spec.gamma.view((0, 0), (n, n)).into_owned();
    let q_amp = amplitudes(eig_full, eig_rw, &q)?;
    let g_amp = amplitudes(eig_full, eig_rw, &gm)?;
    let g_ef = if spec.n_levels() > LEVEL_F {
        g_prefactor * spec.gamma[(LEVEL_E, LEVEL_F)].abs() / spec.splitting(LEVEL_E, LEVEL_F)
    } else {
        f64::NAN
    };
    let a_prime_q = ratio(q_amp.full, q_amp.jc);
    let a_prime_gamma = ratio(g_amp.full, g_amp.jc);
    log::debug!(
        "stokes phases: q full/rw {:+}, gamma full/rw {:+}",
        (q_amp.full * q_amp.rw).signum(),
        (g_amp.full * g_amp.rw).signum()
    );
    Ok(MeritReport {
        simple_a: simple_criterion(spec)?,
        q: q_amp,
        gamma: g_amp,
        a_q: ratio(q_amp.full, q_amp.rw),
        a_prime_q,
        a_gamma: ratio(g_amp.full, g_amp.rw),
        a_prime_gamma,
        g_ef_over_eps_fe: g_ef,
        jc_photons_q: a_prime_q < 10.0,
        jc_photons_gamma: a_prime_gamma < 10.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeritRow {
    pub design: CircuitDesign,
    pub eps_eg: f64,
    pub report: Option<MeritReport>,
    pub status: String,
}

impl MeritRow {
    pub const CSV_HEADER: &'static str = "g_over_wc,ej_over_ec1,u11_over_ej,eps_eg_over_ej,ej_over_ec2,u22_over_ej,simple_A,\
stokes_full_q,stokes_rw_q,stokes_jc_q,stokes_full_gamma,stokes_rw_gamma,stokes_jc_gamma,\
g_ef_over_eps_fe,A_q,A_prime_q,A_gamma,A_prime_gamma,jc_photons_q,jc_photons_gamma,status";

    pub fn csv_row(&self) -> String {
        let d = &self.design;
        let (ec2, u22) = d.derived.map(|x| (fmt_num(x.ej_over_ec2), fmt_num(x.u22_over_ej))).unwrap_or_default();
        let mut cols = vec![
            fmt_num(d.g_over_wc),
            fmt_num(d.ej_over_ec1),
            fmt_num(d.u11_over_ej),
            fmt_num(self.eps_eg),
            ec2,
            u22,
        ];
        match &self.report {
            Some(r) => cols.extend([
                fmt_num(r.simple_a),
                fmt_num(r.q.full),
                fmt_num(r.q.rw),
                fmt_num(r.q.jc),
                fmt_num(r.gamma.full),
                fmt_num(r.gamma.rw),
                fmt_num(r.gamma.jc),
                fmt_num(r.g_ef_over_eps_fe),
                fmt_num(r.a_q),
                fmt_num(r.a_prime_q),
                fmt_num(r.a_gamma),
                fmt_num(r.a_prime_gamma),
                r.jc_photons_q.to_string(),
                r.jc_photons_gamma.to_string(),
            ]),
            None => cols.extend(std::iter::repeat(String::new()).take(14)),
        }
        cols.push(self.status.clone());
        cols.join(",")
    }
}

/// One merit row per design, sorted by U11/E_J. Failures become row status.
pub fn merit_slice(designs: &[CircuitDesign], opts: &StudyOptions, par: Parallelism) -> Vec<MeritRow> {
    let mut rows = exec::map(designs, par, |d| match prepare(d, opts) {
        Ok(cs) => match stokes_amplitudes(&cs.eig_full, &cs.eig_rw, &cs.spectrum, cs.scales.g_prefactor) {
            Ok(r) => MeritRow { design: cs.outcome.design.clone(), eps_eg: cs.outcome.eps_eg, report: Some(r), status: "ok".into() },
            Err(e) => MeritRow { design: cs.outcome.design.clone(), eps_eg: cs.outcome.eps_eg, report: None, status: format!("{}: {e}", e.kind()) },
        },
        Err(e) => MeritRow { design: d.clone(), eps_eg: f64::NAN, report: None, status: format!("{}: {e}", e.kind()) },
    });
    rows.sort_by(|a, b| a.design.u11_over_ej.total_cmp(&b.design.u11_over_ej));
    rows
}
