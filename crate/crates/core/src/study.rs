//! Shared setup for one design point: atom spectrum, inverted circuit and the
//! full / rotating-wave EQR eigensystems.

use serde::{Deserialize, Serialize};

use crate::atom::{solve_aa, AaBasis, AaSpectrum};
use crate::circuit::{hamiltonian_scales, CircuitDesign, HamiltonianScales};
use crate::design::{invert_with_spectrum, DesignOutcome};
use crate::eqr::{build_eqr, diagonalize_and_label, EqrModel, Interaction, LabelOptions, LabeledEigensystem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Truncation {
    pub n_atom: usize,
    pub n_fock: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { n_atom: 12, n_fock: 20 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyOptions {
    pub basis: AaBasis,
    pub truncation: Truncation,
    pub labels: LabelOptions,
}

#[derive(Debug, Clone)]
pub struct CaseStudy {
    pub outcome: DesignOutcome,
    pub spectrum: AaSpectrum,
    pub scales: HamiltonianScales,
    pub full: EqrModel,
    pub rw: EqrModel,
    pub eig_full: LabeledEigensystem,
    pub eig_rw: LabeledEigensystem,
}

impl CaseStudy {
    pub fn model(&self, v: Interaction) -> Result<(&EqrModel, &LabeledEigensystem)> {
        match v {
            Interaction::Full => Ok((&self.full, &self.eig_full)),
            Interaction::RotatingWave => Ok((&self.rw, &self.eig_rw)),
            Interaction::NumberConserving => Err(Error::Lookup("case studies carry only the full and rotating-wave models".into())),
        }
    }
}

pub fn prepare(design: &CircuitDesign, opts: &StudyOptions) -> Result<CaseStudy> {
    let mut basis = opts.basis;
    basis.n_levels = basis.n_levels.max(opts.truncation.n_atom);
    design.validate()?;
    let spectrum = solve_aa(design.ec1_over_ej(), design.u11_over_ej, 1.0, &basis)?;
    let outcome = invert_with_spectrum(design, &spectrum)?;
    if !outcome.is_feasible() {
        return Err(Error::Infeasible(format!(
            "design (E_J/E_C1 = {}, U11/E_J = {}, g/ω_c = {}) is {}: {}",
            design.ej_over_ec1,
            design.u11_over_ej,
            design.g_over_wc,
            outcome.status.name(),
            outcome.message
        )));
    }
    let scales = hamiltonian_scales(&outcome.design)?;
    let Truncation { n_atom, n_fock } = opts.truncation;
    let full = build_eqr(&spectrum, scales.omega_c, scales.g_prefactor, n_atom, n_fock, Interaction::Full)?;
    let rw = build_eqr(&spectrum, scales.omega_c, scales.g_prefactor, n_atom, n_fock, Interaction::RotatingWave)?;
    let eig_full = diagonalize_and_label(&full, &opts.labels)?;
    let eig_rw = diagonalize_and_label(&rw, &opts.labels)?;
    Ok(CaseStudy { outcome, spectrum, scales, full, rw, eig_full, eig_rw })
}

/// The six tabulated case studies as (g/ω_c, E_J/E_C1, U11/E_J).
pub const CASE_STUDIES: [(f64, f64, f64); 6] = [
    (0.5, 0.9, 0.08),
    (0.5, 0.9, 0.081),
    (0.5, 0.9, 0.083),
    (0.5, 0.9, 0.087),
    (0.5, 1.0, 0.08),
    (0.38, 1.1, 0.083),
];

/// Case study `set` (1-based), at ω_c = ε_eg and L1 = 0.
pub fn case_study_design(set: usize) -> Result<CircuitDesign> {
    let (g, x, y) = *CASE_STUDIES
        .get(set.wrapping_sub(1))
        .ok_or_else(|| Error::Lookup(format!("case study {set} (valid: 1..=6)")))?;
    Ok(CircuitDesign::new(x, y, g))
}
