//! Two-loop circuit: inductance algebra, energy scales and SI conversion.
//!
//! All dimensionless energies are expressed in units of the Josephson energy
//! E_J. The inductive-energy matrix is U = (ħ/2e)² L⁻¹ with the mutual
//! inductance between the loops taken as zero.

use serde::{Deserialize, Serialize};

use crate::constants::{ghz_to_joule, joule_to_ghz, E_CHARGE, REDUCED_FLUX_QUANTUM};
use crate::error::{Error, Result};

/// Fields filled in by design inversion (all in E_J units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedCircuit {
    pub ej_over_ec2: f64,
    pub u22_over_ej: f64,
    pub u12_over_ej: f64,
}

/// Dimensionless description of the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDesign {
    pub ej_over_ec1: f64,
    pub u11_over_ej: f64,
    pub g_over_wc: f64,
    #[serde(default = "one")]
    pub wc_over_eps_eg: f64,
    #[serde(default)]
    pub l1_over_l: f64,
    /// Charge bias in Cooper-pair units.
    #[serde(default)]
    pub bias_qx: f64,
    /// Flux biases in flux-quantum units.
    #[serde(default)]
    pub bias_phi_x1: f64,
    #[serde(default)]
    pub bias_phi_x2: f64,
    #[serde(default)]
    pub derived: Option<DerivedCircuit>,
}

fn one() -> f64 {
    1.0
}

impl CircuitDesign {
    /// A design at the symmetric bias point with ω_c = ε_eg and L1 = 0.
    pub fn new(ej_over_ec1: f64, u11_over_ej: f64, g_over_wc: f64) -> Self {
        CircuitDesign {
            ej_over_ec1,
            u11_over_ej,
            g_over_wc,
            wc_over_eps_eg: 1.0,
            l1_over_l: 0.0,
            bias_qx: 0.0,
            bias_phi_x1: 0.0,
            bias_phi_x2: 0.0,
            derived: None,
        }
    }

    pub fn ec1_over_ej(&self) -> f64 {
        1.0 / self.ej_over_ec1
    }

    pub fn is_symmetric_point(&self) -> bool {
        self.bias_qx == 0.0 && self.bias_phi_x1 == 0.0 && self.bias_phi_x2 == 0.0
    }

    pub fn derived(&self) -> Result<&DerivedCircuit> {
        self.derived
            .as_ref()
            .ok_or_else(|| Error::Config("design has no derived fields (run design inversion first)".into()))
    }

    /// Checks the invariants that hold for every design the toolkit accepts.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ej_over_ec1", self.ej_over_ec1),
            ("u11_over_ej", self.u11_over_ej),
            ("wc_over_eps_eg", self.wc_over_eps_eg),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.g_over_wc.is_finite() && self.g_over_wc >= 0.0) {
            return Err(Error::Domain(format!("g_over_wc must be non-negative, got {}", self.g_over_wc)));
        }
        if !(self.l1_over_l.is_finite() && self.l1_over_l >= 0.0) {
            return Err(Error::Domain(format!("l1_over_l must be non-negative, got {}", self.l1_over_l)));
        }
        if !self.is_symmetric_point() {
            return Err(Error::Domain("only the symmetric bias point (all biases zero) is supported".into()));
        }
        if let Some(d) = &self.derived {
            if !(d.ej_over_ec2 > 0.0 && d.u22_over_ej > 0.0 && d.u12_over_ej >= 0.0) {
                return Err(Error::Domain("derived energies must be positive".into()));
            }
            if self.u11_over_ej <= d.u12_over_ej {
                return Err(Error::Infeasible(format!(
                    "U11/E_J = {} <= U12/E_J = {}",
                    self.u11_over_ej, d.u12_over_ej
                )));
            }
        }
        Ok(())
    }
}

/// 2×2 symmetric inductance-like matrix. Used both for 𝕃 and for 𝕃⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InductanceMatrix {
    pub l11: f64,
    pub l12: f64,
    pub l21: f64,
    pub l22: f64,
}

impl InductanceMatrix {
    /// The loop inductance matrix [[L1+L, −L], [−L, L2+L]] (M = 0).
    pub fn from_branches(l: f64, l1: f64, l2: f64) -> Self {
        InductanceMatrix { l11: l1 + l, l12: -l, l21: -l, l22: l2 + l }
    }

    pub fn is_symmetric(&self) -> bool {
        self.l12 == self.l21
    }

    pub fn det(&self) -> f64 {
        self.l11 * self.l22 - self.l12 * self.l21
    }

    pub fn is_positive_definite(&self) -> bool {
        self.l11 > 0.0 && self.det() > 0.0
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Infeasible("singular inductance matrix".into()));
        }
        Ok(InductanceMatrix {
            l11: self.l22 / det,
            l12: -self.l12 / det,
            l21: -self.l21 / det,
            l22: self.l11 / det,
        })
    }

    pub fn matmul(&self, other: &Self) -> Self {
        InductanceMatrix {
            l11: self.l11 * other.l11 + self.l12 * other.l21,
            l12: self.l11 * other.l12 + self.l12 * other.l22,
            l21: self.l21 * other.l11 + self.l22 * other.l21,
            l22: self.l21 * other.l12 + self.l22 * other.l22,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        InductanceMatrix { l11: self.l11 * s, l12: self.l12 * s, l21: self.l21 * s, l22: self.l22 * s }
    }
}

/// Inverse inductance matrix of the two-loop circuit.
///
/// Entries follow the closed form
/// `[L⁻¹] = [[L+L2, L], [L, L+L1]] / (L·L1 + L·L2 + L1·L2)`.
/// Multiplying by (ħ/2e)² gives the inductive-energy matrix; in units where
/// inductances are measured in L_J the result is directly U/E_J.
pub fn invert_inductance(l: f64, l1: f64, l2: f64) -> Result<InductanceMatrix> {
    if !(l > 0.0 && l2 > 0.0 && l1 >= 0.0) || !(l.is_finite() && l1.is_finite() && l2.is_finite()) {
        return Err(Error::Infeasible(format!(
            "inductance matrix not positive definite (L = {l}, L1 = {l1}, L2 = {l2})"
        )));
    }
    let den = l * l1 + l * l2 + l1 * l2;
    Ok(InductanceMatrix {
        l11: (l + l2) / den,
        l12: l / den,
        l21: l / den,
        l22: (l + l1) / den,
    })
}

/// Branch inductances (L, L1, L2) recovered from an inductive-energy matrix
/// (any consistent units; with U in E_J units the result is in L_J).
pub fn branches_from_energy_matrix(u11: f64, u12: f64, u22: f64) -> Result<(f64, f64, f64)> {
    let det = u11 * u22 - u12 * u12;
    if !(det > 0.0 && u12 > 0.0 && u11 > u12) {
        return Err(Error::Infeasible(format!(
            "inductive-energy matrix does not map to positive inductances (U11 = {u11}, U12 = {u12}, U22 = {u22})"
        )));
    }
    let l = u12 / det;
    let l1 = u22 / det - l;
    let l2 = u11 / det - l;
    Ok((l, l1.max(0.0), l2))
}

/// SI description of the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCircuit {
    pub ej_ghz: f64,
    pub ec1_ghz: f64,
    pub ec2_ghz: f64,
    pub c1_ff: f64,
    pub c2_ff: f64,
    pub l_nh: f64,
    pub l1_nh: f64,
    pub l2_nh: f64,
    pub lj_nh: f64,
    pub ic_na: f64,
    pub z2_kohm: f64,
    /// Gate capacitance; metadata only (enters the drive prefactor).
    pub cg_ff: Option<f64>,
}

/// Capacitance (F) whose Cooper-pair charging energy 2e²/C equals `energy` (J).
fn capacitance_for(energy: f64) -> f64 {
    2.0 * E_CHARGE * E_CHARGE / energy
}

pub fn to_physical(design: &CircuitDesign, ej_ghz: f64) -> Result<PhysicalCircuit> {
    if !(ej_ghz > 0.0 && ej_ghz.is_finite()) {
        return Err(Error::Domain(format!("ej_ghz must be positive, got {ej_ghz}")));
    }
    let d = design.derived()?;
    if design.u11_over_ej <= d.u22_over_ej {
        return Err(Error::Infeasible(format!(
            "U11/E_J = {} <= U22/E_J = {}",
            design.u11_over_ej, d.u22_over_ej
        )));
    }
    let ej = ghz_to_joule(ej_ghz);
    let ec1 = ej / design.ej_over_ec1;
    let ec2 = ej / d.ej_over_ec2;
    let lj = REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM / ej;
    let (l, l1, l2) = branches_from_energy_matrix(design.u11_over_ej, d.u12_over_ej, d.u22_over_ej)?;
    let c2 = capacitance_for(ec2);
    Ok(PhysicalCircuit {
        ej_ghz,
        ec1_ghz: joule_to_ghz(ec1),
        ec2_ghz: joule_to_ghz(ec2),
        c1_ff: capacitance_for(ec1) * 1e15,
        c2_ff: c2 * 1e15,
        l_nh: l * lj * 1e9,
        l1_nh: l1 * lj * 1e9,
        l2_nh: l2 * lj * 1e9,
        lj_nh: lj * 1e9,
        ic_na: ej / REDUCED_FLUX_QUANTUM * 1e9,
        z2_kohm: (l2 * lj / c2).sqrt() * 1e-3,
        cg_ff: None,
    })
}

/// Re-normalizes a physical circuit by its own E_J.
pub fn to_dimensionless(pc: &PhysicalCircuit, g_over_wc: f64, wc_over_eps_eg: f64) -> Result<CircuitDesign> {
    let ej = ghz_to_joule(pc.ej_ghz);
    let ec1 = capacitance_for(pc.c1_ff * 1e-15);
    let ec2 = capacitance_for(pc.c2_ff * 1e-15);
    let lj = pc.lj_nh;
    let inv = invert_inductance(pc.l_nh / lj, pc.l1_nh / lj, pc.l2_nh / lj)?;
    Ok(CircuitDesign {
        ej_over_ec1: ej / ec1,
        u11_over_ej: inv.l11,
        g_over_wc,
        wc_over_eps_eg,
        l1_over_l: pc.l1_nh / pc.l_nh,
        bias_qx: 0.0,
        bias_phi_x1: 0.0,
        bias_phi_x2: 0.0,
        derived: Some(DerivedCircuit { ej_over_ec2: ej / ec2, u22_over_ej: inv.l22, u12_over_ej: inv.l12 }),
    })
}

/// Energy scales entering H_AA, H_LC and V (E_J units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianScales {
    pub ec1: f64,
    pub u11: f64,
    pub ec2: f64,
    pub u22: f64,
    pub u12: f64,
    /// Mode frequency sqrt(2 E_C2 U22).
    pub omega_c: f64,
    /// Coupling prefactor U12 (E_C2 / 2U22)^(1/4); the atom-mode coupling is g_ij = prefactor · γ_ij.
    pub g_prefactor: f64,
}

pub fn hamiltonian_scales(design: &CircuitDesign) -> Result<HamiltonianScales> {
    let d = design.derived()?;
    let ec2 = 1.0 / d.ej_over_ec2;
    let u22 = d.u22_over_ej;
    Ok(HamiltonianScales {
        ec1: design.ec1_over_ej(),
        u11: design.u11_over_ej,
        ec2,
        u22,
        u12: d.u12_over_ej,
        omega_c: (2.0 * ec2 * u22).sqrt(),
        g_prefactor: d.u12_over_ej * (ec2 / (2.0 * u22)).powf(0.25),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn table_two_row_two_energies() {
        let inv = invert_inductance(15.6, 0.0, 59.7).unwrap();
        assert!((inv.l11 - (1.0 / 15.6 + 1.0 / 59.7)).abs() < 1e-14);
        assert!((inv.l11 - 0.081).abs() < 5e-4);
        assert_eq!(inv.l12, inv.l22);
        assert!((inv.l22 - 1.0 / 59.7).abs() < 1e-15);
    }

    #[test]
    fn large_coupling_inductance_limit() {
        let inv = invert_inductance(1e9, 0.0, 10.0).unwrap();
        assert!((inv.l12 / inv.l22 - 1.0).abs() < 1e-12);
        assert!(rel(inv.l11, inv.l22) < 1e-7);
    }

    #[test]
    fn negative_inductance_is_infeasible() {
        assert!(matches!(invert_inductance(-1.0, 0.0, 10.0), Err(Error::Infeasible(_))));
        assert!(matches!(invert_inductance(1.0, 0.0, 0.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn decoupled_circuit_has_zero_prefactor() {
        let mut d = CircuitDesign::new(0.9, 0.081, 0.0);
        d.derived = Some(DerivedCircuit { ej_over_ec2: 0.83, u22_over_ej: 1.0 / 59.7, u12_over_ej: 0.0 });
        let s = hamiltonian_scales(&d).unwrap();
        assert_eq!(s.g_prefactor, 0.0);
    }

    #[test]
    fn set_two_mode_frequency() {
        let mut d = CircuitDesign::new(0.9, 0.081, 0.5);
        d.derived = Some(DerivedCircuit { ej_over_ec2: 0.83, u22_over_ej: 1.0 / 59.7, u12_over_ej: 1.0 / 59.7 });
        let s = hamiltonian_scales(&d).unwrap();
        assert!((s.omega_c - 0.20).abs() < 0.005, "{}", s.omega_c);
        assert_eq!(s.omega_c * s.omega_c, 2.0 * s.ec2 * s.u22);
    }

    #[test]
    fn missing_derived_fields() {
        let d = CircuitDesign::new(0.9, 0.081, 0.5);
        assert!(matches!(hamiltonian_scales(&d), Err(Error::Config(_))));
        assert!(matches!(to_physical(&d, 10.0), Err(Error::Config(_))));
    }

    #[test]
    fn junction_figures_at_ten_ghz() {
        let mut d = CircuitDesign::new(0.9, 0.081, 0.5);
        d.derived = Some(DerivedCircuit { ej_over_ec2: 0.83, u22_over_ej: 1.0 / 59.7, u12_over_ej: 1.0 / 59.7 });
        let p = to_physical(&d, 10.0).unwrap();
        assert!((p.c1_ff - 7.0).abs() < 0.2, "{}", p.c1_ff);
        assert!((p.lj_nh - 16.0).abs() < 0.5, "{}", p.lj_nh);
        assert!((p.ic_na - 20.0).abs() < 0.5, "{}", p.ic_na);
        assert!((p.ec1_ghz - 11.1).abs() < 0.05);
    }

    #[test]
    fn set_three_physical_values() {
        // Set 3: L/L_J = 16.2, L2/L_J = 47.3, E_J/E_C2 = 0.85.
        let u22 = 1.0 / 47.3;
        let mut d = CircuitDesign::new(0.9, 1.0 / 16.2 + u22, 0.5);
        d.derived = Some(DerivedCircuit { ej_over_ec2: 0.85, u22_over_ej: u22, u12_over_ej: u22 });
        let p = to_physical(&d, 10.0).unwrap();
        assert!(rel(p.l_nh, 259.0) < 0.03, "{}", p.l_nh);
        assert!(rel(p.l2_nh, 757.0) < 0.03, "{}", p.l2_nh);
        assert!(rel(p.c2_ff, 6.6) < 0.03, "{}", p.c2_ff);
        assert!(rel(p.z2_kohm, 10.7) < 0.03, "{}", p.z2_kohm);
    }

    #[test]
    fn biased_design_rejected() {
        let mut d = CircuitDesign::new(0.9, 0.081, 0.5);
        d.bias_phi_x1 = 0.1;
        assert!(d.validate().is_err());
    }

    proptest! {
        #[test]
        fn inversion_is_exact(l in 0.1f64..100.0, l1 in 0.0f64..50.0, l2 in 0.1f64..100.0) {
            let m = InductanceMatrix::from_branches(l, l1, l2);
            let inv = invert_inductance(l, l1, l2).unwrap();
            let id = m.matmul(&inv);
            prop_assert!((id.l11 - 1.0).abs() < 1e-12);
            prop_assert!((id.l22 - 1.0).abs() < 1e-12);
            prop_assert!(id.l12.abs() < 1e-12);
            prop_assert!(id.l21.abs() < 1e-12);
            let inv2 = m.inverse().unwrap();
            prop_assert!(rel(inv.l11, inv2.l11) < 1e-12 && rel(inv.l12, inv2.l12) < 1e-12);
        }

        #[test]
        fn positive_definite_iff_positive_branches(l in -50.0f64..50.0, l2 in -50.0f64..50.0) {
            prop_assume!(l.abs() > 1e-6 && l2.abs() > 1e-6);
            let m = InductanceMatrix::from_branches(l, 0.0, l2);
            prop_assert_eq!(m.is_positive_definite(), l > 0.0 && l2 > 0.0);
            prop_assert_eq!(invert_inductance(l, 0.0, l2).is_ok(), l > 0.0 && l2 > 0.0);
        }

        #[test]
        fn physical_round_trip(x in 0.5f64..1.5, u22 in 0.005f64..0.05, du in 0.01f64..0.2,
                               ec2 in 0.5f64..2.0, ej_ghz in 1.0f64..30.0) {
            let mut d = CircuitDesign::new(x, u22 + du, 0.5);
            d.derived = Some(DerivedCircuit { ej_over_ec2: ec2, u22_over_ej: u22, u12_over_ej: u22 });
            let p = to_physical(&d, ej_ghz).unwrap();
            let back = to_dimensionless(&p, 0.5, 1.0).unwrap();
            let bd = back.derived.unwrap();
            prop_assert!(rel(back.ej_over_ec1, x) < 1e-12);
            prop_assert!(rel(back.u11_over_ej, u22 + du) < 1e-12);
            prop_assert!(rel(bd.ej_over_ec2, ec2) < 1e-12);
            prop_assert!(rel(bd.u22_over_ej, u22) < 1e-12);
            prop_assert!(rel(bd.u12_over_ej, u22) < 1e-12);
            prop_assert!(back.l1_over_l.abs() < 1e-12);
        }
    }
}
