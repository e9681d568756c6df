//! Inversion from atom/coupling targets to a full circuit design, and the
//! feasibility map over the (E_C1, U11) plane.

use serde::{Deserialize, Serialize};

use crate::atom::{solve_aa, AaBasis, AaSpectrum, LEVEL_E, LEVEL_G, LEVEL_U};
use crate::circuit::{branches_from_energy_matrix, CircuitDesign, DerivedCircuit};
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignStatus {
    Feasible,
    /// The inductance matrix would not be positive definite.
    Infeasible,
    /// g = 0 leaves U22 = 0 and no mode to build.
    DegenerateCoupling,
    SolverFailed,
}

impl DesignStatus {
    pub fn name(&self) -> &'static str {
        match self {
            DesignStatus::Feasible => "feasible",
            DesignStatus::Infeasible => "infeasible",
            DesignStatus::DegenerateCoupling => "degenerate_coupling",
            DesignStatus::SolverFailed => "solver_failed",
        }
    }
}

/// Result of inverting one design point. `design.derived` is set only when
/// the point is feasible.
#[derive(Debug, Clone, Serialize)]
pub struct DesignOutcome {
    pub design: CircuitDesign,
    pub status: DesignStatus,
    pub eps_eg: f64,
    pub eps_gu: f64,
    pub gamma_ge: f64,
    pub gamma_ug: f64,
    /// Mode frequency ε = ε_eg · (ω_c/ε_eg).
    pub omega_c: f64,
    pub u22_over_ej: f64,
    pub u12_over_ej: f64,
    pub ej_over_ec2: f64,
    pub l_over_lj: Option<f64>,
    pub l1_over_lj: Option<f64>,
    pub l2_over_lj: Option<f64>,
    pub message: String,
}

impl DesignOutcome {
    pub fn is_feasible(&self) -> bool {
        self.status == DesignStatus::Feasible
    }
}

/// E_C2 in the closed form (ε³/4)(γ_ge/g)², valid for L1 = 0.
pub fn ec2_closed_form(eps: f64, gamma_ge: f64, g: f64) -> f64 {
    eps.powi(3) / 4.0 * (gamma_ge / g).powi(2)
}

/// Inverts a design from a solved atom. `design` supplies x, y, g/ω_c,
/// ω_c/ε_eg and L1/L; its `derived` field is ignored and overwritten.
pub fn invert_with_spectrum(design: &CircuitDesign, spec: &AaSpectrum) -> Result<DesignOutcome> {
    let mut design = design.clone();
    design.derived = None;
    design.validate()?;
    if spec.n_levels() < 3 {
        return Err(Error::Domain("design inversion needs at least three atomic levels".into()));
    }
    let eps_eg = spec.splitting(LEVEL_G, LEVEL_E);
    let eps_gu = spec.splitting(LEVEL_U, LEVEL_G);
    let gamma_ge = spec.gamma[(LEVEL_G, LEVEL_E)].abs();
    let gamma_ug = spec.gamma[(LEVEL_U, LEVEL_G)].abs();
    let eps = eps_eg * design.wc_over_eps_eg;
    let g = design.g_over_wc * eps;
    let r = design.l1_over_l;
    let mut out = DesignOutcome {
        design: design.clone(),
        status: DesignStatus::Feasible,
        eps_eg,
        eps_gu,
        gamma_ge,
        gamma_ug,
        omega_c: eps,
        u22_over_ej: 0.0,
        u12_over_ej: 0.0,
        ej_over_ec2: 0.0,
        l_over_lj: None,
        l1_over_lj: None,
        l2_over_lj: None,
        message: String::new(),
    };
    if gamma_ge == 0.0 {
        return Err(Error::Domain("γ_ge vanishes; the mode cannot couple to the g-e transition".into()));
    }
    if g == 0.0 {
        out.status = DesignStatus::DegenerateCoupling;
        out.message = "g = 0 gives U22 = 0".into();
        return Ok(out);
    }
    let u22 = 2.0 * ((1.0 + r) * g / gamma_ge).powi(2) / eps;
    let u12 = u22 / (1.0 + r);
    let ec2 = eps * eps / (2.0 * u22);
    out.u22_over_ej = u22;
    out.u12_over_ej = u12;
    out.ej_over_ec2 = 1.0 / ec2;
    match branches_from_energy_matrix(design.u11_over_ej, u12, u22) {
        Ok((l, l1, l2)) => {
            out.l_over_lj = Some(l);
            out.l1_over_lj = Some(l1);
            out.l2_over_lj = Some(l2);
            design.derived = Some(DerivedCircuit { ej_over_ec2: 1.0 / ec2, u22_over_ej: u22, u12_over_ej: u12 });
            out.design = design;
        }
        Err(e) => {
            out.status = DesignStatus::Infeasible;
            out.message = e.to_string();
        }
    }
    Ok(out)
}

/// Solves the atom at (x = E_J/E_C1, y = U11/E_J) and inverts the design.
pub fn invert_design(x: f64, y: f64, g_over_wc: f64, wc_over_eps_eg: f64, basis: &AaBasis) -> Result<DesignOutcome> {
    let mut d = CircuitDesign::new(x, y, g_over_wc);
    d.wc_over_eps_eg = wc_over_eps_eg;
    invert_circuit(&d, basis)
}

pub fn invert_circuit(design: &CircuitDesign, basis: &AaBasis) -> Result<DesignOutcome> {
    design.validate()?;
    let spec = solve_aa(design.ec1_over_ej(), design.u11_over_ej, 1.0, basis)?;
    invert_with_spectrum(design, &spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub ec1_over_ej_min: f64,
    pub ec1_over_ej_max: f64,
    pub ec1_points: usize,
    pub u11_over_ej_min: f64,
    pub u11_over_ej_max: f64,
    pub u11_points: usize,
    pub g_over_wc: f64,
    pub wc_over_eps_eg: f64,
    pub l1_over_l: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            ec1_over_ej_min: 0.7,
            ec1_over_ej_max: 1.4,
            ec1_points: 40,
            u11_over_ej_min: 0.05,
            u11_over_ej_max: 0.35,
            u11_points: 40,
            g_over_wc: 0.5,
            wc_over_eps_eg: 1.0,
            l1_over_l: 0.0,
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.ec1_points == 0 || self.u11_points == 0 {
            return Err(Error::Config("sweep grid needs at least one point per axis".into()));
        }
        let ok = self.ec1_over_ej_min > 0.0
            && self.ec1_over_ej_max >= self.ec1_over_ej_min
            && self.u11_over_ej_min > 0.0
            && self.u11_over_ej_max >= self.u11_over_ej_min;
        if !ok {
            return Err(Error::Config("sweep ranges must be positive and ordered".into()));
        }
        if !(self.g_over_wc >= 0.0 && self.wc_over_eps_eg > 0.0 && self.l1_over_l >= 0.0) {
            return Err(Error::Config("sweep couplings out of range".into()));
        }
        Ok(())
    }

    /// Grid points as (E_C1/E_J, U11/E_J), ordered by E_C1 then U11.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let xs = linspace(self.ec1_over_ej_min, self.ec1_over_ej_max, self.ec1_points);
        let ys = linspace(self.u11_over_ej_min, self.u11_over_ej_max, self.u11_points);
        xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionLabel {
    pub ec1_over_ej: f64,
    pub u11_over_ej: f64,
    pub feasible: bool,
    pub simple_a: f64,
    pub simple_a_above_1: bool,
    pub eps_eg_over_ej: f64,
    pub eps_gu_over_eps_eg: f64,
    pub u22_over_ej: f64,
    pub l_over_lj: Option<f64>,
    pub l2_over_lj: Option<f64>,
    pub status: String,
}

impl RegionLabel {
    pub const CSV_HEADER: &'static str =
        "x,y,feasible,A,eps_eg_over_ej,eps_gu_over_eps_eg,u22_over_ej,l_over_lj,l2_over_lj,status";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_num(self.ec1_over_ej),
            fmt_num(self.u11_over_ej),
            self.feasible,
            fmt_num(self.simple_a),
            fmt_num(self.eps_eg_over_ej),
            fmt_num(self.eps_gu_over_eps_eg),
            fmt_num(self.u22_over_ej),
            opt(self.l_over_lj),
            opt(self.l2_over_lj),
            self.status
        )
    }
}

/// Shortest round-trip float formatting, `inf`/`nan` spelled out.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

fn label_point(x: f64, y: f64, grid: &SweepGrid, basis: &AaBasis) -> RegionLabel {
    let mut design = CircuitDesign::new(1.0 / x, y, grid.g_over_wc);
    design.wc_over_eps_eg = grid.wc_over_eps_eg;
    design.l1_over_l = grid.l1_over_l;
    let blank = |status: String| RegionLabel {
        ec1_over_ej: x,
        u11_over_ej: y,
        feasible: false,
        simple_a: f64::NAN,
        simple_a_above_1: false,
        eps_eg_over_ej: f64::NAN,
        eps_gu_over_eps_eg: f64::NAN,
        u22_over_ej: f64::NAN,
        l_over_lj: None,
        l2_over_lj: None,
        status,
    };
    let spec = match solve_aa(x, y, 1.0, basis) {
        Ok(s) => s,
        Err(e) => return blank(format!("{}: {e}", DesignStatus::SolverFailed.name())),
    };
    let out = match invert_with_spectrum(&design, &spec) {
        Ok(o) => o,
        Err(e) => return blank(format!("{}: {e}", e.kind())),
    };
    let a = crate::merit::simple_criterion(&spec).unwrap_or(f64::NAN);
    RegionLabel {
        ec1_over_ej: x,
        u11_over_ej: y,
        feasible: out.is_feasible(),
        simple_a: a,
        simple_a_above_1: a > 1.0,
        eps_eg_over_ej: out.eps_eg,
        eps_gu_over_eps_eg: out.eps_gu / out.eps_eg,
        u22_over_ej: out.u22_over_ej,
        l_over_lj: out.l_over_lj,
        l2_over_lj: out.l2_over_lj,
        status: out.status.name().to_string(),
    }
}

/// Labels every grid point. Per-point failures land in the row status.
pub fn sweep(grid: &SweepGrid, basis: &AaBasis, par: Parallelism) -> Result<Vec<RegionLabel>> {
    grid.validate()?;
    let pts = grid.points();
    Ok(exec::map(&pts, par, |&(x, y)| label_point(x, y, grid, basis)))
}

/// Sign changes of `f` between neighbouring points along U11 at fixed E_C1,
/// located by linear interpolation. Returns (E_C1/E_J, U11/E_J) pairs.
pub fn boundary_points<F: Fn(&RegionLabel) -> Option<f64>>(rows: &[RegionLabel], grid: &SweepGrid, f: F) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for col in rows.chunks(grid.u11_points) {
        for w in col.windows(2) {
            if let (Some(a), Some(b)) = (f(&w[0]), f(&w[1])) {
                if a.is_finite() && b.is_finite() && (a > 0.0) != (b > 0.0) {
                    let t = a / (a - b);
                    out.push((w[0].ec1_over_ej, w[0].u11_over_ej + t * (w[1].u11_over_ej - w[0].u11_over_ej)));
                }
            }
        }
    }
    out
}

/// Contour of U11 − U22 = 0 (the feasibility boundary).
pub fn feasibility_boundary(rows: &[RegionLabel], grid: &SweepGrid) -> Vec<(f64, f64)> {
    boundary_points(rows, grid, |r| r.u22_over_ej.is_finite().then(|| r.u11_over_ej - r.u22_over_ej))
}

/// Contour of A = 1.
pub fn criterion_boundary(rows: &[RegionLabel], grid: &SweepGrid) -> Vec<(f64, f64)> {
    boundary_points(rows, grid, |r| r.simple_a.is_finite().then(|| r.simple_a - 1.0))
}
