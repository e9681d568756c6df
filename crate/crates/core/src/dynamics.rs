//! Driven dynamics: pulse calibration, lab-frame propagation of the
//! two-tone protocol, the T sweep, and the reduced Λ / multi-Λ models.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atom::{AaSpectrum, LEVEL_U};
use crate::eqr::{Interaction, Label, LabeledEigensystem};
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::study::CaseStudy;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Stirap,
    Raman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    Q,
    Gamma,
}

impl Port {
    pub fn name(&self) -> &'static str {
        match self {
            Port::Q => "q",
            Port::Gamma => "gamma",
        }
    }
}

/// Atomic drive operator for a port (q̂ = i·Im q, or γ̂), on the first `n` levels.
pub fn port_operator(spec: &AaSpectrum, n: usize, port: Port) -> DMatrix<Complex64> {
    match port {
        Port::Q => DMatrix::from_fn(n, n, |i, j| I * spec.q_imag[(i, j)]),
        Port::Gamma => DMatrix::from_fn(n, n, |i, j| Complex64::new(spec.gamma[(i, j)], 0.0)),
    }
}

/// User-facing protocol settings. `tau` is in units of `t_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolParams {
    pub kind: ProtocolKind,
    pub port: Port,
    pub omega0: f64,
    pub t_width: f64,
    pub tau: f64,
    pub delta_p: f64,
    pub delta_s: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            kind: ProtocolKind::Stirap,
            port: Port::Q,
            omega0: 0.005,
            t_width: 3000.0,
            tau: 0.7,
            delta_p: 0.0,
            delta_s: 0.0,
        }
    }
}

impl ProtocolParams {
    pub fn raman(port: Port, omega0: f64, t_width: f64, detuning: f64) -> Self {
        ProtocolParams { kind: ProtocolKind::Raman, port, omega0, t_width, tau: 0.0, delta_p: detuning, delta_s: detuning }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 >= 0.0 && self.omega0.is_finite()) {
            return Err(Error::Config(format!("omega0 must be non-negative, got {}", self.omega0)));
        }
        if !(self.t_width > 0.0 && self.t_width.is_finite()) {
            return Err(Error::Config(format!("t_width must be positive, got {}", self.t_width)));
        }
        match self.kind {
            ProtocolKind::Stirap if self.tau <= 0.0 => {
                Err(Error::Config("STIRAP needs tau > 0 (Stokes before pump)".into()))
            }
            ProtocolKind::Raman if self.tau != 0.0 => Err(Error::Config("Raman protocol needs tau = 0".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveProtocol {
    pub params: ProtocolParams,
    pub w_p_max: f64,
    pub w_s_max: f64,
    pub omega_p: f64,
    pub omega_s: f64,
    /// ⟨Ψ_0u|ô|Ψ_0⟩ and ⟨Ψ_2u|ô|Ψ_0⟩ in the model the protocol was calibrated on.
    pub pump_element: Complex64,
    pub stokes_element: Complex64,
}

impl DriveProtocol {
    pub fn pump_envelope(&self, t: f64) -> f64 {
        let p = &self.params;
        self.w_p_max * (-((t - p.tau * p.t_width) / p.t_width).powi(2)).exp()
    }

    pub fn stokes_envelope(&self, t: f64) -> f64 {
        let p = &self.params;
        self.w_s_max * (-((t + p.tau * p.t_width) / p.t_width).powi(2)).exp()
    }

    /// W(t) = 𝒲_p(t) cos ω_p t + 𝒲_s(t) cos ω_s t.
    pub fn field(&self, t: f64) -> f64 {
        self.pump_envelope(t) * (self.omega_p * t).cos() + self.stokes_envelope(t) * (self.omega_s * t).cos()
    }

    pub fn window(&self) -> (f64, f64) {
        (-3.0 * self.params.t_width, 3.0 * self.params.t_width)
    }

    /// Same envelopes, carriers re-tuned to the energies of another eigensystem.
    pub fn retuned(&self, eig: &LabeledEigensystem) -> Result<DriveProtocol> {
        let (wp, ws) = carriers(eig, &self.params)?;
        Ok(DriveProtocol { omega_p: wp, omega_s: ws, ..*self })
    }

    /// Peak Stokes Rabi frequency in a given model.
    pub fn stokes_rabi(&self, eig: &LabeledEigensystem, atomic_op: &DMatrix<Complex64>) -> Result<f64> {
        Ok(self.w_s_max * element(eig, Label::Nu(2), Label::FalseVacuum, atomic_op)?.norm())
    }
}

fn carriers(eig: &LabeledEigensystem, p: &ProtocolParams) -> Result<(f64, f64)> {
    let e0 = eig.energy(Label::FalseVacuum)?;
    let e0u = eig.energy(Label::Nu(0))?;
    let e2u = eig.energy(Label::Nu(2))?;
    Ok((e0 - e0u - p.delta_p, e0 - e2u - p.delta_s))
}

/// ⟨Ψ_a|ô ⊗ 1|Ψ_b⟩ for a complex atomic operator.
pub fn element(eig: &LabeledEigensystem, a: Label, b: Label, op: &DMatrix<Complex64>) -> Result<Complex64> {
    let (a, b) = (eig.get(a)?, eig.get(b)?);
    let mut s = Complex64::new(0.0, 0.0);
    for n in 0..eig.n_fock {
        for i in 0..eig.n_atom {
            let l = eig.amplitude(a, n, i);
            if l == 0.0 {
                continue;
            }
            for j in 0..eig.n_atom {
                s += op[(i, j)] * (l * eig.amplitude(b, n, j));
            }
        }
    }
    Ok(s)
}

/// Largest 𝒲^max accepted by [`calibrate_protocol`] before the bridge is
/// considered missing.
pub const DEFAULT_W_CAP: f64 = 10.0;

/// Sets 𝒲_p^max = Ω0/|⟨Ψ_0u|ô|Ψ_0⟩| and 𝒲_s^max = Ω0/|⟨Ψ_2u|ô|Ψ_0⟩| and the
/// carriers ω_p = E_0 − E_0u − δ_p, ω_s = E_0 − E_2u − δ_s.
pub fn calibrate_protocol(
    eig: &LabeledEigensystem,
    atomic_op: &DMatrix<Complex64>,
    params: &ProtocolParams,
    w_cap: f64,
) -> Result<DriveProtocol> {
    params.validate()?;
    let pump = element(eig, Label::Nu(0), Label::FalseVacuum, atomic_op)?;
    let stokes = element(eig, Label::Nu(2), Label::FalseVacuum, atomic_op)?;
    let w_p = params.omega0 / pump.norm();
    let w_s = params.omega0 / stokes.norm();
    if !(w_s.is_finite() && w_s <= w_cap) {
        return Err(Error::ProtocolImpossible(format!(
            "Stokes bridge ⟨Ψ_2u|ô|Ψ_0⟩ = {:.3e} needs 𝒲_s^max = {w_s:.3e} (cap {w_cap})",
            stokes.norm()
        )));
    }
    if !(w_p.is_finite() && w_p <= w_cap) {
        return Err(Error::ProtocolImpossible(format!(
            "pump bridge ⟨Ψ_0u|ô|Ψ_0⟩ = {:.3e} needs 𝒲_p^max = {w_p:.3e} (cap {w_cap})",
            pump.norm()
        )));
    }
    let (omega_p, omega_s) = carriers(eig, params)?;
    Ok(DriveProtocol { params: *params, w_p_max: w_p, w_s_max: w_s, omega_p, omega_s, pump_element: pump, stokes_element: stokes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveOptions {
    pub dt: f64,
    /// Dressed states up to this energy above the ground state are propagated.
    pub energy_cutoff: f64,
    pub n_samples: usize,
    pub norm_tol: f64,
    /// Rerun at dt/2 and compare the final η.
    pub check_dt: bool,
    pub dt_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { dt: 0.02, energy_cutoff: 3.5, n_samples: 601, norm_tol: 1e-9, check_dt: false, dt_tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub p_psi0u: f64,
    pub p_psi0: f64,
    pub p_psi2u: f64,
    pub eta: f64,
    pub n_u: f64,
    pub n_total: f64,
    pub norm: f64,
    /// Weight on product states |n, i⟩ with n + i odd.
    pub p_odd_parity: f64,
}

impl Sample {
    pub const CSV_HEADER: &'static str = "t,p_Psi0u,p_Psi0,p_Psi2u,eta,n_u,n_total,norm";

    pub fn csv_row(&self) -> String {
        use crate::design::fmt_num;
        [self.t, self.p_psi0u, self.p_psi0, self.p_psi2u, self.eta, self.n_u, self.n_total, self.norm]
            .iter()
            .map(|&v| fmt_num(v))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryResult {
    pub samples: Vec<Sample>,
    pub final_state: Sample,
    pub norm_drift: f64,
    pub steps: usize,
    pub dt: f64,
    pub basis_dim: usize,
    /// Final populations of the kept eigenstates, by eigenstate index.
    pub final_populations: Vec<(usize, f64)>,
    /// |Δη(t_f)| under dt halving, when checked.
    pub dt_shift: Option<f64>,
}

/// Propagator state for one model and drive operator.
struct Propagator {
    /// Dressed energies relative to the ground state, for the kept states.
    energies: Vec<f64>,
    /// Product-basis coefficients of the kept dressed states (columns).
    states: DMatrix<f64>,
    /// Eigenvalues and eigenvectors of the drive operator in the kept basis.
    lambda: Vec<f64>,
    w: DMatrix<Complex64>,
    kept_index: Vec<usize>,
}

impl Propagator {
    fn new(eig: &LabeledEigensystem, atomic_op: &DMatrix<Complex64>, cutoff: f64, needed: &[usize]) -> Result<Self> {
        let e0 = eig.energies[0];
        let kept_index: Vec<usize> = (0..eig.dim()).filter(|&k| eig.energies[k] - e0 <= cutoff).collect();
        for &m in needed {
            if !kept_index.contains(&m) {
                return Err(Error::Config(format!(
                    "eigenstate {m} (E − E_0 = {:.3}) lies above energy_cutoff = {cutoff}",
                    eig.energies[m] - e0
                )));
            }
        }
        let k = kept_index.len();
        let states = DMatrix::from_fn(eig.dim(), k, |r, c| eig.vectors[(r, kept_index[c])]);
        let energies = kept_index.iter().map(|&m| eig.energies[m] - e0).collect();
        // Drive operator in the kept dressed basis.
        let na = eig.n_atom;
        let mut op = DMatrix::<Complex64>::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let mut s = Complex64::new(0.0, 0.0);
                for n in 0..eig.n_fock {
                    for i in 0..na {
                        let l = states[(n * na + i, a)];
                        if l == 0.0 {
                            continue;
                        }
                        for j in 0..na {
                            s += atomic_op[(i, j)] * (l * states[(n * na + j, b)]);
                        }
                    }
                }
                op[(a, b)] = s;
            }
        }
        let herm = (&op - op.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-10 {
            return Err(Error::Domain(format!("drive operator is not Hermitian (deviation {herm:.2e})")));
        }
        let se = op.symmetric_eigen();
        Ok(Propagator { energies, states, lambda: se.eigenvalues.iter().copied().collect(), w: se.eigenvectors, kept_index })
    }

    fn dim(&self) -> usize {
        self.energies.len()
    }

    fn observe(&self, t: f64, c: &DVector<Complex64>, eig: &LabeledEigensystem, pos: &[usize; 3]) -> Sample {
        let prod = self.states.map(|x| Complex64::new(x, 0.0)) * c;
        let na = eig.n_atom;
        let (mut eta, mut n_u, mut n_total, mut odd) = (0.0, 0.0, 0.0, 0.0);
        for n in 0..eig.n_fock {
            for i in 0..na {
                let p = prod[n * na + i].norm_sqr();
                n_total += n as f64 * p;
                if (n + i) % 2 == 1 {
                    odd += p;
                }
                if i == LEVEL_U {
                    n_u += n as f64 * p;
                    if n > 0 {
                        eta += p;
                    }
                }
            }
        }
        Sample {
            t,
            p_psi0u: c[pos[0]].norm_sqr(),
            p_psi0: c[pos[1]].norm_sqr(),
            p_psi2u: c[pos[2]].norm_sqr(),
            eta,
            n_u,
            n_total,
            norm: c.norm(),
            p_odd_parity: odd,
        }
    }
}

/// Nearest unitary matrix (polar factor).
fn unitarize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let k = m.nrows();
    let svd = m.svd(true, true);
    let mut u = svd.u.expect("u requested") * svd.v_t.expect("v_t requested");
    // One Newton–Schulz step, then remove the residual mean norm gain.
    let g = u.adjoint() * &u;
    u = &u * (DMatrix::<Complex64>::identity(k, k) * Complex64::new(1.5, 0.0) - g * Complex64::new(0.5, 0.0));
    let gain = (u.adjoint() * &u).trace().re / k as f64;
    u * Complex64::new(gain.sqrt().recip(), 0.0)
}

fn run(
    eig: &LabeledEigensystem,
    prop: &Propagator,
    protocol: &DriveProtocol,
    dt_max: f64,
    n_samples: usize,
) -> Result<(Vec<Sample>, Vec<(usize, f64)>, usize, f64)> {
    let (t0, t1) = protocol.window();
    let steps = ((t1 - t0) / dt_max).ceil() as usize;
    let dt = (t1 - t0) / steps as f64;
    let k = prop.dim();
    let pos_of = |l: Label| -> Result<usize> {
        let m = eig.get(l)?;
        prop.kept_index.iter().position(|&x| x == m).ok_or_else(|| Error::Lookup(l.to_string()))
    };
    let pos = [pos_of(Label::Nu(0))?, pos_of(Label::FalseVacuum)?, pos_of(Label::Nu(2))?];

    let half: DVector<Complex64> = DVector::from_iterator(k, prop.energies.iter().map(|&e| (-I * e * dt * 0.5).exp()));
    let w_adj = prop.w.adjoint();
    // M = W† e^{−iD dt} W maps between consecutive drive kicks.
    let full_phase = DMatrix::from_diagonal(&half.map(|z| z * z));
    let m = unitarize(&w_adj * full_phase * &prop.w);
    let half_diag = DMatrix::from_diagonal(&half);
    let to_dressed = &half_diag * &prop.w;

    let mut c0 = DVector::<Complex64>::zeros(k);
    c0[0] = Complex64::new(1.0, 0.0);
    let mut phi = &w_adj * half.component_mul(&c0);
    let mut buf = DVector::<Complex64>::zeros(k);

    let sample_every = (steps / n_samples.max(1)).max(1);
    let mut samples = vec![prop.observe(t0, &c0, eig, &pos)];
    let mut pops = Vec::new();
    for s in 0..steps {
        let t_mid = t0 + (s as f64 + 0.5) * dt;
        let wt = protocol.field(t_mid);
        for (x, &l) in phi.iter_mut().zip(&prop.lambda) {
            *x *= (-I * (wt * l * dt)).exp();
        }
        let last = s + 1 == steps;
        if last || (s + 1) % sample_every == 0 {
            let c = &to_dressed * &phi;
            samples.push(prop.observe(t0 + (s + 1) as f64 * dt, &c, eig, &pos));
            if last {
                pops = prop.kept_index.iter().zip(c.iter()).map(|(&m, z)| (m, z.norm_sqr())).collect();
            }
        }
        if !last {
            m.mul_to(&phi, &mut buf);
            std::mem::swap(&mut phi, &mut buf);
        }
    }
    Ok((samples, pops, steps, dt))
}

/// Lab-frame propagation of H_model + W(t)·ô from the lowest eigenstate.
pub fn evolve(
    eig: &LabeledEigensystem,
    atomic_op: &DMatrix<Complex64>,
    protocol: &DriveProtocol,
    opts: &EvolveOptions,
) -> Result<TrajectoryResult> {
    if !(opts.dt > 0.0 && opts.dt <= 0.02 + 1e-15) {
        return Err(Error::Config(format!("dt must be in (0, 0.02], got {}", opts.dt)));
    }
    if eig.get(Label::Nu(0))? != 0 {
        log::warn!("the lowest eigenstate is not Ψ_0u; starting from the lowest eigenstate anyway");
    }
    let needed = [eig.get(Label::Nu(0))?, eig.get(Label::FalseVacuum)?, eig.get(Label::Nu(2))?];
    let prop = Propagator::new(eig, atomic_op, opts.energy_cutoff, &needed)?;
    let (samples, final_populations, steps, dt) = run(eig, &prop, protocol, opts.dt, opts.n_samples)?;
    let final_state = *samples.last().expect("at least one sample");
    let norm_drift = samples.iter().map(|s| (s.norm - 1.0).abs()).fold(0.0, f64::max);
    if norm_drift > opts.norm_tol {
        return Err(Error::Integrator(format!("norm drift {norm_drift:.2e} exceeds {:.1e}", opts.norm_tol)));
    }
    let dt_shift = if opts.check_dt {
        let (half, _, _, _) = run(eig, &prop, protocol, opts.dt / 2.0, 1)?;
        let shift = (half.last().unwrap().eta - final_state.eta).abs();
        if shift > opts.dt_tol {
            return Err(Error::Convergence { estimate: shift, tolerance: opts.dt_tol });
        }
        Some(shift)
    } else {
        None
    };
    Ok(TrajectoryResult { samples, final_state, norm_drift, steps, dt, basis_dim: prop.dim(), final_populations, dt_shift })
}

/// Full protocol on a case study: calibrate on the full model, then run the
/// requested variant (carriers re-tuned for the rotating-wave model).
pub fn run_case(
    cs: &CaseStudy,
    variant: Interaction,
    params: &ProtocolParams,
    opts: &EvolveOptions,
) -> Result<(DriveProtocol, TrajectoryResult)> {
    let op = port_operator(&cs.spectrum, cs.full.n_atom, params.port);
    let base = calibrate_protocol(&cs.eig_full, &op, params, DEFAULT_W_CAP)?;
    let (_, eig) = cs.model(variant)?;
    let protocol = if variant == Interaction::Full { base } else { base.retuned(eig)? };
    let traj = evolve(eig, &op, &protocol, opts)?;
    Ok((protocol, traj))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub variant: Interaction,
    pub port: Port,
    pub t_width: f64,
    pub omega_s_t: f64,
    pub eta_final: f64,
    pub p_target: f64,
    pub n_u: f64,
    pub n_total: f64,
    pub status: String,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "variant,port,T,omega_s_T,eta_final,p_target,n_u,n_total,status";

    pub fn csv_row(&self) -> String {
        use crate::design::fmt_num;
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.variant.name(),
            self.port.name(),
            fmt_num(self.t_width),
            fmt_num(self.omega_s_t),
            fmt_num(self.eta_final),
            fmt_num(self.p_target),
            fmt_num(self.n_u),
            fmt_num(self.n_total),
            self.status
        )
    }
}

/// Final-time figures for every (variant, port, T). The pulse amplitudes are
/// calibrated once per port on the full model (fixed Ω0) and reused for all T.
pub fn sweep_t(
    cs: &CaseStudy,
    ports: &[Port],
    variants: &[Interaction],
    base: &ProtocolParams,
    t_values: &[f64],
    opts: &EvolveOptions,
    par: Parallelism,
) -> Vec<SweepRow> {
    let mut jobs = Vec::new();
    for &variant in variants {
        for &port in ports {
            for &t in t_values {
                jobs.push((variant, port, t));
            }
        }
    }
    exec::map(&jobs, par, |&(variant, port, t)| {
        let params = ProtocolParams { port, t_width: t, ..*base };
        let fail = |e: Error| SweepRow {
            variant,
            port,
            t_width: t,
            omega_s_t: f64::NAN,
            eta_final: f64::NAN,
            p_target: f64::NAN,
            n_u: f64::NAN,
            n_total: f64::NAN,
            status: format!("{}: {e}", e.kind()),
        };
        let op = port_operator(&cs.spectrum, cs.full.n_atom, port);
        let result = (|| {
            let (protocol, traj) = run_case(cs, variant, &params, opts)?;
            let (_, eig) = cs.model(variant)?;
            let omega_s = protocol.stokes_rabi(eig, &op)?;
            Ok::<_, Error>((omega_s, traj))
        })();
        match result {
            Ok((omega_s, traj)) => SweepRow {
                variant,
                port,
                t_width: t,
                omega_s_t: omega_s * t,
                eta_final: traj.final_state.eta,
                p_target: traj.final_state.p_psi2u,
                n_u: traj.final_state.n_u,
                n_total: traj.final_state.n_total,
                status: "ok".into(),
            },
            Err(e) => fail(e),
        }
    })
}

/// Rotating-frame pulses for the three-level Λ among {|0u⟩, |Φ_0⟩, |2u⟩}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPulses {
    pub omega_p_max: f64,
    pub omega_s_max: f64,
    pub t_width: f64,
    /// Delay in units of `t_width`; positive means Stokes first.
    pub tau: f64,
    pub delta_p: f64,
    pub delta_s: f64,
}

impl LambdaPulses {
    /// Peak Rabi frequencies from the drive amplitudes, the u–g dipole element
    /// and the overlaps ⟨0g|Φ_0⟩, ⟨2g|Φ_0⟩.
    pub fn from_overlaps(w_p: f64, w_s: f64, dipole_ug: f64, overlap_0g: f64, overlap_2g: f64, t_width: f64, tau: f64) -> Self {
        LambdaPulses {
            omega_p_max: (w_p * dipole_ug * overlap_0g).abs(),
            omega_s_max: (w_s * dipole_ug * overlap_2g).abs(),
            t_width,
            tau,
            delta_p: 0.0,
            delta_s: 0.0,
        }
    }

    pub fn omega_p(&self, t: f64) -> f64 {
        self.omega_p_max * (-((t - self.tau * self.t_width) / self.t_width).powi(2)).exp()
    }

    pub fn omega_s(&self, t: f64) -> f64 {
        self.omega_s_max * (-((t + self.tau * self.t_width) / self.t_width).powi(2)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSample {
    pub t: f64,
    pub p_0u: f64,
    pub p_phi0: f64,
    pub p_2u: f64,
}

/// exp(−i H dt) ψ for a small real symmetric H.
fn expm_apply_real(h: &DMatrix<f64>, dt: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let se = h.clone().symmetric_eigen();
    let v = se.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let ph = DMatrix::from_diagonal(&DVector::from_iterator(h.nrows(), se.eigenvalues.iter().map(|&l| (-I * l * dt).exp())));
    &v * ph * (v.adjoint() * psi)
}

/// exp(−i H dt) ψ for a small Hermitian H.
fn expm_apply(h: &DMatrix<Complex64>, dt: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let se = h.clone().symmetric_eigen();
    let ph = DMatrix::from_diagonal(&DVector::from_iterator(h.nrows(), se.eigenvalues.iter().map(|&l| (-I * l * dt).exp())));
    &se.eigenvectors * ph * (se.eigenvectors.adjoint() * psi)
}

/// Integrates H = [[0, Ω_p/2, 0], [Ω_p/2, Δ_p, Ω_s/2], [0, Ω_s/2, Δ_p − Δ_s]]
/// over [−3T, 3T] from |0u⟩ with a midpoint exponential.
pub fn evolve_reduced_lambda(pulses: &LambdaPulses, dt: f64, n_samples: usize) -> Result<Vec<LambdaSample>> {
    if !(dt > 0.0 && pulses.t_width > 0.0) {
        return Err(Error::Config("dt and t_width must be positive".into()));
    }
    let (t0, t1) = (-3.0 * pulses.t_width, 3.0 * pulses.t_width);
    let steps = ((t1 - t0) / dt).ceil() as usize;
    let dt = (t1 - t0) / steps as f64;
    let every = (steps / n_samples.max(1)).max(1);
    let mut psi = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);
    let sample = |t: f64, psi: &DVector<Complex64>| LambdaSample { t, p_0u: psi[0].norm_sqr(), p_phi0: psi[1].norm_sqr(), p_2u: psi[2].norm_sqr() };
    let mut out = vec![sample(t0, &psi)];
    for s in 0..steps {
        let t = t0 + (s as f64 + 0.5) * dt;
        let (op, os) = (pulses.omega_p(t), pulses.omega_s(t));
        let h = DMatrix::from_row_slice(
            3,
            3,
            &[0.0, op / 2.0, 0.0, op / 2.0, pulses.delta_p, os / 2.0, 0.0, os / 2.0, pulses.delta_p - pulses.delta_s],
        );
        psi = expm_apply_real(&h, dt, &psi);
        if (s + 1) % every == 0 || s + 1 == steps {
            out.push(sample(t0 + (s + 1) as f64 * dt, &psi));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiLambdaResult {
    /// Final populations of Ψ_0 and Ψ_{2m u}, m = 0..=rungs.
    pub p_psi0: f64,
    pub p_rungs: Vec<f64>,
    /// Σ_{m>0} p(Ψ_{2m u}).
    pub eta: f64,
}

/// Rotating-frame chain of Λ/Vee linkages Ψ_{2m u} ↔ Ψ_0 ↔ Ψ_{2(m+1) u},
/// truncated to Ψ_{2m u} with m ≤ `rungs`. Each tone couples every rung with
/// its own residual phase.
pub fn evolve_multi_lambda(
    eig: &LabeledEigensystem,
    atomic_op: &DMatrix<Complex64>,
    protocol: &DriveProtocol,
    rungs: usize,
    dt: f64,
) -> Result<MultiLambdaResult> {
    let labels: Vec<Label> = (0..=rungs).map(|m| Label::Nu(2 * m)).collect();
    let e0 = eig.energy(Label::FalseVacuum)?;
    let mut couplings = Vec::new();
    for l in &labels {
        let ea = eig.energy(*l)?;
        let el = element(eig, *l, Label::FalseVacuum, atomic_op)?;
        couplings.push((el, ea - e0));
    }
    let n = labels.len() + 1;
    let (t0, t1) = protocol.window();
    let steps = ((t1 - t0) / dt).ceil() as usize;
    let dt = (t1 - t0) / steps as f64;
    let mut psi = DVector::<Complex64>::zeros(n);
    psi[1] = Complex64::new(1.0, 0.0);
    for s in 0..steps {
        let t = t0 + (s as f64 + 0.5) * dt;
        let (wp, ws) = (protocol.pump_envelope(t), protocol.stokes_envelope(t));
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for (k, &(el, de)) in couplings.iter().enumerate() {
            // Interaction picture: ⟨a|W ô|Ψ_0⟩ e^{i(E_a − E_0)t}, keeping e^{+iω t} halves of each tone.
            let mut c = Complex64::new(0.0, 0.0);
            if k == 0 || k < rungs + 1 {
                c += 0.5 * wp * el * (I * (de + protocol.omega_p) * t).exp();
            }
            if k >= 1 {
                c += 0.5 * ws * el * (I * (de + protocol.omega_s) * t).exp();
            }
            h[(k + 1, 0)] = c;
            h[(0, k + 1)] = c.conj();
        }
        psi = expm_apply(&h, dt, &psi);
    }
    let p_rungs: Vec<f64> = (0..labels.len()).map(|k| psi[k + 1].norm_sqr()).collect();
    Ok(MultiLambdaResult { p_psi0: psi[0].norm_sqr(), eta: p_rungs.iter().skip(1).sum(), p_rungs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulses(tau: f64, s: f64) -> LambdaPulses {
        let t = 100.0;
        LambdaPulses { omega_p_max: 30.0 / t, omega_s_max: s * 30.0 / t, t_width: t, tau, delta_p: 0.0, delta_s: 0.0 }
    }

    #[test]
    fn reduced_lambda_stirap() {
        let out = evolve_reduced_lambda(&pulses(0.7, 1.0), 0.05, 200).unwrap();
        let f = out.last().unwrap();
        assert!(f.p_2u > 0.98, "{f:?}");
        let max_mid = out.iter().map(|s| s.p_phi0).fold(0.0, f64::max);
        assert!(max_mid < 0.05, "{max_mid}");
    }

    #[test]
    fn reduced_lambda_needs_stokes() {
        let out = evolve_reduced_lambda(&pulses(0.7, 0.0), 0.05, 10).unwrap();
        assert!(out.last().unwrap().p_2u < 1e-20);
    }

    #[test]
    fn reduced_lambda_intuitive_order_is_worse() {
        let a = evolve_reduced_lambda(&pulses(0.7, 1.0), 0.05, 10).unwrap();
        let b = evolve_reduced_lambda(&pulses(-0.7, 1.0), 0.05, 10).unwrap();
        assert!(b.last().unwrap().p_2u < a.last().unwrap().p_2u - 0.1);
    }

    #[test]
    fn protocol_validation() {
        let mut p = ProtocolParams::default();
        assert!(p.validate().is_ok());
        p.tau = 0.0;
        assert!(p.validate().is_err());
        assert!(ProtocolParams::raman(Port::Q, 0.005, 3000.0, 0.025).validate().is_ok());
    }
}
