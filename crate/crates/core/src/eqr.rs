//! Extended quantum Rabi (EQR) model: a multilevel artificial atom coupled to
//! one harmonic mode, in the full or the rotating-wave (extended JC) form.
//!
//! Product basis |n, i⟩ (n photons, atomic level i) is stored at index
//! `n * n_atom + i`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::atom::{AaSpectrum, LEVEL_G, LEVEL_U};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    Full,
    /// Extended JC model: keeps a†|i⟩⟨j| + h.c. for every ε_j > ε_i.
    RotatingWave,
    /// Keeps only a†|i⟩⟨i+1| + h.c., the terms that commute with N̂.
    NumberConserving,
}

impl Interaction {
    pub fn name(&self) -> &'static str {
        match self {
            Interaction::Full => "full",
            Interaction::RotatingWave => "rotating_wave",
            Interaction::NumberConserving => "number_conserving",
        }
    }

    /// Whether a†|i⟩⟨j| is co-rotating under this variant's rule.
    fn corotating(&self, energies: &[f64], i: usize, j: usize) -> bool {
        match self {
            Interaction::Full | Interaction::RotatingWave => energies[j] > energies[i],
            Interaction::NumberConserving => j == i + 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EqrModel {
    pub n_atom: usize,
    pub n_fock: usize,
    pub omega_c: f64,
    pub g_prefactor: f64,
    pub atom_energies: Vec<f64>,
    /// g_ij = g_prefactor · γ_ij.
    pub couplings: DMatrix<f64>,
    pub interaction: Interaction,
    /// Weight of the counter-rotating terms (1 = full model, 0 = rotating wave).
    pub counter_rotating_scale: f64,
    /// Rule deciding which terms count as co-rotating.
    pub corotating_rule: Interaction,
    pub hamiltonian: DMatrix<f64>,
}

pub fn build_eqr(
    spec: &AaSpectrum,
    omega_c: f64,
    g_prefactor: f64,
    n_atom: usize,
    n_fock: usize,
    interaction: Interaction,
) -> Result<EqrModel> {
    let scale = if interaction == Interaction::Full { 1.0 } else { 0.0 };
    let rule = if interaction == Interaction::Full { Interaction::RotatingWave } else { interaction };
    let mut m = build_eqr_scaled(spec, omega_c, g_prefactor, n_atom, n_fock, rule, scale)?;
    m.interaction = interaction;
    Ok(m)
}

/// The counter-rotating part (with respect to `rule`) multiplied by `scale`:
/// 0 gives the rotating-wave model, 1 the full one.
pub fn build_eqr_scaled(
    spec: &AaSpectrum,
    omega_c: f64,
    g_prefactor: f64,
    n_atom: usize,
    n_fock: usize,
    rule: Interaction,
    scale: f64,
) -> Result<EqrModel> {
    if n_atom < 2 || n_atom > spec.n_levels() {
        return Err(Error::Truncation(format!(
            "n_atom = {n_atom} must be in 2..={} (levels available in the atomic spectrum)",
            spec.n_levels()
        )));
    }
    if n_fock < 8 {
        return Err(Error::Truncation(format!("n_fock = {n_fock} is too small (need at least 8)")));
    }
    if !(omega_c > 0.0 && omega_c.is_finite()) {
        return Err(Error::Domain(format!("omega_c must be positive, got {omega_c}")));
    }
    let atom_energies: Vec<f64> = spec.eigenvalues[..n_atom].to_vec();
    let couplings = DMatrix::from_fn(n_atom, n_atom, |i, j| g_prefactor * spec.gamma[(i, j)]);
    let interaction = if scale == 0.0 { rule } else { Interaction::Full };
    let mut m = EqrModel {
        n_atom,
        n_fock,
        omega_c,
        g_prefactor,
        atom_energies,
        couplings,
        interaction,
        counter_rotating_scale: scale,
        corotating_rule: if rule == Interaction::Full { Interaction::RotatingWave } else { rule },
        hamiltonian: DMatrix::zeros(0, 0),
    };
    m.hamiltonian = m.hamiltonian_at(1.0);
    Ok(m)
}

impl EqrModel {
    /// Hamiltonian with every coupling multiplied by `lambda`.
    pub fn hamiltonian_at(&self, lambda: f64) -> DMatrix<f64> {
        let rule = self.corotating_rule;
        let (na, nf) = (self.n_atom, self.n_fock);
        let dim = na * nf;
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for n in 0..nf {
            for i in 0..na {
                h[(n * na + i, n * na + i)] = self.atom_energies[i] + self.omega_c * n as f64;
            }
        }
        // g_ij a† |i⟩⟨j| : |n, j⟩ → sqrt(n+1) |n+1, i⟩
        for n in 0..nf - 1 {
            let amp = lambda * ((n + 1) as f64).sqrt();
            for i in 0..na {
                for j in 0..na {
                    let g = self.couplings[(i, j)];
                    if g == 0.0 {
                        continue;
                    }
                    let w = if rule.corotating(&self.atom_energies, i, j) { 1.0 } else { self.counter_rotating_scale };
                    if w == 0.0 {
                        continue;
                    }
                    let to = (n + 1) * na + i;
                    let from = n * na + j;
                    h[(to, from)] += w * g * amp;
                    h[(from, to)] += w * g * amp;
                }
            }
        }
        h
    }

    pub fn dim(&self) -> usize {
        self.n_atom * self.n_fock
    }

    pub fn index(&self, n: usize, i: usize) -> usize {
        n * self.n_atom + i
    }

    pub fn split_index(&self, k: usize) -> (usize, usize) {
        (k / self.n_atom, k % self.n_atom)
    }

    /// Eigenvalues of N̂ = a†a + Σ(i−1)|i⟩⟨i| on the product basis.
    pub fn excitation_number(&self) -> Vec<i64> {
        (0..self.dim())
            .map(|k| {
                let (n, i) = self.split_index(k);
                n as i64 + i as i64 - 1
            })
            .collect()
    }

    /// Frobenius norm of [H, D] for a diagonal operator D (an upper bound on
    /// the operator norm).
    fn commutator_with_diagonal(&self, d: &[f64]) -> f64 {
        let h = &self.hamiltonian;
        let mut s = 0.0;
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                let c = h[(a, b)] * (d[b] - d[a]);
                s += c * c;
            }
        }
        s.sqrt()
    }

    /// ‖[H, Π]‖ with Π = exp(iπN̂).
    pub fn parity_commutator_norm(&self) -> f64 {
        let d: Vec<f64> = self.excitation_number().iter().map(|&n| if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 }).collect();
        self.commutator_with_diagonal(&d)
    }

    /// ‖[H, N̂]‖.
    pub fn number_commutator_norm(&self) -> f64 {
        let d: Vec<f64> = self.excitation_number().iter().map(|&n| n as f64).collect();
        self.commutator_with_diagonal(&d)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let h = &self.hamiltonian;
        (h - h.transpose()).amax()
    }

    /// Atomic operator lifted to the product space, A ⊗ 1_mode.
    pub fn lift_atomic<T: nalgebra::Scalar + Copy + num_traits_zero::Zero>(&self, op: &DMatrix<T>) -> DMatrix<T> {
        let dim = self.dim();
        let mut out = DMatrix::<T>::from_element(dim, dim, T::zero());
        for n in 0..self.n_fock {
            for i in 0..self.n_atom {
                for j in 0..self.n_atom {
                    out[(self.index(n, i), self.index(n, j))] = op[(i, j)];
                }
            }
        }
        out
    }
}

mod num_traits_zero {
    pub trait Zero {
        fn zero() -> Self;
    }
    impl Zero for f64 {
        fn zero() -> Self {
            0.0
        }
    }
    impl Zero for num_complex::Complex64 {
        fn zero() -> Self {
            num_complex::Complex64::new(0.0, 0.0)
        }
    }
}

/// Tags for the eigenstates involved in the conversion protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    /// Ψ_nu, reducing to |n, u⟩ when the probe level decouples.
    Nu(usize),
    /// Ψ_0, the Rabi false vacuum (closest to |0, g⟩).
    FalseVacuum,
}

impl Label {
    /// Product-basis state the label is anchored to.
    pub fn anchor(&self) -> (usize, usize) {
        match *self {
            Label::Nu(n) => (n, LEVEL_U),
            Label::FalseVacuum => (0, LEVEL_G),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Nu(n) => write!(f, "Psi_{n}u"),
            Label::FalseVacuum => write!(f, "Psi_0"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "Psi_0" {
            return Ok(Label::FalseVacuum);
        }
        s.strip_prefix("Psi_")
            .and_then(|r| r.strip_suffix('u'))
            .and_then(|n| n.parse().ok())
            .map(Label::Nu)
            .ok_or_else(|| Error::Lookup(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPolicy {
    Ignore,
    Warn,
    Error,
}

/// How eigenstates get their tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMethod {
    /// Largest overlap with the anchor product state |n, u⟩ or |0, g⟩.
    MaxOverlap,
    /// Follow each anchor state while the couplings are switched on from
    /// zero, matching by overlap at every increment.
    Continuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LabelOptions {
    pub method: LabelMethod,
    /// Coupling increments used by [`LabelMethod::Continuation`].
    pub continuation_steps: usize,
    /// Label Ψ_nu for n = 0..=max_photons_labeled.
    pub max_photons_labeled: usize,
    pub max_dim: usize,
    /// Largest tolerated weight of a labeled state on the top Fock state or
    /// the top atomic level.
    pub boundary_weight_tol: f64,
    pub truncation_policy: TruncationPolicy,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            method: LabelMethod::Continuation,
            continuation_steps: 10,
            max_photons_labeled: 6,
            max_dim: 400,
            boundary_weight_tol: 1e-3,
            truncation_policy: TruncationPolicy::Warn,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledEigensystem {
    pub n_atom: usize,
    pub n_fock: usize,
    pub interaction: Interaction,
    /// Ascending eigenvalues.
    pub energies: Vec<f64>,
    /// Real eigenvectors, one column per eigenvalue.
    pub vectors: DMatrix<f64>,
    pub labels: BTreeMap<Label, usize>,
    /// |⟨anchor|Ψ_label⟩|².
    pub label_overlaps: BTreeMap<Label, f64>,
    /// Largest weight of a labeled state on the truncation boundary.
    pub boundary_weight: f64,
}

impl LabeledEigensystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn index(&self, n: usize, i: usize) -> usize {
        n * self.n_atom + i
    }

    pub fn get(&self, label: Label) -> Result<usize> {
        self.labels.get(&label).copied().ok_or_else(|| Error::Lookup(label.to_string()))
    }

    pub fn energy(&self, label: Label) -> Result<f64> {
        Ok(self.energies[self.get(label)?])
    }

    pub fn state(&self, label: Label) -> Result<DVector<f64>> {
        Ok(self.vectors.column(self.get(label)?).into_owned())
    }

    /// ⟨n, i|Ψ_m⟩.
    pub fn amplitude(&self, m: usize, n: usize, i: usize) -> f64 {
        self.vectors[(self.index(n, i), m)]
    }

    /// |⟨n, i|Ψ_m⟩|² for every eigenstate m and product state (n, i); rows are product states.
    pub fn overlap_table(&self) -> DMatrix<f64> {
        self.vectors.map(|x| x * x)
    }
}

fn sorted_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let dim = h.nrows();
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    // Sign convention: largest-magnitude component positive.
    for c in 0..dim {
        let mut col = vectors.column_mut(c);
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    (energies, vectors)
}

/// Gives each label the eigenvector with the largest |⟨target|Ψ⟩|², in order
/// of descending overlap. Ties keep the lower-energy state.
fn assign(vectors: &DMatrix<f64>, targets: &[(Label, DVector<f64>)]) -> Result<BTreeMap<Label, (usize, f64)>> {
    let mut candidates: Vec<(Label, usize, f64)> = targets
        .iter()
        .map(|(l, t)| {
            let ov = vectors.tr_mul(t);
            let mut best = (0, -1.0);
            for m in 0..ov.len() {
                let w = ov[m] * ov[m];
                if w > best.1 + 1e-14 {
                    best = (m, w);
                }
            }
            (*l, best.0, best.1)
        })
        .collect();
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut out = BTreeMap::new();
    let mut taken: BTreeMap<usize, Label> = BTreeMap::new();
    let mut conflicts = Vec::new();
    for (label, m, w) in candidates {
        if let Some(owner) = taken.get(&m) {
            conflicts.push(format!("{label} and {owner} both select eigenstate {m}"));
            continue;
        }
        taken.insert(m, label);
        out.insert(label, (m, w));
    }
    if !conflicts.is_empty() {
        return Err(Error::LabelConflict(conflicts.join("; ")));
    }
    Ok(out)
}

pub fn diagonalize_and_label(model: &EqrModel, opts: &LabelOptions) -> Result<LabeledEigensystem> {
    let dim = model.dim();
    if dim > opts.max_dim {
        return Err(Error::Resource(format!("dimension {dim} exceeds cap {}", opts.max_dim)));
    }
    let (energies, vectors) = sorted_eigen(&model.hamiltonian);

    let max_n = opts.max_photons_labeled.min(model.n_fock - 1);
    let mut wanted: Vec<Label> = (0..=max_n).map(Label::Nu).collect();
    wanted.push(Label::FalseVacuum);
    let anchor = |l: Label| {
        let (n, i) = l.anchor();
        let mut v = DVector::zeros(dim);
        v[model.index(n, i)] = 1.0;
        v
    };
    let mut targets: Vec<(Label, DVector<f64>)> = wanted.iter().map(|&l| (l, anchor(l))).collect();
    if let LabelMethod::Continuation = opts.method {
        let steps = opts.continuation_steps.max(1);
        for k in 1..steps {
            let (_, v) = sorted_eigen(&model.hamiltonian_at(k as f64 / steps as f64));
            let picked = assign(&v, &targets).map_err(|e| match e {
                Error::LabelConflict(m) => Error::LabelConflict(format!("at coupling fraction {k}/{steps}: {m}")),
                e => e,
            })?;
            for (l, t) in targets.iter_mut() {
                let mut next = v.column(picked[l].0).into_owned();
                if next.dot(t) < 0.0 {
                    next.neg_mut();
                }
                *t = next;
            }
        }
    }
    let picked = assign(&vectors, &targets)?;
    let labels: BTreeMap<Label, usize> = picked.iter().map(|(l, (m, _))| (*l, *m)).collect();
    let overlaps: BTreeMap<Label, f64> = labels
        .iter()
        .map(|(l, &m)| {
            let (n, i) = l.anchor();
            (*l, vectors[(model.index(n, i), m)].powi(2))
        })
        .collect();

    let mut boundary_weight = 0.0f64;
    for &m in labels.values() {
        let mut w = 0.0;
        for n in 0..model.n_fock {
            for i in 0..model.n_atom {
                if n == model.n_fock - 1 || i == model.n_atom - 1 {
                    w += vectors[(model.index(n, i), m)].powi(2);
                }
            }
        }
        boundary_weight = boundary_weight.max(w);
    }
    if boundary_weight > opts.boundary_weight_tol {
        let msg = format!(
            "labeled states carry weight {boundary_weight:.2e} on the truncation boundary (n_atom = {}, n_fock = {})",
            model.n_atom, model.n_fock
        );
        match opts.truncation_policy {
            TruncationPolicy::Ignore => {}
            TruncationPolicy::Warn => log::warn!("{msg}"),
            TruncationPolicy::Error => return Err(Error::Truncation(msg)),
        }
    }

    Ok(LabeledEigensystem {
        n_atom: model.n_atom,
        n_fock: model.n_fock,
        interaction: model.interaction,
        energies,
        vectors,
        labels,
        label_overlaps: overlaps,
        boundary_weight,
    })
}

/// One product-basis component of an eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Component {
    pub n: usize,
    pub level: usize,
    pub amplitude: f64,
}

/// Components ⟨n, i|Ψ_tag⟩, sorted by decreasing magnitude.
pub fn decompose_state(eig: &LabeledEigensystem, tag: Label) -> Result<Vec<Component>> {
    let m = eig.get(tag)?;
    let mut comps: Vec<Component> = (0..eig.dim())
        .map(|k| Component { n: k / eig.n_atom, level: k % eig.n_atom, amplitude: eig.vectors[(k, m)] })
        .collect();
    comps.sort_by(|a, b| b.amplitude.abs().total_cmp(&a.amplitude.abs()).then(a.n.cmp(&b.n)).then(a.level.cmp(&b.level)));
    Ok(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{solve_aa, AaBasis, LEVEL_E};

    fn set2_atom() -> AaSpectrum {
        solve_aa(1.0 / 0.9, 0.081, 1.0, &AaBasis::with_levels(10)).unwrap()
    }

    #[test]
    fn decoupled_limit_is_factorized() {
        let s = set2_atom();
        let wc = s.splitting(LEVEL_G, LEVEL_E);
        let m = build_eqr(&s, wc, 0.0, 8, 12, Interaction::Full).unwrap();
        let eig = diagonalize_and_label(&m, &LabelOptions::default()).unwrap();
        assert_eq!(eig.get(Label::Nu(0)).unwrap(), 0);
        for (l, w) in &eig.label_overlaps {
            assert!((w - 1.0).abs() < 1e-12, "{l}: {w}");
        }
        let comps = decompose_state(&eig, Label::FalseVacuum).unwrap();
        assert_eq!((comps[0].n, comps[0].level), (0, LEVEL_G));
        assert!((comps[0].amplitude - 1.0).abs() < 1e-12);
        assert!(comps[1].amplitude.abs() < 1e-12);
    }

    #[test]
    fn two_level_jc_doublets() {
        // Restrict to {g, e} by building a two-level spectrum by hand.
        let mut s = set2_atom();
        let g = 0.05;
        let eps = s.splitting(LEVEL_G, LEVEL_E);
        s.eigenvalues = vec![0.0, eps];
        s.gamma = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        s.q_imag = DMatrix::zeros(2, 2);
        let m = build_eqr(&s, eps, g, 2, 20, Interaction::RotatingWave).unwrap();
        let e = SymmetricEigen::new(m.hamiltonian.clone()).eigenvalues;
        let mut e: Vec<f64> = e.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        // Ground |0g⟩ at 0, then doublets (n+1)ω ± g√(n+1) for n = 0..n_fock−2.
        let mut expected = vec![0.0];
        for n in 0..19 {
            let k = (n + 1) as f64;
            expected.push(k * eps - g * k.sqrt());
            expected.push(k * eps + g * k.sqrt());
        }
        expected.push(19.0 * eps + eps); // |19, e⟩ is uncoupled at the cutoff
        expected.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    fn set2_models() -> (AaSpectrum, f64, f64) {
        let s = set2_atom();
        let wc = s.splitting(LEVEL_G, LEVEL_E);
        let g_pref = 0.5 * wc / s.gamma[(LEVEL_G, LEVEL_E)].abs();
        (s, wc, g_pref)
    }

    #[test]
    fn symmetry_invariants() {
        let (s, wc, g_pref) = set2_models();
        let m = build_eqr(&s, wc, g_pref, 8, 12, Interaction::Full).unwrap();
        assert!(m.parity_commutator_norm() < 1e-10);
        assert!(m.number_commutator_norm() > 1e-3);
        assert!(m.hermiticity_error() < 1e-12);
        let nc = build_eqr(&s, wc, g_pref, 8, 12, Interaction::NumberConserving).unwrap();
        assert!(nc.number_commutator_norm() < 1e-10);
        let rw = build_eqr(&s, wc, g_pref, 8, 12, Interaction::RotatingWave).unwrap();
        assert!(rw.parity_commutator_norm() < 1e-10);
        // a†|i⟩⟨i+3| is co-rotating by the energy rule but changes N̂ by −2.
        assert!(rw.number_commutator_norm() > 1e-3);
    }

    #[test]
    fn rotating_wave_conserves_number_on_a_ladder() {
        // Harmonic atom: γ couples nearest neighbours only.
        let s = solve_aa(0.5, 0.2, 0.0, &AaBasis::default()).unwrap();
        let wc = s.splitting(0, 1);
        let rw = build_eqr(&s, wc, 0.3 * wc, 8, 12, Interaction::RotatingWave).unwrap();
        assert!(rw.number_commutator_norm() < 1e-10);
    }

    #[test]
    fn false_vacuum_obeys_parity() {
        let (s, wc, g_pref) = set2_models();
        for v in [Interaction::Full, Interaction::RotatingWave] {
            let m = build_eqr(&s, wc, g_pref, 8, 12, v).unwrap();
            let eig = diagonalize_and_label(&m, &LabelOptions::default()).unwrap();
            for c in decompose_state(&eig, Label::FalseVacuum).unwrap() {
                if (c.n + c.level) % 2 == 0 {
                    assert!(c.amplitude.abs() < 1e-10, "{c:?}");
                }
            }
        }
        let nc = build_eqr(&s, wc, g_pref, 8, 12, Interaction::NumberConserving).unwrap();
        let eig = diagonalize_and_label(&nc, &LabelOptions::default()).unwrap();
        for c in decompose_state(&eig, Label::FalseVacuum).unwrap() {
            if c.n + c.level != 1 {
                assert!(c.amplitude.abs() < 1e-10, "{c:?}");
            }
        }
    }

    #[test]
    fn set_two_labels() {
        let (s, wc, g_pref) = set2_models();
        let m = build_eqr(&s, wc, g_pref, 8, 12, Interaction::Full).unwrap();
        let eig = diagonalize_and_label(&m, &LabelOptions::default()).unwrap();
        assert!(eig.label_overlaps[&Label::Nu(0)] > 0.9);
        assert!(eig.label_overlaps[&Label::Nu(2)] > 0.9);
        assert_ne!(eig.get(Label::Nu(0)).unwrap(), eig.get(Label::Nu(2)).unwrap());
        assert_eq!(eig.get(Label::Nu(0)).unwrap(), 0);
        // Two-virtual-photon component of the false vacuum, ~ (g/2ω_c)².
        let p0 = eig.get(Label::FalseVacuum).unwrap();
        let w = eig.amplitude(p0, 2, LEVEL_G).powi(2);
        assert!(w > 1e-4 && w < 1.0, "{w}");
    }

    #[test]
    fn label_methods_agree_at_weak_coupling() {
        let (s, wc, g_pref) = set2_models();
        let m = build_eqr(&s, wc, 0.1 * g_pref, 8, 12, Interaction::Full).unwrap();
        let a = diagonalize_and_label(&m, &LabelOptions::default()).unwrap();
        let b = diagonalize_and_label(&m, &LabelOptions { method: LabelMethod::MaxOverlap, ..Default::default() }).unwrap();
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn spectrum_converged_in_truncation() {
        let s = solve_aa(1.0 / 0.9, 0.081, 1.0, &AaBasis::with_levels(14)).unwrap();
        let wc = s.splitting(LEVEL_G, LEVEL_E);
        let g_pref = 0.5 * wc / s.gamma[(LEVEL_G, LEVEL_E)].abs();
        let ev = |na, nf| {
            let m = build_eqr(&s, wc, g_pref, na, nf, Interaction::Full).unwrap();
            let mut e: Vec<f64> = SymmetricEigen::new(m.hamiltonian).eigenvalues.iter().copied().collect();
            e.sort_by(f64::total_cmp);
            e
        };
        let (a, b) = (ev(12, 12), ev(14, 16));
        for k in 0..10 {
            let r = (a[k] - b[k]).abs() / b[k].abs();
            assert!(r < 1e-6, "level {k}: {} vs {} ({r:e})", a[k], b[k]);
        }
    }

    #[test]
    fn rabi_ground_energy_decreases_with_coupling() {
        let mut s = set2_atom();
        let eps = s.splitting(LEVEL_G, LEVEL_E);
        s.eigenvalues = vec![0.0, eps];
        s.gamma = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let mut last = f64::INFINITY;
        for k in 0..=10 {
            let g = 0.1 * k as f64 * eps;
            let m = build_eqr(&s, eps, g, 2, 30, Interaction::Full).unwrap();
            let e0 = SymmetricEigen::new(m.hamiltonian).eigenvalues.min();
            assert!(e0 < last || k == 0);
            last = e0;
        }
    }

    #[test]
    fn label_round_trip() {
        for l in [Label::Nu(0), Label::Nu(12), Label::FalseVacuum] {
            assert_eq!(l.to_string().parse::<Label>().unwrap(), l);
        }
        assert!("Psi_x".parse::<Label>().is_err());
    }

    #[test]
    fn resource_cap() {
        let s = set2_atom();
        let m = build_eqr(&s, 0.2, 0.0, 8, 12, Interaction::Full).unwrap();
        let opts = LabelOptions { max_dim: 50, ..Default::default() };
        assert!(matches!(diagonalize_and_label(&m, &opts), Err(Error::Resource(_))));
    }

    #[test]
    fn unknown_tag() {
        let s = set2_atom();
        let m = build_eqr(&s, 0.2, 0.0, 8, 12, Interaction::Full).unwrap();
        let eig = diagonalize_and_label(&m, &LabelOptions::default()).unwrap();
        assert!(matches!(decompose_state(&eig, Label::Nu(40)), Err(Error::Lookup(_))));
    }

    #[test]
    fn atomic_truncation_checked() {
        let s = set2_atom();
        assert!(matches!(build_eqr(&s, 0.2, 0.0, 11, 12, Interaction::Full), Err(Error::Truncation(_))));
    }
}
