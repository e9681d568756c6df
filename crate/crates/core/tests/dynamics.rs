use std::sync::OnceLock;

use virtphot::dynamics::*;
use virtphot::eqr::{Interaction, Label};
use virtphot::study::{case_study_design, prepare, CaseStudy, StudyOptions};
use virtphot::Error;

fn set_two() -> &'static CaseStudy {
    static CS: OnceLock<CaseStudy> = OnceLock::new();
    CS.get_or_init(|| prepare(&case_study_design(2).unwrap(), &StudyOptions::default()).unwrap())
}

fn q_op(cs: &CaseStudy) -> nalgebra::DMatrix<num_complex::Complex64> {
    port_operator(&cs.spectrum, cs.full.n_atom, Port::Q)
}

#[test]
fn stokes_amplitude_for_set_two() {
    let cs = set_two();
    let p = calibrate_protocol(&cs.eig_full, &q_op(cs), &ProtocolParams::default(), DEFAULT_W_CAP).unwrap();
    assert!((p.w_s_max - 0.09).abs() < 0.005, "{}", p.w_s_max);
    assert!((p.stokes_element.norm() * p.w_s_max - 0.005).abs() < 1e-12);
    assert!((p.pump_element.norm() * p.w_p_max - 0.005).abs() < 1e-12);
}

#[test]
fn equal_detunings_keep_two_photon_resonance() {
    let cs = set_two();
    let params = ProtocolParams { delta_p: 0.013, delta_s: 0.013, ..Default::default() };
    let p = calibrate_protocol(&cs.eig_full, &q_op(cs), &params, DEFAULT_W_CAP).unwrap();
    let gap = cs.eig_full.energy(Label::Nu(2)).unwrap() - cs.eig_full.energy(Label::Nu(0)).unwrap();
    assert!((p.omega_p - p.omega_s - gap).abs() < 1e-12);
}

#[test]
fn rotating_wave_bridge_is_weak() {
    let cs = set_two();
    let op = q_op(cs);
    let full = element(&cs.eig_full, Label::Nu(2), Label::FalseVacuum, &op).unwrap().norm();
    let jc = element(&cs.eig_rw, Label::Nu(2), Label::FalseVacuum, &op).unwrap().norm();
    assert!(jc < full / 10.0, "{jc} vs {full}");
    let e = calibrate_protocol(&cs.eig_rw, &op, &ProtocolParams::default(), 1.0).unwrap_err();
    assert!(matches!(e, Error::ProtocolImpossible(_)), "{e}");
}

#[test]
fn zero_envelopes_are_stationary() {
    let cs = set_two();
    let params = ProtocolParams { omega0: 0.0, t_width: 200.0, ..Default::default() };
    let (_, tr) = run_case(cs, Interaction::Full, &params, &EvolveOptions::default()).unwrap();
    for s in &tr.samples {
        assert!((s.p_psi0u - 1.0).abs() < 1e-9 && s.p_psi2u < 1e-9 && s.p_psi0 < 1e-9, "{s:?}");
    }
    assert!(tr.norm_drift < 1e-9);
}

#[test]
fn short_pulses_do_not_transfer() {
    let cs = set_two();
    let params = ProtocolParams { omega0: 0.005, t_width: 150.0, ..Default::default() };
    for v in [Interaction::Full, Interaction::RotatingWave] {
        let (_, tr) = run_case(cs, v, &params, &EvolveOptions::default()).unwrap();
        assert!(tr.final_state.eta < 0.02, "{v:?}: {}", tr.final_state.eta);
    }
}

#[test]
fn cutoff_must_cover_labeled_states() {
    let cs = set_two();
    let opts = EvolveOptions { energy_cutoff: 0.1, ..Default::default() };
    let e = run_case(cs, Interaction::Full, &ProtocolParams::default(), &opts).unwrap_err();
    assert!(matches!(e, Error::Config(_)), "{e}");
    let opts = EvolveOptions { dt: 0.05, ..Default::default() };
    assert!(run_case(cs, Interaction::Full, &ProtocolParams::default(), &opts).is_err());
}

#[test]
fn stirap_lab_frame_and_multi_lambda() {
    let cs = set_two();
    let op = q_op(cs);
    let (protocol, tr) = run_case(cs, Interaction::Full, &ProtocolParams::default(), &EvolveOptions::default()).unwrap();
    let ml = evolve_multi_lambda(&cs.eig_full, &op, &protocol, 3, 0.5).unwrap();
    assert!((ml.eta - tr.final_state.eta).abs() < 0.05, "{} vs {}", ml.eta, tr.final_state.eta);
    for s in &tr.samples {
        assert!((0.0..=1.0 + 1e-9).contains(&s.eta) && s.n_u >= 0.0);
    }
    // Before the Stokes pulse rises the drive has not yet flipped parity.
    let t0 = -3.0 * protocol.params.t_width;
    for s in tr.samples.iter().filter(|s| s.t < t0 + 0.4 * protocol.params.t_width) {
        assert!(s.p_odd_parity < 1e-5, "{s:?}");
    }
    // Raman with the same amplitudes transfers less than STIRAP.
    let raman = ProtocolParams::raman(Port::Q, 0.005, 3000.0, 0.025);
    let (_, rt) = run_case(cs, Interaction::Full, &raman, &EvolveOptions::default()).unwrap();
    let peak = rt.samples.iter().map(|s| s.p_psi2u).fold(0.0, f64::max);
    assert!(peak > 0.05 && peak < tr.final_state.p_psi2u, "{peak}");
    assert!(rt.samples.iter().all(|s| s.p_psi0 < 0.05));
}

#[test]
fn reduced_lambda_from_overlaps() {
    let p = LambdaPulses::from_overlaps(0.02, 0.09, 0.5, 0.5, 0.11, 3000.0, 0.7);
    assert!((p.omega_p_max - 0.005).abs() < 1e-12);
    let out = evolve_reduced_lambda(&p, 1.0, 50).unwrap();
    let f = out.last().unwrap();
    assert!((f.p_0u + f.p_phi0 + f.p_2u - 1.0).abs() < 1e-10);
}
