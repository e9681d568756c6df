use virtphot::circuit::to_physical;
use virtphot::design::invert_design;
use virtphot::atom::AaBasis;
use virtphot::measurement::*;
use virtphot::study::case_study_design;

fn within(v: f64, target: f64, rel: f64) -> bool {
    (v / target - 1.0).abs() <= rel
}

#[test]
fn physical_table_rows() {
    // (set, L nH, L2 nH, C2 fF, Z2 kΩ, ε_eg GHz)
    for (set, l, l2, c2, z2, eps) in [(2, 250.0, 955.0, 6.4, 12.0, 2.0), (3, 259.0, 757.0, 6.6, 10.7, 2.2)] {
        let d = case_study_design(set).unwrap();
        let out = invert_design(d.ej_over_ec1, d.u11_over_ej, d.g_over_wc, 1.0, &AaBasis::default()).unwrap();
        let pc = to_physical(&out.design, 10.0).unwrap();
        assert!((pc.c1_ff - 7.0).abs() < 0.2 && (pc.lj_nh - 16.0).abs() < 0.5 && (pc.ic_na - 20.0).abs() < 0.5, "{pc:?}");
        assert!(within(pc.l_nh, l, 0.03) && within(pc.l2_nh, l2, 0.03), "{pc:?}");
        assert!(within(pc.c2_ff, c2, 0.03) && within(pc.z2_kohm, z2, 0.03), "{pc:?}");
        assert!((out.eps_eg * 10.0 - eps).abs() < 0.05);
    }
}

#[test]
fn set_two_budget_matches_table() {
    let d = case_study_design(2).unwrap();
    let out = invert_design(d.ej_over_ec1, d.u11_over_ej, d.g_over_wc, 1.0, &AaBasis::default()).unwrap();
    let e = estimate(out.omega_c, 10.0, 3000.0, &MeasurementParams::default()).unwrap();
    assert!((e.n_th - 0.17).abs() < 0.005 && (e.p2_th - 0.018).abs() < 0.001);
    assert!((e.n_m - 0.363).abs() < 0.02 && (e.n_m_over_n_th - 2.13).abs() < 0.15);
    assert!((e.q - 1800.0).abs() < 50.0);
    assert!(e.n_out <= 2.0 * e.p2_transfer);
}

#[test]
fn set_three_thermal_at_tabulated_frequency() {
    let (n, p2) = thermal_stats(2.2, 50.0).unwrap();
    assert!((n - 0.14).abs() < 0.005 && (p2 - 0.012).abs() < 0.001);
}

#[test]
fn invalid_inputs_are_domain_errors() {
    assert!(thermal_stats(-1.0, 50.0).is_err());
    assert!(dephasing_penalty(1.0, 0.0, 1.0).is_err());
    assert!(emission_estimates(1.5, 1.0, 1.0, 1.0, 1.0).is_err());
    assert!(snr_time(0.0, 2.0, 1.0).is_err());
}
