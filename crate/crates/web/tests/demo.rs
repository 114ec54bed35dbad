use quasiflow_web::demo::*;

#[test]
fn curve_starts_at_beta_and_tracks_the_flow() {
    let rows = quasi_flow_curve("kerr", 1.0, 0.1, 1.0, 0.0, 1.0, 4).unwrap();
    assert_eq!(rows.len(), 6 * 5);
    assert_eq!(&rows[..6], &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
    // t = 1 row: classical e^{−i}, total = classical·(1 + ħ²(¼ − i/12))
    let last = &rows[24..];
    assert!((last[0] - 1.0).abs() < 1e-15);
    assert!((last[1] - 1f64.cos()).abs() < 1e-14 && (last[2] + 1f64.sin()).abs() < 1e-14);
    let total = num_complex::Complex64::new(last[1], last[2]) * num_complex::Complex64::new(1.0 + 0.0025, -0.01 / 12.0);
    assert!((last[3] - total.re).abs() < 1e-14 && (last[4] - total.im).abs() < 1e-14);
}

#[test]
fn harmonic_family_has_no_deformation() {
    let map = deformation_map("harmonic", 1.0, 0.2, 3.0, 2.0, 16).unwrap();
    assert_eq!(map.len(), 256);
    assert!(map.iter().all(|v| *v == 0.0));
    let kerr = deformation_map("kerr", 1.0, 0.2, 3.0, 2.0, 16).unwrap();
    assert!(kerr.iter().any(|v| *v > 0.0));
}

#[test]
fn cosine_onset_is_improper_for_positive_times() {
    let rows = cosine_onset("kerr", 1.0, 0.1, 1.0, 1.0, 1.0, 10).unwrap();
    for r in rows.chunks(3) {
        assert!((r[1] - (1.0 + 0.00375 * r[0] * r[0])).abs() < 1e-15);
        assert_eq!(r[2] > 0.0, r[0] > 0.0);
    }
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(quasi_flow_curve("duffing", 1.0, 0.1, 1.0, 0.0, 1.0, 4).is_err());
    assert!(quasi_flow_curve("kerr", 1.0, -0.1, 1.0, 0.0, 1.0, 4).is_err());
    assert!(cosine_onset("kerr", 1.0, 0.1, f64::NAN, 1.0, 1.0, 4).is_err());
    assert!(deformation_map("kerr", 1.0, 0.1, 1.0, 2.0, 1).is_err());
    assert!(quasi_flow_curve("kerr", 1.0, 0.1, 1.0, 0.0, 1.0, 0).is_err());
}
