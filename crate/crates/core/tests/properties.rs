use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use quasiflow::composition::{delta_kernel_action, TransformSymbol};
use quasiflow::discrepancy::cosine_symbol_t;
use quasiflow::extrapolate::polyfit;
use quasiflow::moyal::{poisson, star};
use quasiflow::phase_space::*;
use quasiflow::quasi_flow::*;
use quasiflow::symbol::{Conjugate, Gaussian, Polynomial, SharedField, SymbolField};

fn families() -> Vec<FrequencyModel> {
    vec![
        FrequencyModel::harmonic(1.3),
        FrequencyModel::kerr(1.0),
        FrequencyModel::cubic_action(0.7),
        FrequencyModel::polynomial("mixed", &[0.5, -0.2, 0.1, 0.03]),
    ]
}

fn c64() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

/// Random complex polynomial of total degree ≤ 4.
fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((c64(), 0u32..3, 0u32..3), 1..5)
        .prop_map(|terms| terms.into_iter().fold(Polynomial::new(), |p, (c, i, j)| p.term(c, i, j)))
}

fn shared(p: Polynomial) -> SharedField {
    Arc::new(p)
}

fn point() -> impl Strategy<Value = PhasePoint> {
    (-1.5..1.5f64, -1.5..1.5f64).prop_map(|(q, p)| PhasePoint::new(q, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn coordinate_round_trip(q in -50.0..50.0f64, p in -50.0..50.0f64) {
        let b = to_complex(PhasePoint::new(q, p)).unwrap();
        let z = b.to_phase_point();
        prop_assert!((z.q - q).abs() <= 1e-12 && (z.p - p).abs() <= 1e-12);
        let want = 0.5 * (q * q + p * p);
        prop_assert!((action_of(b) - want).abs() <= 1e-12 * want.max(1e-300));
    }

    #[test]
    fn poisson_is_antisymmetric(a in poly(), c in poly(), z in point()) {
        let (a, c) = (shared(a), shared(c));
        let ac = poisson(a.clone(), c.clone()).unwrap().value(z);
        let ca = poisson(c, a).unwrap().value(z);
        prop_assert!((ac + ca).norm() <= 1e-10);
    }

    #[test]
    fn star_order0_is_pointwise_product(a in poly(), c in poly(), z in point()) {
        let (a, c) = (shared(a), shared(c));
        let s = star(a.clone(), c.clone()).unwrap().terms(z);
        let prod = a.value(z) * c.value(z);
        prop_assert!((s.order0 - prod).norm() <= 1e-12 * prod.norm().max(1e-300));
    }

    #[test]
    fn symmetrized_star_with_conjugate_is_real(a in poly(), z in point(), hbar in 0.01..0.5f64) {
        let a = shared(a);
        let s = star(a.clone(), Arc::new(Conjugate(a))).unwrap().symmetrized(z).total(hbar);
        prop_assert!(s.im.abs() <= 1e-10);
    }

    #[test]
    fn quasi_flow_is_identity_at_t0(re in -2.0..2.0f64, im in -2.0..2.0f64, hbar in 0.001..1.0f64) {
        let beta = ComplexAmplitude::new(re, im);
        for fm in families() {
            let r = quasi_flow(beta, &fm, hbar, 0.0);
            prop_assert_eq!(r.total, beta.0);
        }
    }

    #[test]
    fn time_reversal(re in -2.0..2.0f64, im in -2.0..2.0f64, hbar in 0.01..0.5f64, t in 0.0..5.0f64) {
        let beta = ComplexAmplitude::new(re, im);
        for fm in families() {
            let fwd = quasi_flow(beta, &fm, hbar, t).total;
            let back = quasi_flow(beta.conj(), &fm, hbar, -t).total;
            prop_assert!((back - fwd.conj()).norm() <= 1e-12 * (1.0 + fwd.norm()));
        }
    }

    #[test]
    fn classical_flow_preserves_action(re in -2.0..2.0f64, im in -2.0..2.0f64, t in 0.0..10.0f64) {
        let beta = ComplexAmplitude::new(re, im);
        for fm in families() {
            let c = classical_flow(beta, &fm, t);
            prop_assert!((c.norm_sqr() - beta.action()).abs() <= 1e-12 * (1.0 + beta.action()));
        }
    }

    #[test]
    fn action_identity_holds(b in 0.1..5.0f64, t in 0.0..10.0f64) {
        for fm in families() {
            let r = action_identity_residual(b, &fm, t).unwrap();
            prop_assert!(r <= 1e-8, "{} B={} t={}: {}", fm.id(), b, t, r);
        }
    }

    #[test]
    fn harmonic_correction_vanishes(b in 0.0..10.0f64, t in 0.0..20.0f64, w in 0.1..5.0f64) {
        prop_assert_eq!(quantum_correction(b, &FrequencyModel::harmonic(w), t), C64::new(0.0, 0.0));
    }

    #[test]
    fn composition_is_linear_in_a(x in c64(), y in c64(), a in poly(), z in point(), hbar in 0.01..0.3f64) {
        let a = shared(a);
        let m = TransformSymbol::cubic_phase(0.2, 0.15).unwrap();
        let g: SharedField = Arc::new(Gaussian { center: PhasePoint::new(0.1, -0.2), lambda: 0.9, amplitude: 1.0 });
        let mix: SharedField = {
            let (a, g) = (a.clone(), g.clone());
            Arc::new(quasiflow::symbol::FnField::new(3, move |z| a.jet(z).scale(x).add(&g.jet(z).scale(y))))
        };
        let lhs = delta_kernel_action(&m, &mix, z, hbar).unwrap();
        let rhs = x * delta_kernel_action(&m, &a, z, hbar).unwrap() + y * delta_kernel_action(&m, &g, z, hbar).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn linear_transforms_compose_exactly(theta in -3.0..3.0f64, a in poly(), z in point(), hbar in 0.01..0.5f64) {
        let a = shared(a);
        let m = TransformSymbol::rotation(theta);
        let got = delta_kernel_action(&m, &a, z, hbar).unwrap();
        let want = a.value(m.apply(z));
        prop_assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0));
    }
}

#[test]
fn cosine_onset_is_quadratic_in_time() {
    let fm = FrequencyModel::kerr(1.0);
    let ts: Vec<f64> = (0..=25).map(|i| 0.02 * i as f64).collect();
    for q in [0.5, 1.0, 1.7] {
        let ys: Vec<C64> = ts.iter().map(|&t| C64::new(cosine_symbol_t(q, 1.0, &fm, 0.1, t) - 1.0, 0.0)).collect();
        let fit = polyfit(&ts, &ys, 2).unwrap();
        let c = fit.coeffs[2].re;
        let scale = ys.iter().map(|y| y.norm()).fold(0.0, f64::max);
        assert!(fit.coeffs[0].norm() <= 1e-6 * scale && fit.coeffs[1].norm() <= 1e-6 * scale);
        assert!(fit.rms_residual <= 1e-6 * scale, "Q={q}");
        assert!(c > 0.0);
    }
}
