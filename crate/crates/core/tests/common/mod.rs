#![allow(dead_code)]

use num_complex::Complex64 as C64;
use quasiflow::composition::TransformSymbol;
use quasiflow::fock::{FockOperator, FockTruncation, SymbolProbe};
use quasiflow::phase_space::{ComplexAmplitude, PhasePoint};

pub const EPS: f64 = 0.15;
pub const ETA: f64 = 0.1;
pub const CUBIC_N_MAX: usize = 400;

pub fn cubic_map(eps: f64, eta: f64) -> TransformSymbol {
    TransformSymbol::cubic_phase(eps, eta).unwrap()
}

/// V = e^{−iεq̂³/3ħ} e^{−iηp̂³/3ħ} on the truncated basis.
pub fn cubic_unitary(eps: f64, eta: f64, hbar: f64, tr: FockTruncation) -> FockOperator {
    let phase = move |c: f64| move |x: f64| C64::new(0.0, -c * x * x * x / (3.0 * hbar)).exp();
    let va = FockOperator::position(hbar, tr).spectral_map(phase(eps)).unwrap();
    let vb = FockOperator::momentum(hbar, tr).spectral_map(phase(eta)).unwrap();
    va.mul(&vb)
}

/// The operator whose Weyl symbol is exactly e^{−λB}.
pub fn gaussian_operator(lambda: f64, hbar: f64, tr: FockTruncation) -> FockOperator {
    let tau = 2.0 * (lambda * hbar / 2.0).atanh();
    let c = (tau / 2.0).cosh();
    FockOperator::function_of_action(|b| C64::new(c * (-tau * b / hbar).exp(), 0.0), hbar, tr)
}

pub fn probe_at(z: PhasePoint, hbar: f64, tr: FockTruncation) -> SymbolProbe {
    SymbolProbe::new(ComplexAmplitude(C64::new(z.q, z.p) * std::f64::consts::FRAC_1_SQRT_2), hbar, tr).unwrap()
}

pub fn cubic_truncation() -> FockTruncation {
    FockTruncation::new(CUBIC_N_MAX, 1e-10).unwrap()
}
