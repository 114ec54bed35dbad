//! Normal-form quasi-flow: the classical rotation β e^{−iω(B)t} deformed by
//! the leading quantum correction,
//!
//! ```text
//! β_t(β) = β̄_t (1 + ħ² β_t^(2) + O(ħ⁴))
//! Re β_t^(2) = ¼ ((ω′t)² + B ω′ ω″ t²)
//! Im β_t^(2) = (1/24)(−2B (ω′t)³ + 5 ω″ t + 2B ω‴ t)
//! ```
//!
//! with every derivative of ω taken at B = |β|².

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::jet::symplectic_contraction2;
use crate::phase_space::{ComplexAmplitude, FrequencyModel, PhasePoint};
use crate::symbol::{ClassicalFlowField, SymbolField};

/// Smallest action admitted by [`action_identity_residual`]; the identity
/// carries an explicit 1/B.
pub const B_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiFlowResult {
    pub classical: C64,
    pub correction: C64,
    pub total: C64,
    pub t: f64,
    pub hbar: f64,
}

impl QuasiFlowResult {
    /// |ħ² β_t^(2)|, the size of the relative quantum deformation.
    pub fn deformation(&self) -> f64 {
        self.hbar * self.hbar * self.correction.norm()
    }

    pub fn total_point(&self) -> PhasePoint {
        ComplexAmplitude(self.total).to_phase_point()
    }
}

pub fn classical_flow(beta: ComplexAmplitude, fm: &FrequencyModel, t: f64) -> C64 {
    let b = beta.action();
    beta.0 * C64::new(0.0, -fm.omega(b) * t).exp()
}

pub fn quantum_correction(b: f64, fm: &FrequencyModel, t: f64) -> C64 {
    let [_, w1, w2, w3] = fm.derivatives(b);
    let w1t = w1 * t;
    let re = 0.25 * (w1t * w1t + b * w1 * w2 * t * t);
    let im = (-2.0 * b * w1t * w1t * w1t + 5.0 * w2 * t + 2.0 * b * w3 * t) / 24.0;
    C64::new(re, im)
}

pub fn quasi_flow(beta: ComplexAmplitude, fm: &FrequencyModel, hbar: f64, t: f64) -> QuasiFlowResult {
    let classical = classical_flow(beta, fm, t);
    let correction = quantum_correction(beta.action(), fm, t);
    QuasiFlowResult {
        classical,
        correction,
        total: classical * (1.0 + hbar * hbar * correction),
        t,
        hbar,
    }
}

/// ∂^μ∂^ν β̄_t ∂_μ∂_ν β̄̄_t at the point (√(2B), 0), from analytic partials
/// of the classical-flow field.
pub fn flow_contraction(b: f64, fm: &FrequencyModel, t: f64) -> f64 {
    let z = PhasePoint::new((2.0 * b).sqrt(), 0.0);
    let g = ClassicalFlowField::new(fm.clone(), t).jet(z);
    symplectic_contraction2(&g, &g.conj()).re
}

/// |Re β_t^(2) − K/(16B)| where K is the flow contraction above. Action
/// conservation under the symmetrized star product forces this to zero.
pub fn action_identity_residual(b: f64, fm: &FrequencyModel, t: f64) -> Result<f64> {
    if !(b > B_MIN) {
        return Err(Error::Domain(format!(
            "action identity needs B > {B_MIN:e}, got {b:e}"
        )));
    }
    let lhs = quantum_correction(b, fm, t).re;
    let rhs = flow_contraction(b, fm, t) / (16.0 * b);
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    #[test]
    fn classical_flow_examples() {
        let h = FrequencyModel::harmonic(1.0);
        let r = classical_flow(ComplexAmplitude::new(1.0, 0.0), &h, FRAC_PI_2);
        assert!((r - C64::new(0.0, -1.0)).norm() < 1e-15);
        let k = FrequencyModel::kerr(1.0);
        assert_eq!(classical_flow(ComplexAmplitude::new(0.0, 0.0), &k, 3.0), C64::new(0.0, 0.0));
        let r = classical_flow(ComplexAmplitude::new(SQRT_2, 0.0), &k, 1.0);
        let want = SQRT_2 * C64::new(0.0, -2.0).exp();
        assert!((r - want).norm() < 1e-15);
    }

    #[test]
    fn correction_examples() {
        let h = FrequencyModel::harmonic(2.0);
        assert_eq!(quantum_correction(1.3, &h, 4.0), C64::new(0.0, 0.0));

        let k = FrequencyModel::kerr(1.0);
        for (b, t) in [(1.0, 1.0), (0.3, 2.5), (4.0, 0.1)] {
            let c = quantum_correction(b, &k, t);
            assert!((c.re - t * t / 4.0).abs() <= 1e-15 * (1.0 + c.re.abs()));
            assert!((c.im + b * t * t * t / 12.0).abs() <= 1e-15 * (1.0 + c.im.abs()));
        }

        let c = quantum_correction(1.0, &FrequencyModel::cubic_action(1.0), 1.0);
        assert!((c.re - 2.0).abs() < 1e-15);
        assert!((c.im + 0.25).abs() < 1e-15);
    }

    #[test]
    fn quasi_flow_examples() {
        let k = FrequencyModel::kerr(1.0);
        let beta = ComplexAmplitude::new(0.6, -0.2);
        let r = quasi_flow(beta, &k, 0.3, 0.0);
        assert_eq!(r.total, beta.0);
        assert_eq!(r.correction, C64::new(0.0, 0.0));

        let h = FrequencyModel::harmonic(1.0);
        let r = quasi_flow(beta, &h, 0.3, 2.0);
        assert_eq!(r.total, r.classical);

        let r = quasi_flow(ComplexAmplitude::new(1.0, 0.0), &k, 0.1, 1.0);
        let want = C64::new(0.0, -1.0).exp() * (1.0 + 0.01 * C64::new(0.25, -1.0 / 12.0));
        assert!((r.total - want).norm() < 1e-15);
        assert!((r.total - r.classical * (1.0 + 0.01 * r.correction)).norm() == 0.0);
    }

    #[test]
    fn action_identity_examples() {
        assert!(action_identity_residual(1.0, &FrequencyModel::harmonic(1.0), 3.0).unwrap() < 1e-14);
        assert!(action_identity_residual(1.0, &FrequencyModel::kerr(1.0), 1.0).unwrap() <= 1e-8);
        assert!(action_identity_residual(2.0, &FrequencyModel::cubic_action(1.0), 0.5).unwrap() <= 1e-8);
        assert!(matches!(
            action_identity_residual(1e-7, &FrequencyModel::kerr(1.0), 1.0),
            Err(Error::Domain(_))
        ));
        assert!(action_identity_residual(0.0, &FrequencyModel::kerr(1.0), 1.0).is_err());
    }

    #[test]
    fn kerr_contraction_by_finite_differences() {
        // independent route: differentiate β e^{−iBt} numerically in (q, p)
        let (b, t) = (1.0, 1.0);
        let g = |q: f64, p: f64| {
            let beta = C64::new(q, p) / SQRT_2;
            beta * C64::new(0.0, -beta.norm_sqr() * t).exp()
        };
        let (q0, p0) = ((2.0f64 * b).sqrt(), 0.0);
        let h = 1e-3;
        let gqq = (g(q0 + h, p0) - 2.0 * g(q0, p0) + g(q0 - h, p0)) / (h * h);
        let gpp = (g(q0, p0 + h) - 2.0 * g(q0, p0) + g(q0, p0 - h)) / (h * h);
        let gqp = (g(q0 + h, p0 + h) - g(q0 + h, p0 - h) - g(q0 - h, p0 + h) + g(q0 - h, p0 - h))
            / (4.0 * h * h);
        let k = gqq * gpp.conj() - 2.0 * gqp * gqp.conj() + gpp * gqq.conj();
        let lhs = quantum_correction(b, &FrequencyModel::kerr(1.0), t).re;
        assert!((k.re / (16.0 * b) - lhs).abs() < 1e-5);
        assert!((flow_contraction(b, &FrequencyModel::kerr(1.0), t) - k.re).abs() < 1e-4);
    }
}
