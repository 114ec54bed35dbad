//! Phase-plane coordinates and oscillator models.
//!
//! Units: the complex amplitude β carries units of action^{1/2}, so that the
//! action B = |β|² and the Planck parameter ħ share units. Nothing in this
//! module depends on ħ; the ħ-scaled ladder convention (b̂ = √ħ·â) only
//! appears in Fock-space matrix elements.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A point (q, p) of the classical phase plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { q: 0.0, p: 0.0 };

    pub fn new(q: f64, p: f64) -> Self {
        PhasePoint { q, p }
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.p.is_finite()
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.q, self.p]
    }

    pub fn from_array(z: [f64; 2]) -> Self {
        PhasePoint { q: z[0], p: z[1] }
    }

    /// B = (q² + p²)/2.
    pub fn action(&self) -> f64 {
        0.5 * (self.q * self.q + self.p * self.p)
    }
}

/// β = (q + i p)/√2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexAmplitude(pub C64);

impl ComplexAmplitude {
    pub fn new(re: f64, im: f64) -> Self {
        ComplexAmplitude(C64::new(re, im))
    }

    pub fn beta(&self) -> C64 {
        self.0
    }

    pub fn action(&self) -> f64 {
        action_of(*self)
    }

    pub fn to_phase_point(&self) -> PhasePoint {
        PhasePoint {
            q: std::f64::consts::SQRT_2 * self.0.re,
            p: std::f64::consts::SQRT_2 * self.0.im,
        }
    }

    pub fn conj(&self) -> Self {
        ComplexAmplitude(self.0.conj())
    }
}

impl From<C64> for ComplexAmplitude {
    fn from(b: C64) -> Self {
        ComplexAmplitude(b)
    }
}

pub fn to_complex(pt: PhasePoint) -> Result<ComplexAmplitude> {
    if !pt.is_finite() {
        return Err(Error::InvalidInput(format!(
            "phase point ({}, {}) is not finite",
            pt.q, pt.p
        )));
    }
    Ok(ComplexAmplitude(
        C64::new(pt.q, pt.p) * std::f64::consts::FRAC_1_SQRT_2,
    ))
}

pub fn action_of(beta: ComplexAmplitude) -> f64 {
    beta.0.norm_sqr()
}

// ---------------------------------------------------------------------------
// Oscillator models
// ---------------------------------------------------------------------------

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

fn poly_fn(coeffs: Vec<f64>) -> ScalarFn {
    Arc::new(move |x| poly_eval(&coeffs, x))
}

/// Central finite-difference step for the k-th derivative at `b`.
///
/// The first derivative uses max(1e-5, 1e-5·B); higher derivatives use
/// progressively larger steps since the stencil error grows like eps/h^k.
fn fd_step(order: usize, b: f64) -> f64 {
    let base: f64 = match order {
        1 => 1e-5,
        2 => 1e-4,
        3 => 1e-3,
        _ => 4e-3,
    };
    base.max(base * b.abs())
}

fn central_difference(g: &(dyn Fn(f64) -> f64 + Send + Sync), order: usize, b: f64) -> f64 {
    let h = fd_step(order, b);
    match order {
        1 => (g(b + h) - g(b - h)) / (2.0 * h),
        2 => (g(b + h) - 2.0 * g(b) + g(b - h)) / (h * h),
        3 => (g(b + 2.0 * h) - 2.0 * g(b + h) + 2.0 * g(b - h) - g(b - 2.0 * h)) / (2.0 * h * h * h),
        4 => {
            (g(b + 2.0 * h) - 4.0 * g(b + h) + 6.0 * g(b) - 4.0 * g(b - h) + g(b - 2.0 * h))
                / (h * h * h * h)
        }
        _ => panic!("finite-difference order {order} not supported"),
    }
}

fn fd_fn(g: ScalarFn, order: usize) -> ScalarFn {
    Arc::new(move |b| central_difference(g.as_ref(), order, b))
}

/// Normal-form Hamiltonian Ĥ = f(B̂).
#[derive(Clone)]
pub struct HamiltonianModel {
    id: String,
    energy: ScalarFn,
    /// f′, f″, f‴, f⁗ when supplied analytically.
    derivatives: Option<[ScalarFn; 4]>,
    polynomial: Option<Vec<f64>>,
    hbar: f64,
    finite_difference_fallback: bool,
}

impl fmt::Debug for HamiltonianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianModel")
            .field("id", &self.id)
            .field("polynomial", &self.polynomial)
            .field("hbar", &self.hbar)
            .field("analytic_derivatives", &self.derivatives.is_some())
            .finish()
    }
}

impl HamiltonianModel {
    /// f(B) = Σ c_k B^k with analytic derivatives.
    pub fn polynomial(id: impl Into<String>, coeffs: &[f64], hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polynomial coefficients must be finite".into()));
        }
        let c0 = coeffs.to_vec();
        let c1 = poly_derivative(&c0);
        let c2 = poly_derivative(&c1);
        let c3 = poly_derivative(&c2);
        let c4 = poly_derivative(&c3);
        Ok(HamiltonianModel {
            id: id.into(),
            energy: poly_fn(c0.clone()),
            derivatives: Some([poly_fn(c1), poly_fn(c2), poly_fn(c3), poly_fn(c4)]),
            polynomial: Some(c0),
            hbar,
            finite_difference_fallback: false,
        })
    }

    /// f(B) = ω B.
    pub fn harmonic(omega: f64, hbar: f64) -> Result<Self> {
        Self::polynomial("harmonic", &[0.0, omega], hbar)
    }

    /// f(B) = χ B²/2, so ω(B) = χ B.
    pub fn kerr(chi: f64, hbar: f64) -> Result<Self> {
        Self::polynomial("kerr", &[0.0, 0.0, 0.5 * chi], hbar)
    }

    /// f(B) = κ B³/3, so ω(B) = κ B².
    pub fn cubic_action(kappa: f64, hbar: f64) -> Result<Self> {
        Self::polynomial("cubic-action", &[0.0, 0.0, 0.0, kappa / 3.0], hbar)
    }

    /// Arbitrary energy function. Without `derivatives` the model can only
    /// produce a frequency model after `with_finite_difference(true)`.
    pub fn from_closures(
        id: impl Into<String>,
        energy: ScalarFn,
        derivatives: Option<[ScalarFn; 4]>,
        hbar: f64,
    ) -> Result<Self> {
        check_hbar(hbar)?;
        Ok(HamiltonianModel {
            id: id.into(),
            energy,
            derivatives,
            polynomial: None,
            hbar,
            finite_difference_fallback: false,
        })
    }

    pub fn with_finite_difference(mut self, enabled: bool) -> Self {
        self.finite_difference_fallback = enabled;
        self
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let mut out = self.clone();
        out.hbar = hbar;
        Ok(out)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn polynomial_coefficients(&self) -> Option<&[f64]> {
        self.polynomial.as_deref()
    }

    pub fn energy(&self, b: f64) -> f64 {
        (self.energy)(b)
    }

    pub fn energy_fn(&self) -> &ScalarFn {
        &self.energy
    }

    /// f′(B), analytic when available.
    pub fn f1(&self, b: f64) -> Result<f64> {
        match (&self.derivatives, self.finite_difference_fallback) {
            (Some(d), _) => Ok((d[0])(b)),
            (None, true) => Ok(central_difference(self.energy.as_ref(), 1, b)),
            (None, false) => Err(missing_derivatives(&self.id)),
        }
    }
}

fn missing_derivatives(id: &str) -> Error {
    Error::Configuration(format!(
        "oscillator '{id}' has no analytic derivatives and the finite-difference fallback is disabled"
    ))
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidInput(format!("hbar must be positive and finite, got {hbar}")));
    }
    Ok(())
}

/// Classical frequency ω(B) with its first three derivatives.
#[derive(Clone)]
pub struct FrequencyModel {
    id: String,
    omega: ScalarFn,
    d1: ScalarFn,
    d2: ScalarFn,
    d3: ScalarFn,
}

impl fmt::Debug for FrequencyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrequencyModel").field("id", &self.id).finish()
    }
}

impl FrequencyModel {
    pub fn new(id: impl Into<String>, omega: ScalarFn, d1: ScalarFn, d2: ScalarFn, d3: ScalarFn) -> Self {
        FrequencyModel {
            id: id.into(),
            omega,
            d1,
            d2,
            d3,
        }
    }

    /// ω(B) = Σ c_k B^k.
    pub fn polynomial(id: impl Into<String>, coeffs: &[f64]) -> Self {
        let c0 = coeffs.to_vec();
        let c1 = poly_derivative(&c0);
        let c2 = poly_derivative(&c1);
        let c3 = poly_derivative(&c2);
        FrequencyModel::new(id, poly_fn(c0), poly_fn(c1), poly_fn(c2), poly_fn(c3))
    }

    pub fn harmonic(omega: f64) -> Self {
        Self::polynomial("harmonic", &[omega])
    }

    pub fn kerr(chi: f64) -> Self {
        Self::polynomial("kerr", &[0.0, chi])
    }

    pub fn cubic_action(kappa: f64) -> Self {
        Self::polynomial("cubic-action", &[0.0, 0.0, kappa])
    }

    /// Derivatives by central differences of `omega`. Third derivatives lose
    /// roughly five significant digits this way.
    pub fn finite_difference(id: impl Into<String>, omega: ScalarFn) -> Self {
        FrequencyModel {
            id: id.into(),
            d1: fd_fn(omega.clone(), 1),
            d2: fd_fn(omega.clone(), 2),
            d3: fd_fn(omega.clone(), 3),
            omega,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn omega(&self, b: f64) -> f64 {
        (self.omega)(b)
    }

    pub fn d1(&self, b: f64) -> f64 {
        (self.d1)(b)
    }

    pub fn d2(&self, b: f64) -> f64 {
        (self.d2)(b)
    }

    pub fn d3(&self, b: f64) -> f64 {
        (self.d3)(b)
    }

    /// (ω, ω′, ω″, ω‴) at B.
    pub fn derivatives(&self, b: f64) -> [f64; 4] {
        [self.omega(b), self.d1(b), self.d2(b), self.d3(b)]
    }

    /// Largest relative mismatch between each supplied derivative and a
    /// central difference of the one below it, over `grid`.
    pub fn derivative_consistency(&self, grid: &[f64]) -> f64 {
        let pairs: [(&ScalarFn, &ScalarFn); 3] =
            [(&self.omega, &self.d1), (&self.d1, &self.d2), (&self.d2, &self.d3)];
        let mut worst = 0.0f64;
        for &b in grid {
            let h = 1e-4f64.max(1e-4 * b.abs());
            for (g, dg) in pairs {
                let fd = (g(b + h) - g(b - h)) / (2.0 * h);
                let an = dg(b);
                let scale = an.abs().max(fd.abs()).max(1.0);
                worst = worst.max((fd - an).abs() / scale);
            }
        }
        worst
    }
}

/// ω = f′ with derivatives ω′ = f″, ω″ = f‴, ω‴ = f⁗.
pub fn frequency_from_hamiltonian(h: &HamiltonianModel) -> Result<FrequencyModel> {
    if let Some(coeffs) = &h.polynomial {
        return Ok(FrequencyModel::polynomial(h.id.clone(), &poly_derivative(coeffs)));
    }
    match (&h.derivatives, h.finite_difference_fallback) {
        (Some(d), _) => Ok(FrequencyModel::new(
            h.id.clone(),
            d[0].clone(),
            d[1].clone(),
            d[2].clone(),
            d[3].clone(),
        )),
        (None, true) => {
            let f = h.energy.clone();
            Ok(FrequencyModel::new(
                h.id.clone(),
                fd_fn(f.clone(), 1),
                fd_fn(f.clone(), 2),
                fd_fn(f.clone(), 3),
                fd_fn(f, 4),
            ))
        }
        (None, false) => Err(missing_derivatives(&h.id)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn to_complex_examples() {
        let b = to_complex(PhasePoint::new(SQRT_2, 0.0)).unwrap();
        assert!((b.0 - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(to_complex(PhasePoint::ORIGIN).unwrap().0, C64::new(0.0, 0.0));
        let b = to_complex(PhasePoint::new(1.0, 1.0)).unwrap();
        assert!((b.0 - C64::new(1.0, 1.0) / SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn to_complex_rejects_non_finite() {
        assert!(matches!(
            to_complex(PhasePoint::new(f64::NAN, 0.0)),
            Err(Error::InvalidInput(_))
        ));
        assert!(to_complex(PhasePoint::new(0.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn action_examples() {
        assert_eq!(action_of(ComplexAmplitude::new(1.0, 0.0)), 1.0);
        assert_eq!(action_of(ComplexAmplitude::new(0.0, 0.0)), 0.0);
        let b = ComplexAmplitude(C64::new(1.0, 1.0) / SQRT_2);
        assert!((action_of(b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frequency_from_polynomial_energies() {
        let h = HamiltonianModel::harmonic(1.0, 0.1).unwrap();
        let fm = frequency_from_hamiltonian(&h).unwrap();
        for b in [0.0, 0.5, 3.0] {
            assert_eq!(fm.derivatives(b), [1.0, 0.0, 0.0, 0.0]);
        }

        let fm = frequency_from_hamiltonian(&HamiltonianModel::kerr(1.0, 0.1).unwrap()).unwrap();
        for b in [0.0, 0.5, 3.0] {
            assert_eq!(fm.derivatives(b), [b, 1.0, 0.0, 0.0]);
        }

        let fm = frequency_from_hamiltonian(&HamiltonianModel::cubic_action(1.0, 0.1).unwrap()).unwrap();
        for b in [0.0, 0.5, 3.0] {
            let d = fm.derivatives(b);
            assert!((d[0] - b * b).abs() < 1e-15);
            assert!((d[1] - 2.0 * b).abs() < 1e-15);
            assert!((d[2] - 2.0).abs() < 1e-15);
            assert_eq!(d[3], 0.0);
        }
    }

    #[test]
    fn closures_without_derivatives_need_opt_in() {
        let f: ScalarFn = Arc::new(|b: f64| b.exp());
        let h = HamiltonianModel::from_closures("exp", f, None, 0.1).unwrap();
        assert!(matches!(frequency_from_hamiltonian(&h), Err(Error::Configuration(_))));
        assert!(h.f1(1.0).is_err());

        let h = h.with_finite_difference(true);
        let fm = frequency_from_hamiltonian(&h).unwrap();
        let e = 1f64.exp();
        assert!((fm.omega(1.0) - e).abs() / e < 1e-8);
        assert!((fm.d1(1.0) - e).abs() / e < 1e-6);
        assert!((fm.d2(1.0) - e).abs() / e < 1e-4);
        assert!((fm.d3(1.0) - e).abs() / e < 1e-3);
        assert!((h.f1(1.0).unwrap() - e).abs() / e < 1e-8);
    }

    #[test]
    fn analytic_models_pass_derivative_consistency() {
        let grid: Vec<f64> = (0..=20).map(|i| 0.25 * i as f64).collect();
        for fm in [
            FrequencyModel::harmonic(1.3),
            FrequencyModel::kerr(0.7),
            FrequencyModel::cubic_action(1.0),
            FrequencyModel::polynomial("mixed", &[1.0, -0.3, 0.2, 0.05]),
        ] {
            assert!(fm.derivative_consistency(&grid) < 1e-6, "{}", fm.id());
        }
        let bad = FrequencyModel::new(
            "bad",
            Arc::new(|b| b * b),
            Arc::new(|b| b),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
        );
        assert!(bad.derivative_consistency(&grid) > 1e-2);
    }

    #[test]
    fn f1_matches_omega_for_derived_models() {
        let h = HamiltonianModel::polynomial("custom", &[0.0, 1.0, 0.3, -0.02], 0.1).unwrap();
        let fm = frequency_from_hamiltonian(&h).unwrap();
        for b in [0.0, 0.7, 2.5] {
            assert!((h.f1(b).unwrap() - fm.omega(b)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_hbar() {
        assert!(HamiltonianModel::kerr(1.0, 0.0).is_err());
        assert!(HamiltonianModel::kerr(1.0, -0.1).is_err());
        assert!(HamiltonianModel::kerr(1.0, f64::NAN).is_err());
    }
}
