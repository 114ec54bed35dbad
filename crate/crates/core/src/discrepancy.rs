//! Quantum discrepancy: how far the evolved symbol W[Â_t] departs from
//! the initial symbol transported along the quasi-flow,
//!
//! ```text
//! d_t(Â)(β) = W[Â_t](β) − A(β_t(β))
//! ```
//!
//! For the generating family Â = exp(αb̂† − ᾱb̂), whose symbol is exactly
//! exp(αβ̄ − ᾱβ), the discrepancy is computed on the Fock oracle and its ħ²
//! coefficient is extracted by Richardson extrapolation.
//!
//! The cosine observable Ĉ = cos(αP̂) has the closed-form onset
//!
//! ```text
//! C_t(Q, 0) = 1 + ħ² (α²/8) (3ω′ + Q² ω″) ω′ t² + O(ħ⁴),   ω at Q²/2
//! ```
//!
//! where (Q, 0) is the point the phase space point is carried to by the
//! flow, i.e. W[Ĉ_t] is evaluated at the classical preimage of (Q, 0).
//! Values above 1 lie outside the spectrum of Ĉ.

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};
use crate::extrapolate::richardson;
use crate::fock::{SymbolProbe, FockOperator, FockTruncation};
use crate::phase_space::{frequency_from_hamiltonian, ComplexAmplitude, FrequencyModel, HamiltonianModel};
use crate::quasi_flow::quasi_flow;

/// Successive Richardson estimates must agree to this relative gap.
pub const EXTRACTION_LIMIT: f64 = 1e-4;
/// Absolute floor (in units of the ħ² coefficient) below which an
/// extracted value counts as zero.
pub const EXTRACTION_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyRecord {
    pub alpha: C64,
    pub beta: ComplexAmplitude,
    pub t: f64,
    pub hbar: f64,
    pub value: C64,
    pub order2_coeff: C64,
}

/// exp(αβ̄ − ᾱβ).
pub fn generating_symbol(alpha: C64, beta: C64) -> C64 {
    (alpha * beta.conj() - alpha.conj() * beta).exp()
}

/// The truncation used for oracle evaluations at β.
pub fn oracle_truncation(beta: ComplexAmplitude, hbar: f64) -> FockTruncation {
    FockTruncation::for_action(beta.action(), hbar)
}

fn frequency(osc: &HamiltonianModel) -> Result<FrequencyModel> {
    frequency_from_hamiltonian(osc)
}

/// W[Â_t](β) − A(β_t(β)) for Â = exp(αb̂† − ᾱb̂).
pub fn discrepancy_exact(
    alpha: C64,
    beta: ComplexAmplitude,
    osc: &HamiltonianModel,
    t: f64,
    trunc: FockTruncation,
) -> Result<C64> {
    if !alpha.is_finite() || !t.is_finite() {
        return Err(Error::InvalidInput("alpha and t must be finite".into()));
    }
    let fm = frequency(osc)?;
    let hbar = osc.hbar();
    let op = FockOperator::displacement(alpha, hbar, trunc).heisenberg(osc, t);
    let exact = SymbolProbe::new(beta, hbar, trunc)?.symbol(&op)?;
    let flowed = quasi_flow(beta, &fm, hbar, t).total;
    Ok(exact - generating_symbol(alpha, flowed))
}

/// The point whose classical image at time t is `image`:
/// w e^{+iω(|w|²)t}.
pub fn classical_preimage(image: ComplexAmplitude, fm: &FrequencyModel, t: f64) -> ComplexAmplitude {
    let b = image.action();
    ComplexAmplitude(image.0 * C64::new(0.0, fm.omega(b) * t).exp())
}

/// ħ → 0 limit of d_t/ħ² from the ladder ħ₀, ħ₀/2, ħ₀/4.
/// `family` builds the oscillator at a given ħ.
pub fn extract_order2<F>(alpha: C64, beta: ComplexAmplitude, family: F, t: f64, hbar0: f64) -> Result<DiscrepancyRecord>
where
    F: Fn(f64) -> Result<HamiltonianModel>,
{
    extract_order2_with(alpha, beta, family, t, hbar0, |b, h| Ok(oracle_truncation(b, h)))
}

/// As [`extract_order2`], with a caller-chosen truncation per ħ.
pub fn extract_order2_with<F, T>(
    alpha: C64,
    beta: ComplexAmplitude,
    family: F,
    t: f64,
    hbar0: f64,
    truncation: T,
) -> Result<DiscrepancyRecord>
where
    F: Fn(f64) -> Result<HamiltonianModel>,
    T: Fn(ComplexAmplitude, f64) -> Result<FockTruncation>,
{
    if !(hbar0 > 0.0 && hbar0.is_finite()) {
        return Err(Error::InvalidInput(format!("hbar0 must be positive, got {hbar0}")));
    }
    let ladder = [hbar0, hbar0 / 2.0, hbar0 / 4.0];
    let mut scaled = Vec::with_capacity(3);
    let mut first = C64::new(0.0, 0.0);
    for (i, &h) in ladder.iter().enumerate() {
        let osc = family(h)?;
        let d = discrepancy_exact(alpha, beta, &osc, t, truncation(beta, h)?)?;
        if i == 0 {
            first = d;
        }
        scaled.push(d / (h * h));
    }
    let (best, prev) = richardson(&scaled, 2.0, 2, 2)?;
    let gap = (best - prev).norm();
    let scale = best.norm().max(EXTRACTION_FLOOR / EXTRACTION_LIMIT);
    if gap > EXTRACTION_LIMIT * scale {
        return Err(Error::Extraction {
            relative_gap: gap / best.norm().max(f64::MIN_POSITIVE),
            limit: EXTRACTION_LIMIT,
        });
    }
    Ok(DiscrepancyRecord {
        alpha,
        beta,
        t,
        hbar: hbar0,
        value: first,
        order2_coeff: best,
    })
}

/// The onset formula for cos(αP̂) at the image point (Q, 0).
pub fn cosine_symbol_t(q: f64, alpha: f64, fm: &FrequencyModel, hbar: f64, t: f64) -> f64 {
    let b = 0.5 * q * q;
    let [_, w1, w2, _] = fm.derivatives(b);
    1.0 + hbar * hbar * (alpha * alpha / 8.0) * (3.0 * w1 + q * q * w2) * w1 * t * t
}

/// cos(αP̂) = (G(α/√2) + G(−α/√2))/2 with G(γ) = exp(γb̂† − γ̄b̂).
pub fn cosine_operator(alpha: f64, hbar: f64, trunc: FockTruncation) -> FockOperator {
    let g = C64::new(alpha * FRAC_1_SQRT_2, 0.0);
    FockOperator::displacement(g, hbar, trunc)
        .add(&FockOperator::displacement(-g, hbar, trunc))
        .scale(C64::new(0.5, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineSample {
    /// Point at which the evolved symbol was evaluated.
    pub beta: ComplexAmplitude,
    /// W[cos(αP̂)_t](β).
    pub evolved_symbol: f64,
    /// W[cos(αP̂)_t](β) − cos(α p(β_t)).
    pub discrepancy: f64,
}

/// Exact cosine data at the classical preimage of (Q, 0).
pub fn cosine_exact(q: f64, alpha: f64, osc: &HamiltonianModel, t: f64) -> Result<CosineSample> {
    let fm = frequency(osc)?;
    let hbar = osc.hbar();
    let image = ComplexAmplitude(C64::new(q * FRAC_1_SQRT_2, 0.0));
    let beta = classical_preimage(image, &fm, t);
    let trunc = oracle_truncation(beta, hbar);
    let op = cosine_operator(alpha, hbar, trunc).heisenberg(osc, t);
    let evolved = SymbolProbe::new(beta, hbar, trunc)?.symbol(&op)?;
    let p_t = SQRT_2 * quasi_flow(beta, &fm, hbar, t).total.im;
    Ok(CosineSample {
        beta,
        evolved_symbol: evolved.re,
        discrepancy: evolved.re - (alpha * p_t).cos(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Improperness {
    pub improper: bool,
    /// |value| − bound; positive exactly when the value leaves the spectrum.
    pub excess: f64,
}

impl Improperness {
    pub fn verdict(&self) -> &'static str {
        if self.improper {
            "improper"
        } else {
            "proper"
        }
    }
}

pub fn improperness(value: f64, spectrum_bound: f64) -> Result<Improperness> {
    if !(spectrum_bound > 0.0) {
        return Err(Error::InvalidInput(format!("spectrum bound must be positive, got {spectrum_bound}")));
    }
    Ok(Improperness {
        improper: value.abs() > spectrum_bound * (1.0 + 1e-12),
        excess: value.abs() - spectrum_bound,
    })
}
