//! Exact dynamics of Ĥ = f(B̂) on a truncated Fock basis, and exact Weyl
//! symbols of the resulting operators.
//!
//! Conventions: b̂ = (Q̂ + iP̂)/√2 with [Q̂, P̂] = iħ, so [b̂, b̂†] = ħ,
//! b̂|n⟩ = √(ħn)|n−1⟩ and B̂|n⟩ = ħ(n + ½)|n⟩. Heisenberg operators are
//! Â_t = e^{iĤt/ħ} Â e^{−iĤt/ħ}, which is exact here because Ĥ is diagonal.
//!
//! # Weyl symbols on a truncated basis
//!
//! The symbol at β is W[Â](β) = Tr[Â Δ(β)] with Δ(β) = 2 D(β) Π D(β)†, Π the
//! parity, so
//!
//! ```text
//! W[Â](β) = 2 Σₙ (−1)ⁿ ⟨n| D(β)† Â D(β) |n⟩
//! ```
//!
//! The series is only conditionally convergent (for Â = 1 it is 2Σ(−1)ⁿ),
//! so it is summed against a smooth erfc taper ρₙ in the displaced levels.
//! The alternating sum of a smooth sequence is fixed by its behaviour near
//! n = 0, which corresponds to phase space close to β; the taper therefore
//! only needs to stay flat there and vary slowly compared with the period-2
//! sign. Two tapers of different position and width are evaluated and their
//! difference is reported as the tail estimate. Because only the columns
//! D(β)|n⟩ below the taper top enter, the truncation is exact as long as
//! those states fit inside the basis, which is checked from their amplitude
//! on the last levels.

use libm::erfc;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::laguerre::displacement_matrix;
use crate::phase_space::{ComplexAmplitude, HamiltonianModel};

/// The taper is treated as 1 below centre − TAPER_REACH·width and as 0
/// above centre + TAPER_REACH·width.
const TAPER_REACH: f64 = 8.0;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockTruncation {
    pub n_max: usize,
    pub tail_tol: f64,
}

impl Default for FockTruncation {
    fn default() -> Self {
        FockTruncation { n_max: 256, tail_tol: 1e-10 }
    }
}

impl FockTruncation {
    pub fn new(n_max: usize, tail_tol: f64) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidInput("n_max must be at least 1".into()));
        }
        if !(tail_tol > 0.0 && tail_tol <= 1e-4) {
            return Err(Error::InvalidInput(format!("tail_tol must lie in (0, 1e-4], got {tail_tol:e}")));
        }
        Ok(FockTruncation { n_max, tail_tol })
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Smallest n_max for which symbols at |β|² ≤ b_max keep every probe
    /// state inside the basis: the outer turning point of D(β)|n_top⟩ plus
    /// room for its Airy tail.
    pub fn required_n_max(b_max: f64, hbar: f64) -> usize {
        let top = PRIMARY_TAPER.top().max(SECONDARY_TAPER.top()) as f64;
        let turning = (top.sqrt() + (b_max.max(0.0) / hbar).sqrt()).powi(2);
        (turning + 10.0 * turning.cbrt() + 10.0).ceil() as usize
    }

    /// A truncation sized for Weyl symbols at actions up to `b_max`, with
    /// the default tail tolerance.
    pub fn for_action(b_max: f64, hbar: f64) -> Self {
        FockTruncation {
            n_max: Self::required_n_max(b_max, hbar),
            tail_tol: 1e-10,
        }
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Result<Self> {
        FockTruncation::new(self.n_max, tail_tol)?;
        self.tail_tol = tail_tol;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    Raise,
    Lower,
}

/// Ω±(B) = ±(f(B ± ħ) − f(B))/ħ.
pub fn omega_pm(b: f64, h: &HamiltonianModel, sign: Shift) -> Result<f64> {
    let hbar = h.hbar();
    let s = match sign {
        Shift::Raise => 1.0,
        Shift::Lower => -1.0,
    };
    let shifted = h.energy(b + s * hbar);
    let base = h.energy(b);
    if !shifted.is_finite() || !base.is_finite() {
        return Err(Error::Domain(format!(
            "energy of '{}' is not finite at B = {} or B = {}",
            h.id(),
            b,
            b + s * hbar
        )));
    }
    Ok(s * (shifted - base) / hbar)
}

/// A dense operator on the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<C64>,
    hbar: f64,
    trunc: FockTruncation,
}

impl FockOperator {
    pub fn from_matrix(matrix: DMatrix<C64>, hbar: f64, trunc: FockTruncation) -> Result<Self> {
        if matrix.nrows() != trunc.dim() || matrix.ncols() != trunc.dim() {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, truncation needs {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                trunc.dim(),
                trunc.dim()
            )));
        }
        Ok(FockOperator { matrix, hbar, trunc })
    }

    fn zeros(hbar: f64, trunc: FockTruncation) -> Self {
        FockOperator {
            matrix: DMatrix::from_element(trunc.dim(), trunc.dim(), ZERO),
            hbar,
            trunc,
        }
    }

    pub fn identity(hbar: f64, trunc: FockTruncation) -> Self {
        FockOperator {
            matrix: DMatrix::identity(trunc.dim(), trunc.dim()),
            hbar,
            trunc,
        }
    }

    /// b̂ with entries (n, n+1) = √(ħ(n+1)).
    pub fn annihilator(hbar: f64, trunc: FockTruncation) -> Self {
        let mut op = Self::zeros(hbar, trunc);
        for n in 0..trunc.n_max {
            op.matrix[(n, n + 1)] = C64::new((hbar * (n + 1) as f64).sqrt(), 0.0);
        }
        op
    }

    pub fn creator(hbar: f64, trunc: FockTruncation) -> Self {
        Self::annihilator(hbar, trunc).adjoint()
    }

    /// g(B̂), diagonal with entries g(ħ(n + ½)).
    pub fn function_of_action(g: impl Fn(f64) -> C64, hbar: f64, trunc: FockTruncation) -> Self {
        let mut op = Self::zeros(hbar, trunc);
        for n in 0..trunc.dim() {
            op.matrix[(n, n)] = g(hbar * (n as f64 + 0.5));
        }
        op
    }

    /// B̂ = (b̂b̂† + b̂†b̂)/2.
    pub fn action(hbar: f64, trunc: FockTruncation) -> Self {
        Self::function_of_action(|b| C64::new(b, 0.0), hbar, trunc)
    }

    /// Q̂ = (b̂ + b̂†)/√2.
    pub fn position(hbar: f64, trunc: FockTruncation) -> Self {
        let b = Self::annihilator(hbar, trunc);
        let bd = b.adjoint();
        b.add(&bd).scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))
    }

    /// P̂ = (b̂ − b̂†)/(i√2).
    pub fn momentum(hbar: f64, trunc: FockTruncation) -> Self {
        let b = Self::annihilator(hbar, trunc);
        let bd = b.adjoint();
        b.sub(&bd).scale(C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2))
    }

    /// exp(γ b̂† − γ̄ b̂), whose Weyl symbol is exp(γβ̄ − γ̄β).
    pub fn displacement(gamma: C64, hbar: f64, trunc: FockTruncation) -> Self {
        FockOperator {
            matrix: displacement_matrix(gamma * hbar.sqrt(), trunc.n_max),
            hbar,
            trunc,
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn truncation(&self) -> FockTruncation {
        self.trunc
    }

    fn check_compatible(&self, other: &FockOperator) {
        assert_eq!(self.trunc.n_max, other.trunc.n_max, "operators on different truncations");
        assert!(self.hbar == other.hbar, "operators with different hbar");
    }

    pub fn adjoint(&self) -> Self {
        self.clone_with(self.matrix.adjoint())
    }

    fn clone_with(&self, matrix: DMatrix<C64>) -> Self {
        FockOperator { matrix, hbar: self.hbar, trunc: self.trunc }
    }

    pub fn add(&self, other: &FockOperator) -> Self {
        self.check_compatible(other);
        self.clone_with(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &FockOperator) -> Self {
        self.check_compatible(other);
        self.clone_with(&self.matrix - &other.matrix)
    }

    pub fn mul(&self, other: &FockOperator) -> Self {
        self.check_compatible(other);
        self.clone_with(&self.matrix * &other.matrix)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.clone_with(&self.matrix * s)
    }

    /// g(Â) for Hermitian Â, through its eigendecomposition on the
    /// truncated basis. Fails if Â is not Hermitian.
    pub fn spectral_map(&self, g: impl Fn(f64) -> C64) -> Result<Self> {
        let asym = (&self.matrix - self.matrix.adjoint()).camax();
        if asym > 1e-12 * (1.0 + self.matrix.camax()) {
            return Err(Error::InvalidInput(format!("spectral_map needs a Hermitian operator (asymmetry {asym:e})")));
        }
        let eig = self.matrix.clone().symmetric_eigen();
        let u = &eig.eigenvectors;
        let vals = DMatrix::from_diagonal(&DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|&x| g(x)),
        ));
        Ok(self.clone_with(u * vals * u.adjoint()))
    }

    /// e^{iĤt/ħ} Â e^{−iĤt/ħ} for Ĥ = f(B̂).
    pub fn heisenberg(&self, h: &HamiltonianModel, t: f64) -> Self {
        let hbar = self.hbar;
        let phases: Vec<C64> = (0..self.trunc.dim())
            .map(|n| C64::new(0.0, h.energy(hbar * (n as f64 + 0.5)) * t / hbar).exp())
            .collect();
        let m = DMatrix::from_fn(self.trunc.dim(), self.trunc.dim(), |r, c| {
            self.matrix[(r, c)] * phases[r] * phases[c].conj()
        });
        self.clone_with(m)
    }
}

/// The annihilator in the Heisenberg picture: entries (n, n+1) equal
/// e^{−iΩ₊(ħ(n+½))t} √(ħ(n+1)).
pub fn evolve_annihilator(h: &HamiltonianModel, t: f64, trunc: FockTruncation) -> Result<FockOperator> {
    let hbar = h.hbar();
    let mut op = FockOperator::zeros(hbar, trunc);
    for n in 0..trunc.n_max {
        let b = hbar * (n as f64 + 0.5);
        let w = omega_pm(b, h, Shift::Raise)?;
        op.matrix[(n, n + 1)] = C64::new(0.0, -w * t).exp() * (hbar * (n + 1) as f64).sqrt();
    }
    Ok(op)
}

fn taper(n: usize, taper: Taper) -> f64 {
    0.5 * erfc((n as f64 - taper.centre) / (taper.width * std::f64::consts::SQRT_2))
}

/// An erfc cut-off in displaced Fock levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taper {
    pub centre: f64,
    pub width: f64,
}

impl Taper {
    /// Last level with non-negligible weight.
    pub fn top(&self) -> usize {
        (self.centre + TAPER_REACH * self.width).ceil() as usize
    }
}

/// Reported taper.
pub const PRIMARY_TAPER: Taper = Taper { centre: 35.0, width: 5.0 };
/// Cross-check taper; the difference to the primary is the tail estimate.
pub const SECONDARY_TAPER: Taper = Taper { centre: 42.0, width: 6.0 };

/// Displaced number states D(β)|n⟩ for the levels the tapers reach, used to
/// evaluate Weyl symbols at one phase point.
#[derive(Debug, Clone)]
pub struct SymbolProbe {
    beta: ComplexAmplitude,
    hbar: f64,
    trunc: FockTruncation,
    /// column n = D(β)|n⟩ on the truncated basis
    states: DMatrix<C64>,
    primary: Vec<f64>,
    secondary: Vec<f64>,
    /// largest amplitude any probe state places on the last few levels
    edge: f64,
}

impl SymbolProbe {
    pub fn new(beta: ComplexAmplitude, hbar: f64, trunc: FockTruncation) -> Result<Self> {
        Self::with_tapers(beta, hbar, trunc, PRIMARY_TAPER, SECONDARY_TAPER)
    }

    pub fn with_tapers(
        beta: ComplexAmplitude,
        hbar: f64,
        trunc: FockTruncation,
        primary: Taper,
        secondary: Taper,
    ) -> Result<Self> {
        if !beta.0.is_finite() {
            return Err(Error::InvalidInput("beta must be finite".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        for t in [primary, secondary] {
            if !(t.width >= 1.0 && t.centre >= 6.0 * t.width && t.centre.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "taper centre must be at least six widths above zero, got {t:?}"
                )));
            }
        }
        let top = primary.top().max(secondary.top());
        if top > trunc.n_max {
            return Err(too_small(trunc, beta, hbar));
        }
        let dim = trunc.dim();
        let full = displacement_matrix(beta.0 / hbar.sqrt(), trunc.n_max);
        let states = full.columns(0, top + 1).into_owned();
        let edge_rows = EDGE_ROWS.min(dim);
        let edge = states
            .rows(dim - edge_rows, edge_rows)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.norm()));
        if edge > trunc.tail_tol {
            return Err(Error::Convergence {
                achieved: edge,
                tolerance: trunc.tail_tol,
                advice: too_small_advice(trunc, beta, hbar),
            });
        }
        Ok(SymbolProbe {
            beta,
            hbar,
            trunc,
            states,
            primary: (0..=top).map(|n| taper(n, primary)).collect(),
            secondary: (0..=top).map(|n| taper(n, secondary)).collect(),
            edge,
        })
    }

    pub fn beta(&self) -> ComplexAmplitude {
        self.beta
    }

    /// Amplitude the probe states leave at the truncation edge.
    pub fn edge_amplitude(&self) -> f64 {
        self.edge
    }

    /// ⟨n|D(β)† Â D(β)|n⟩ for every probed level n.
    pub fn displaced_diagonal(&self, op: &FockOperator) -> Result<Vec<C64>> {
        if op.trunc.n_max != self.trunc.n_max {
            return Err(Error::InvalidInput(format!(
                "operator truncation n_max = {} differs from probe n_max = {}",
                op.trunc.n_max, self.trunc.n_max
            )));
        }
        if (op.hbar - self.hbar).abs() > 1e-15 * self.hbar {
            return Err(Error::InvalidInput("operator and probe use different hbar".into()));
        }
        let image = &op.matrix * &self.states;
        Ok((0..self.states.ncols())
            .map(|n| self.states.column(n).dotc(&image.column(n)))
            .collect())
    }

    /// Returns (symbol, tail estimate).
    pub fn symbol_with_tail(&self, op: &FockOperator) -> Result<(C64, f64)> {
        let diag = self.displaced_diagonal(op)?;
        let (mut s1, mut s2) = (ZERO, ZERO);
        for (n, c) in diag.iter().enumerate() {
            let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
            s1 += c * (sign * self.primary[n]);
            s2 += c * (sign * self.secondary[n]);
        }
        Ok((s1, (s1 - s2).norm()))
    }

    pub fn symbol(&self, op: &FockOperator) -> Result<C64> {
        let (s, tail) = self.symbol_with_tail(op)?;
        let tol = self.trunc.tail_tol.max(op.trunc.tail_tol) * s.norm().max(1.0);
        if !(tail <= tol) {
            return Err(Error::Convergence {
                achieved: tail,
                tolerance: tol,
                advice: format!(
                    "the symbol at |beta|^2 = {:.4} is not resolved at hbar = {}; reduce hbar, t or the observable's \
                     displacement",
                    self.beta.action(),
                    self.hbar
                ),
            });
        }
        Ok(s)
    }
}

/// Levels at the bottom of the basis whose amplitudes bound the truncation
/// leak of the probe states.
const EDGE_ROWS: usize = 4;

fn too_small_advice(trunc: FockTruncation, beta: ComplexAmplitude, hbar: f64) -> String {
    format!(
        "n_max = {} is too small for |beta|^2 = {:.4} at hbar = {hbar}; use n_max >= {}",
        trunc.n_max,
        beta.action(),
        FockTruncation::required_n_max(beta.action(), hbar)
    )
}

fn too_small(trunc: FockTruncation, beta: ComplexAmplitude, hbar: f64) -> Error {
    Error::Convergence {
        achieved: f64::INFINITY,
        tolerance: trunc.tail_tol,
        advice: too_small_advice(trunc, beta, hbar),
    }
}

/// Exact Weyl symbol of `op` at β.
pub fn weyl_symbol(op: &FockOperator, beta: ComplexAmplitude) -> Result<C64> {
    SymbolProbe::new(beta, op.hbar, op.trunc)?.symbol(op)
}


#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    coeffs: DVector<C64>,
    hbar: f64,
    trunc: FockTruncation,
}

impl FockState {
    pub fn from_coefficients(coeffs: DVector<C64>, hbar: f64, trunc: FockTruncation) -> Result<Self> {
        if coeffs.len() != trunc.dim() {
            return Err(Error::InvalidInput(format!(
                "state has {} coefficients, truncation needs {}",
                coeffs.len(),
                trunc.dim()
            )));
        }
        Ok(FockState { coeffs, hbar, trunc })
    }

    pub fn coefficients(&self) -> &DVector<C64> {
        &self.coeffs
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind {
    /// Coherent state with ⟨b̂⟩ = β₀.
    Coherent(C64),
    Fock(usize),
    /// Squeezed vacuum S(r e^{iφ})|0⟩.
    Squeezed { r: f64, phi: f64 },
}

/// Fills coefficients from a first-term value and a ratio recurrence, and
/// returns the probability mass beyond the truncation.
fn fill_series(
    dim: usize,
    first: C64,
    stride: usize,
    next: impl Fn(usize, C64) -> C64,
) -> (DVector<C64>, f64) {
    let mut v = DVector::from_element(dim, ZERO);
    let mut c = first;
    let mut n = 0usize;
    let mut tail = 0.0;
    let mut quiet = 0;
    loop {
        if n < dim {
            v[n] = c;
        } else {
            let w = c.norm_sqr();
            tail += w;
            if w < 1e-40 * (1.0 + tail) {
                quiet += 1;
                if quiet > 8 {
                    break;
                }
            } else {
                quiet = 0;
            }
            if n > 200 * dim + 100_000 {
                break;
            }
        }
        c = next(n, c);
        n += stride;
    }
    (v, tail)
}

pub fn make_state(kind: StateKind, hbar: f64, trunc: FockTruncation) -> Result<FockState> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
    }
    let dim = trunc.dim();
    let (coeffs, tail) = match kind {
        StateKind::Fock(n) => {
            if n > trunc.n_max {
                return Err(Error::Convergence {
                    achieved: 1.0,
                    tolerance: trunc.tail_tol,
                    advice: format!("Fock level {n} lies outside n_max = {}; use n_max >= {n}", trunc.n_max),
                });
            }
            let mut v = DVector::from_element(dim, ZERO);
            v[n] = C64::new(1.0, 0.0);
            (v, 0.0)
        }
        StateKind::Coherent(beta0) => {
            if !beta0.is_finite() {
                return Err(Error::InvalidInput("coherent amplitude must be finite".into()));
            }
            let alpha = beta0 / hbar.sqrt();
            let first = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
            fill_series(dim, first, 1, |n, c| c * alpha / ((n + 1) as f64).sqrt())
        }
        StateKind::Squeezed { r, phi } => {
            if !(r.is_finite() && phi.is_finite()) {
                return Err(Error::InvalidInput("squeezing parameters must be finite".into()));
            }
            let ratio = -C64::from_polar(r.tanh(), phi);
            let first = C64::new(1.0 / r.cosh().sqrt(), 0.0);
            // c_{2m+2} = c_{2m} · ratio · √((2m+1)(2m+2)) / (2(m+1))
            fill_series(dim, first, 2, |n, c| {
                let m = (n / 2) as f64;
                c * ratio * (((2.0 * m + 1.0) * (2.0 * m + 2.0)).sqrt() / (2.0 * (m + 1.0)))
            })
        }
    };
    if tail > trunc.tail_tol {
        return Err(Error::Convergence {
            achieved: tail,
            tolerance: trunc.tail_tol,
            advice: format!("state leaks past n_max = {}; increase n_max", trunc.n_max),
        });
    }
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    Ok(FockState { coeffs: coeffs / C64::new(norm, 0.0), hbar, trunc })
}

/// ⟨ψ|Â|ψ⟩.
pub fn expectation(op: &FockOperator, state: &FockState) -> Result<C64> {
    if op.trunc.n_max != state.trunc.n_max {
        return Err(Error::InvalidInput("operator and state truncations differ".into()));
    }
    let norm = state.norm_sqr();
    let tol = state.trunc.tail_tol.max(op.trunc.tail_tol);
    if (norm - 1.0).abs() > tol {
        return Err(Error::InvalidInput(format!("state is not normalized: |psi|^2 = {norm}")));
    }
    let av = &op.matrix * &state.coeffs;
    Ok(state.coeffs.dotc(&av))
}
