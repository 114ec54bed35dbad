//! Phase-space symbol fields: numeric callables that report their value and
//! partial derivatives (up to a declared order) as a [`Jet`].

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::jet::Jet;
use crate::phase_space::{FrequencyModel, PhasePoint};

pub trait SymbolField: Send + Sync {
    /// Highest total derivative order the field supplies.
    fn max_order(&self) -> u8;

    fn jet(&self, z: PhasePoint) -> Jet;

    fn value(&self, z: PhasePoint) -> C64 {
        self.jet(z).v
    }

    fn partial(&self, idx: &[usize], z: PhasePoint) -> Result<C64> {
        self.jet(z).partial(idx)
    }
}

pub type SharedField = Arc<dyn SymbolField>;

impl<T: SymbolField + ?Sized> SymbolField for Arc<T> {
    fn max_order(&self) -> u8 {
        (**self).max_order()
    }
    fn jet(&self, z: PhasePoint) -> Jet {
        (**self).jet(z)
    }
}

/// Σ c · q^i p^j.
#[derive(Debug, Clone, Default)]
pub struct Polynomial {
    terms: Vec<(C64, u32, u32)>,
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|i| n as f64 - i as f64).product()
}

fn powi(x: f64, n: u32, k: u32) -> f64 {
    if k > n {
        0.0
    } else {
        falling(n, k) * x.powi((n - k) as i32)
    }
}

impl Polynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn monomial(c: C64, i: u32, j: u32) -> Self {
        Polynomial { terms: vec![(c, i, j)] }
    }

    pub fn term(mut self, c: impl Into<C64>, i: u32, j: u32) -> Self {
        self.terms.push((c.into(), i, j));
        self
    }

    pub fn q() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 1, 0)
    }

    pub fn p() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 0, 1)
    }

    /// β = (q + i p)/√2.
    pub fn beta() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Polynomial::new().term(C64::new(s, 0.0), 1, 0).term(C64::new(0.0, s), 0, 1)
    }

    pub fn beta_bar() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Polynomial::new().term(C64::new(s, 0.0), 1, 0).term(C64::new(0.0, -s), 0, 1)
    }

    /// B = (q² + p²)/2.
    pub fn action() -> Self {
        Polynomial::new().term(0.5, 2, 0).term(0.5, 0, 2)
    }
}

impl SymbolField for Polynomial {
    fn max_order(&self) -> u8 {
        3
    }

    fn jet(&self, z: PhasePoint) -> Jet {
        let mut j = Jet::constant(C64::new(0.0, 0.0));
        // derivative with `a` q-indices and `b` p-indices
        let d = |a: u32, b: u32| -> C64 {
            self.terms
                .iter()
                .map(|&(c, i, k)| c * powi(z.q, i, a) * powi(z.p, k, b))
                .sum()
        };
        j.v = d(0, 0);
        for x in 0..2 {
            let cnt = |idx: &[usize]| {
                let a = idx.iter().filter(|&&i| i == 0).count() as u32;
                (a, idx.len() as u32 - a)
            };
            let (a, b) = cnt(&[x]);
            j.d1[x] = d(a, b);
            for y in 0..2 {
                let (a, b) = cnt(&[x, y]);
                j.d2[x][y] = d(a, b);
                for w in 0..2 {
                    let (a, b) = cnt(&[x, y, w]);
                    j.d3[x][y][w] = d(a, b);
                }
            }
        }
        j
    }
}

fn flow_phase_derivatives(fm: &FrequencyModel, b: f64, t: f64) -> [C64; 4] {
    // φ(B) = exp(u(B)), u = −i ω(B) t
    let [w, w1, w2, w3] = fm.derivatives(b);
    let i = C64::new(0.0, 1.0);
    let u1 = -i * w1 * t;
    let u2 = -i * w2 * t;
    let u3 = -i * w3 * t;
    let phi = (-i * w * t).exp();
    [
        phi,
        u1 * phi,
        (u1 * u1 + u2) * phi,
        (u1 * u1 * u1 + 3.0 * u1 * u2 + u3) * phi,
    ]
}

/// The classical flow β̄_t(β) = β e^{−iω(B)t} as a phase-plane field, or its
/// complex conjugate.
#[derive(Debug, Clone)]
pub struct ClassicalFlowField {
    pub fm: FrequencyModel,
    pub t: f64,
    pub conjugate: bool,
}

impl ClassicalFlowField {
    pub fn new(fm: FrequencyModel, t: f64) -> Self {
        ClassicalFlowField { fm, t, conjugate: false }
    }

    pub fn conjugated(fm: FrequencyModel, t: f64) -> Self {
        ClassicalFlowField { fm, t, conjugate: true }
    }
}

impl SymbolField for ClassicalFlowField {
    fn max_order(&self) -> u8 {
        3
    }

    fn jet(&self, z: PhasePoint) -> Jet {
        let beta = Polynomial::beta().jet(z);
        let b = Polynomial::action().jet(z);
        let phase = b.apply(flow_phase_derivatives(&self.fm, b.v.re, self.t));
        let j = beta.mul(&phase);
        if self.conjugate {
            j.conj()
        } else {
            j
        }
    }
}

/// amplitude · exp(−λ((q − q₀)² + (p − p₀)²)/2).
#[derive(Debug, Clone, Copy)]
pub struct Gaussian {
    pub center: PhasePoint,
    pub lambda: f64,
    pub amplitude: f64,
}

impl SymbolField for Gaussian {
    fn max_order(&self) -> u8 {
        3
    }

    fn jet(&self, z: PhasePoint) -> Jet {
        let dq = Jet::variable(0, z.q - self.center.q);
        let dp = Jet::variable(1, z.p - self.center.p);
        let r2 = dq.mul(&dq).add(&dp.mul(&dp)).scale(C64::new(-0.5 * self.lambda, 0.0));
        let e = r2.v.exp() * self.amplitude;
        r2.apply([e, e, e, e])
    }
}

/// A field defined by a closure returning its jet.
pub struct FnField<F> {
    order: u8,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(PhasePoint) -> Jet + Send + Sync,
{
    pub fn new(order: u8, f: F) -> Self {
        FnField { order: order.min(3), f }
    }
}

impl<F> SymbolField for FnField<F>
where
    F: Fn(PhasePoint) -> Jet + Send + Sync,
{
    fn max_order(&self) -> u8 {
        self.order
    }

    fn jet(&self, z: PhasePoint) -> Jet {
        (self.f)(z).with_order(self.order)
    }
}

/// Pointwise complex conjugate of another field.
pub struct Conjugate(pub SharedField);

impl SymbolField for Conjugate {
    fn max_order(&self) -> u8 {
        self.0.max_order()
    }

    fn jet(&self, z: PhasePoint) -> Jet {
        self.0.jet(z).conj()
    }
}

/// Raises an order-2 field to order 3 by central differences of its
/// second partials. Accuracy is roughly step² relative.
pub struct FiniteDifferenceLift {
    inner: SharedField,
    step: f64,
}

impl FiniteDifferenceLift {
    pub const DEFAULT_STEP: f64 = 1e-4;

    pub fn new(inner: SharedField) -> Self {
        FiniteDifferenceLift { inner, step: Self::DEFAULT_STEP }
    }

    pub fn with_step(inner: SharedField, step: f64) -> Self {
        FiniteDifferenceLift { inner, step }
    }
}

impl SymbolField for FiniteDifferenceLift {
    fn max_order(&self) -> u8 {
        match self.inner.max_order() {
            o if o >= 2 => 3,
            o => o,
        }
    }

    fn jet(&self, z: PhasePoint) -> Jet {
        let mut j = self.inner.jet(z);
        if j.order >= 3 || j.order < 2 {
            return j;
        }
        let h = self.step;
        let shifted = |axis: usize, s: f64| {
            let mut w = z;
            if axis == 0 {
                w.q += s;
            } else {
                w.p += s;
            }
            self.inner.jet(w).d2
        };
        let mut raw = [[[C64::new(0.0, 0.0); 2]; 2]; 2];
        for c in 0..2 {
            let plus = shifted(c, h);
            let minus = shifted(c, -h);
            for a in 0..2 {
                for b in 0..2 {
                    raw[a][b][c] = (plus[a][b] - minus[a][b]) / (2.0 * h);
                }
            }
        }
        // symmetrize over index permutations
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let s = raw[a][b][c] + raw[a][c][b] + raw[b][a][c] + raw[b][c][a] + raw[c][a][b] + raw[c][b][a];
                    j.d3[a][b][c] = s / 6.0;
                }
            }
        }
        j.order = 3;
        j
    }
}
