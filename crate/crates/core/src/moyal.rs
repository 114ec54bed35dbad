//! Weyl star product truncated at ħ², and the Poisson bracket.
//!
//! For symbols a, c the expansion is
//!
//! ```text
//! a ⋆ c = a c + (iħ/2){a, c} − (ħ²/8) ∂_μ∂_ν a ∂^μ∂^ν c + O(ħ³)
//! ```
//!
//! with ∂^μ = J^{μν}∂_ν. The ħ² contraction expands to
//! a_qq c_pp − 2 a_qp c_qp + a_pp c_qq. The symmetrized product
//! (a⋆c + c⋆a)/2 has no ħ¹ term.

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::jet::{symplectic_contraction2, Jet};
use crate::phase_space::PhasePoint;
use crate::symbol::{SharedField, SymbolField};

/// Coefficients of the star product at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarTerms {
    pub order0: C64,
    /// Coefficient of ħ: (i/2){a, c}.
    pub order1: C64,
    /// Coefficient of ħ²: −(1/8) ∂_μ∂_ν a ∂^μ∂^ν c.
    pub order2: C64,
}

impl StarTerms {
    pub fn total(&self, hbar: f64) -> C64 {
        self.order0 + self.order1 * hbar + self.order2 * hbar * hbar
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarOrder {
    Zero,
    One,
    Two,
}

/// The ħ-expansion of a ⋆ c, evaluated lazily.
#[derive(Clone)]
pub struct StarProductResult {
    a: SharedField,
    c: SharedField,
}

fn poisson_jets(a: &Jet, c: &Jet) -> C64 {
    a.d1[0] * c.d1[1] - a.d1[1] * c.d1[0]
}

fn star_jets(a: &Jet, c: &Jet) -> StarTerms {
    StarTerms {
        order0: a.v * c.v,
        order1: C64::new(0.0, 0.5) * poisson_jets(a, c),
        order2: -0.125 * symplectic_contraction2(a, c),
    }
}

impl StarProductResult {
    pub fn terms(&self, z: PhasePoint) -> StarTerms {
        star_jets(&self.a.jet(z), &self.c.jet(z))
    }

    /// Terms of (a⋆c + c⋆a)/2; the ħ¹ coefficient is exactly zero.
    pub fn symmetrized(&self, z: PhasePoint) -> StarTerms {
        let t = self.terms(z);
        StarTerms { order1: C64::new(0.0, 0.0), ..t }
    }

    pub fn order_field(&self, order: StarOrder) -> StarOrderField {
        StarOrderField { product: self.clone(), order }
    }

    pub fn order0(&self) -> StarOrderField {
        self.order_field(StarOrder::Zero)
    }

    pub fn order2(&self) -> StarOrderField {
        self.order_field(StarOrder::Two)
    }
}

/// One ħ-coefficient of a star product viewed as a value-only field.
#[derive(Clone)]
pub struct StarOrderField {
    product: StarProductResult,
    order: StarOrder,
}

impl SymbolField for StarOrderField {
    fn max_order(&self) -> u8 {
        0
    }

    fn jet(&self, z: PhasePoint) -> Jet {
        let t = self.product.terms(z);
        let v = match self.order {
            StarOrder::Zero => t.order0,
            StarOrder::One => t.order1,
            StarOrder::Two => t.order2,
        };
        Jet::constant(v).with_order(0)
    }
}

fn require_order(f: &SharedField, order: u8) -> Result<()> {
    f.jet(PhasePoint::ORIGIN).with_order(f.max_order()).require(order)
}

pub fn star(a: SharedField, c: SharedField) -> Result<StarProductResult> {
    require_order(&a, 2)?;
    require_order(&c, 2)?;
    Ok(StarProductResult { a, c })
}

/// {a, c} = ∂a/∂q ∂c/∂p − ∂a/∂p ∂c/∂q.
pub struct PoissonField {
    a: SharedField,
    c: SharedField,
}

impl SymbolField for PoissonField {
    fn max_order(&self) -> u8 {
        0
    }

    fn jet(&self, z: PhasePoint) -> Jet {
        Jet::constant(poisson_jets(&self.a.jet(z), &self.c.jet(z))).with_order(0)
    }
}

pub fn poisson(a: SharedField, c: SharedField) -> Result<PoissonField> {
    require_order(&a, 1)?;
    require_order(&c, 1)?;
    Ok(PoissonField { a, c })
}
