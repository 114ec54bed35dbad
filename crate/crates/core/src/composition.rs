//! Weyl symbols under a change of canonical operator set.
//!
//! Let Q̂^μ be operators whose symbols with respect to (q̂, p̂) are Z^μ(z).
//! An operator given as the Weyl function A(Q̂, P̂) then has the (q̂, p̂)
//! symbol
//!
//! ```text
//! Å(z) = A(Z) − ħ² [ (1/16) ∂_k∂_l Z^μ ∂^k∂^l Z^ν ∂_μ∂_ν A
//!                  + (1/24) ∂_k Z^λ ∂^k∂^l Z^μ ∂_l Z^ν ∂_λ∂_μ∂_ν A ] + O(ħ⁴)
//! ```
//!
//! with A and its derivatives taken at Z(z). Applying this rule to the
//! three steps (q̂, p̂) → (Q̂, P̂) → (Q̂_t, P̂_t) → (q̂_t, p̂_t) turns the
//! normal-form quasi-flow into the quasi-flow of the original variables.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};
use crate::jet::{invert_map, raise2, symplectic_contraction2, Jet};
use crate::phase_space::{ComplexAmplitude, FrequencyModel, PhasePoint};
use crate::quasi_flow::quantum_correction;
use crate::symbol::{ClassicalFlowField, FiniteDifferenceLift, FnField, Polynomial, SharedField, SymbolField};

/// Tolerance of the ħ⁰ canonicity check {Z¹, Z²} = 1.
pub const CANONICITY_TOL: f64 = 1e-8;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// The symbols Z¹, Z² of the new canonical pair.
#[derive(Clone)]
pub struct TransformSymbol {
    z: [SharedField; 2],
}

impl std::fmt::Debug for TransformSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformSymbol")
            .field("orders", &[self.z[0].max_order(), self.z[1].max_order()])
            .finish()
    }
}

impl TransformSymbol {
    /// Components must supply at least second partials; order-2 components
    /// are lifted to order 3 by finite differences where third partials are
    /// needed.
    pub fn new(z1: SharedField, z2: SharedField) -> Result<Self> {
        for f in [&z1, &z2] {
            f.jet(PhasePoint::ORIGIN).with_order(f.max_order()).require(2)?;
        }
        Ok(TransformSymbol { z: [z1, z2] })
    }

    pub fn identity() -> Self {
        Self::linear([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Z(z) = M z.
    pub fn linear(m: [[f64; 2]; 2]) -> Self {
        let row = |r: [f64; 2]| -> SharedField {
            Arc::new(FnField::new(3, move |z: PhasePoint| {
                Jet::variable(0, z.q)
                    .scale(C64::new(r[0], 0.0))
                    .add(&Jet::variable(1, z.p).scale(C64::new(r[1], 0.0)))
            }))
        };
        TransformSymbol { z: [row(m[0]), row(m[1])] }
    }

    /// Z = (q − η(p + εq²)², p + εq²): the symbols of V q̂ V† and V p̂ V†
    /// for V = e^{−iεq̂³/3ħ} e^{−iηp̂³/3ħ}. Exact at every order in ħ.
    pub fn cubic_phase(eps: f64, eta: f64) -> Result<Self> {
        if !eps.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidInput("cubic-phase strengths must be finite".into()));
        }
        let z1: SharedField = Arc::new(
            Polynomial::new()
                .term(1.0, 1, 0)
                .term(-eta, 0, 2)
                .term(-2.0 * eta * eps, 2, 1)
                .term(-eta * eps * eps, 4, 0),
        );
        let z2: SharedField = Arc::new(Polynomial::new().term(1.0, 0, 1).term(eps, 2, 0));
        Self::new(z1, z2)
    }

    /// Rotation by angle θ, a linear symplectic map.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::linear([[c, -s], [s, c]])
    }

    pub fn components(&self) -> &[SharedField; 2] {
        &self.z
    }

    pub fn jets(&self, z: PhasePoint) -> [Jet; 2] {
        [self.z[0].jet(z), self.z[1].jet(z)]
    }

    /// Z(z) as a real point.
    pub fn apply(&self, z: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.z[0].value(z).re, self.z[1].value(z).re)
    }

    /// |{Z¹, Z²} − 1| at z.
    pub fn canonicity_defect(&self, z: PhasePoint) -> f64 {
        let [a, b] = self.jets(z);
        (a.d1[0] * b.d1[1] - a.d1[1] * b.d1[0] - 1.0).norm()
    }

    /// Checks classical canonicity at every sample point.
    pub fn check_canonical(&self, points: &[PhasePoint]) -> Result<()> {
        for &z in points {
            let d = self.canonicity_defect(z);
            if !(d <= CANONICITY_TOL) {
                return Err(Error::InvalidInput(format!(
                    "transform is not canonical at ({}, {}): |{{Z1,Z2}} - 1| = {d:e}",
                    z.q, z.p
                )));
            }
        }
        Ok(())
    }

    /// Jets of order 3 for both components at z.
    fn jets3(&self, z: PhasePoint) -> Result<[Jet; 2]> {
        let lift = |f: &SharedField| -> Result<Jet> {
            let j = f.jet(z).with_order(f.max_order());
            if j.order >= 3 {
                return Ok(j);
            }
            j.require(2)?;
            Ok(FiniteDifferenceLift::new(f.clone()).jet(z))
        };
        Ok([lift(&self.z[0])?, lift(&self.z[1])?])
    }

    /// Solves Z(y) = target by Newton iteration from `start`.
    pub fn invert_point(&self, target: PhasePoint, start: PhasePoint) -> Result<PhasePoint> {
        let mut y = start;
        for _ in 0..100 {
            let [a, b] = self.jets(y);
            let r = [a.v.re - target.q, b.v.re - target.p];
            if r[0].abs().max(r[1].abs()) <= 1e-15 * (1.0 + target.q.abs().max(target.p.abs())) {
                return Ok(y);
            }
            let (j00, j01, j10, j11) = (a.d1[0].re, a.d1[1].re, b.d1[0].re, b.d1[1].re);
            let det = j00 * j11 - j01 * j10;
            if det.abs() < 1e-300 || !det.is_finite() {
                return Err(Error::Domain("transform Jacobian is singular".into()));
            }
            let dq = (j11 * r[0] - j01 * r[1]) / det;
            let dp = (-j10 * r[0] + j00 * r[1]) / det;
            y = PhasePoint::new(y.q - dq, y.p - dp);
            if dq.abs().max(dp.abs()) <= 1e-16 * (1.0 + y.q.abs().max(y.p.abs())) {
                return Ok(y);
            }
        }
        let [a, b] = self.jets(y);
        let res = (a.v.re - target.q).hypot(b.v.re - target.p);
        if res <= 1e-12 * (1.0 + target.q.abs().max(target.p.abs())) {
            Ok(y)
        } else {
            Err(Error::Convergence {
                achieved: res,
                tolerance: 1e-12,
                advice: "Newton inversion of the transform did not converge; start closer".into(),
            })
        }
    }
}

/// Sign convention for the relative sign between the two ħ² terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionSign {
    /// Both terms enter with the same sign (the implemented rule).
    Standard,
    /// The cubic term's sign reversed; kept only to show that the
    /// oracle rejects it.
    Flipped,
}

/// A(Z(z)) and the ħ² coefficient of the composed symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionTerms {
    pub order0: C64,
    pub order2: C64,
}

impl CompositionTerms {
    pub fn total(&self, hbar: f64) -> C64 {
        self.order0 + hbar * hbar * self.order2
    }
}

/// Bracket C[Z, A] = (1/16) T1^{μν} A_{μν} + (1/24) T^{λμν} A_{λμν}, from
/// the jet of Z at z (order ≥ 2) and of A at Z(z) (order 3).
fn bracket(zj: &[Jet; 2], aj: &Jet, sign: CompositionSign) -> C64 {
    let mut t1 = ZERO;
    for mu in 0..2 {
        for nu in 0..2 {
            t1 += symplectic_contraction2(&zj[mu], &zj[nu]) * aj.d2[mu][nu];
        }
    }
    let up: [[[C64; 2]; 2]; 2] = [raise2(&zj[0].d2), raise2(&zj[1].d2)];
    let mut t3 = ZERO;
    for l in 0..2 {
        for m in 0..2 {
            for n in 0..2 {
                let mut t = ZERO;
                for k in 0..2 {
                    for ll in 0..2 {
                        t += zj[l].d1[k] * up[m][k][ll] * zj[n].d1[ll];
                    }
                }
                t3 += t * aj.d3[l][m][n];
            }
        }
    }
    let s = match sign {
        CompositionSign::Standard => 1.0,
        CompositionSign::Flipped => -1.0,
    };
    t1 / 16.0 + s * t3 / 24.0
}

fn jet3_of(a: &SharedField, z: PhasePoint) -> Result<Jet> {
    let j = a.jet(z).with_order(a.max_order());
    if j.order >= 3 {
        return Ok(j);
    }
    j.require(2)?;
    Ok(FiniteDifferenceLift::new(a.clone()).jet(z))
}

pub fn composition_terms(z_map: &TransformSymbol, a: &SharedField, z: PhasePoint) -> Result<CompositionTerms> {
    composition_terms_with_sign(z_map, a, z, CompositionSign::Standard)
}

pub fn composition_terms_with_sign(
    z_map: &TransformSymbol,
    a: &SharedField,
    z: PhasePoint,
    sign: CompositionSign,
) -> Result<CompositionTerms> {
    let zj = z_map.jets(z);
    for j in &zj {
        j.require(2)?;
    }
    let zp = PhasePoint::new(zj[0].v.re, zj[1].v.re);
    let aj = jet3_of(a, zp)?;
    Ok(CompositionTerms { order0: aj.v, order2: -bracket(&zj, &aj, sign) })
}

/// The (q̂, p̂) symbol at z of the operator A(Q̂, P̂).
pub fn delta_kernel_action(z_map: &TransformSymbol, a: &SharedField, z: PhasePoint, hbar: f64) -> Result<C64> {
    Ok(composition_terms(z_map, a, z)?.total(hbar))
}

/// General-form quasi-flow at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposedFlow {
    /// Z⁻¹ ∘ (normal-form classical flow) ∘ Z.
    pub classical: PhasePoint,
    /// Coefficient of ħ².
    pub correction: [f64; 2],
    pub total: PhasePoint,
}

/// Real-coordinate jets of the normal-form classical flow.
fn flow_jets(fm: &FrequencyModel, t: f64, z: PhasePoint) -> [Jet; 2] {
    let g = ClassicalFlowField::new(fm.clone(), t).jet(z);
    let gc = g.conj();
    let re = g.add(&gc).scale(C64::new(FRAC_1_SQRT_2, 0.0));
    let im = g.sub(&gc).scale(C64::new(0.0, -FRAC_1_SQRT_2));
    [re, im]
}

/// Order-3 jets of the inverse map w⁰ = Z⁻¹ at `point`, found by Newton
/// inversion starting from `guess`; returns (jets, Z⁻¹(point)).
fn inverse_jets(z_map: &TransformSymbol, point: PhasePoint, guess: PhasePoint) -> Result<([Jet; 2], PhasePoint)> {
    let y = z_map.invert_point(point, guess)?;
    let zj = z_map.jets3(y)?;
    let inv = invert_map(&zj, y.as_array())?;
    Ok((inv, y))
}

fn bracket_vec(zj: &[Jet; 2], outer: &[Jet; 2]) -> [C64; 2] {
    [
        bracket(zj, &outer[0], CompositionSign::Standard),
        bracket(zj, &outer[1], CompositionSign::Standard),
    ]
}

/// z_t(z) for the dynamics f(B(Q̂, P̂)), where Q̂, P̂ have symbols Z.
///
/// With z′ = Z(z), z″ = N̄_t(z′) the classical normal-form flow, w⁰ = Z⁻¹
/// and C[·,·] the ħ² bracket of the composition rule:
///
/// ```text
/// z_t = w⁰(z″) + ħ² { ∇w⁰(z″)·N_t^(2)(z′) + C[Z, w⁰](Z⁻¹(z″))
///                     − C[N̄_t, w⁰](z′) − C[Z, w⁰∘N̄_t](z) }
/// ```
///
/// Products of two ħ²-corrections are dropped.
pub fn compose_quasi_flow(
    z_map: &TransformSymbol,
    fm: &FrequencyModel,
    hbar: f64,
    t: f64,
    z: PhasePoint,
) -> Result<ComposedFlow> {
    if !z.is_finite() || !t.is_finite() || !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidInput("z, t must be finite and hbar positive".into()));
    }
    let zj = z_map.jets(z);
    for j in &zj {
        j.require(2)?;
    }
    let z1 = PhasePoint::new(zj[0].v.re, zj[1].v.re);
    let nj = flow_jets(fm, t, z1);
    let z2 = PhasePoint::new(nj[0].v.re, nj[1].v.re);

    // w⁰ and its jets at z″; start Newton from the classical guess z
    let (w0, y) = inverse_jets(z_map, z2, z)?;
    let classical = PhasePoint::new(w0[0].v.re, w0[1].v.re);

    // normal-form ħ² correction at z′ in real coordinates
    let beta1 = ComplexAmplitude(C64::new(z1.q, z1.p) * FRAC_1_SQRT_2);
    let bar = nj[0].v.re * FRAC_1_SQRT_2;
    let bar_im = nj[1].v.re * FRAC_1_SQRT_2;
    let corr = C64::new(bar, bar_im) * quantum_correction(beta1.action(), fm, t);
    let n2 = [SQRT_2 * corr.re, SQRT_2 * corr.im];

    let mut out = [ZERO; 2];
    // ∇w⁰(z″)·N^(2)
    for (mu, o) in out.iter_mut().enumerate() {
        *o += w0[mu].d1[0] * n2[0] + w0[mu].d1[1] * n2[1];
    }
    // w²(z″) = C[Z, w⁰](y)
    let zy = z_map.jets(y);
    let w2 = bracket_vec(&zy, &w0);
    // C[N̄_t, w⁰](z′)
    let cn = bracket_vec(&nj, &w0);
    // C[Z, w⁰∘N̄_t](z)
    let comp = [w0[0].compose(&nj), w0[1].compose(&nj)];
    let cz = bracket_vec(&zj, &comp);
    for mu in 0..2 {
        out[mu] += w2[mu] - cn[mu] - cz[mu];
    }
    let correction = [out[0].re, out[1].re];
    let h2 = hbar * hbar;
    Ok(ComposedFlow {
        classical,
        correction,
        total: PhasePoint::new(classical.q + h2 * correction[0], classical.p + h2 * correction[1]),
    })
}
