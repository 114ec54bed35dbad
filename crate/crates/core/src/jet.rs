//! Third-order Taylor jets in the two phase-plane variables (q, p).
//!
//! A [`Jet`] holds the value and all partial derivatives up to `order` (≤ 3)
//! of a complex field at one point. Index 0 is q, index 1 is p. Jets support
//! the arithmetic and chain-rule operations needed by the Moyal and
//! composition machinery, plus inversion of two-component maps.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const AXIS_NAMES: [&str; 2] = ["q", "p"];

/// Symplectic form J^{μν} used to raise derivative indices:
/// ∂^μ = J^{μν} ∂_ν, so ∂^q = −∂_p and ∂^p = ∂_q.
pub const SYMPLECTIC: [[f64; 2]; 2] = [[0.0, -1.0], [1.0, 0.0]];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub order: u8,
    pub v: C64,
    pub d1: [C64; 2],
    pub d2: [[C64; 2]; 2],
    pub d3: [[[C64; 2]; 2]; 2],
}

pub fn multi_index_name(idx: &[usize]) -> String {
    let names: Vec<&str> = idx.iter().map(|&i| AXIS_NAMES[i]).collect();
    format!("({})", names.join(","))
}

impl Jet {
    pub fn constant(c: C64) -> Self {
        Jet {
            order: 3,
            v: c,
            d1: [ZERO; 2],
            d2: [[ZERO; 2]; 2],
            d3: [[[ZERO; 2]; 2]; 2],
        }
    }

    /// The coordinate function z^axis, evaluated at `value`.
    pub fn variable(axis: usize, value: f64) -> Self {
        let mut j = Jet::constant(C64::new(value, 0.0));
        j.d1[axis] = C64::new(1.0, 0.0);
        j
    }

    /// The two coordinate functions at `z`.
    pub fn identity_map(z: [f64; 2]) -> [Jet; 2] {
        [Jet::variable(0, z[0]), Jet::variable(1, z[1])]
    }

    pub fn with_order(mut self, order: u8) -> Self {
        self.order = order.min(3);
        if self.order < 3 {
            self.d3 = [[[ZERO; 2]; 2]; 2];
        }
        if self.order < 2 {
            self.d2 = [[ZERO; 2]; 2];
        }
        if self.order < 1 {
            self.d1 = [ZERO; 2];
        }
        self
    }

    pub fn partial(&self, idx: &[usize]) -> Result<C64> {
        if idx.len() > self.order as usize || idx.len() > 3 {
            return Err(Error::Capability {
                multi_index: multi_index_name(idx),
                available: self.order,
            });
        }
        Ok(match idx {
            [] => self.v,
            [a] => self.d1[*a],
            [a, b] => self.d2[*a][*b],
            [a, b, c] => self.d3[*a][*b][*c],
            _ => unreachable!(),
        })
    }

    /// Fails with a capability error unless the jet carries `order` derivatives.
    pub fn require(&self, order: u8) -> Result<()> {
        if self.order < order {
            let idx = vec![0; order as usize];
            return Err(Error::Capability {
                multi_index: multi_index_name(&idx),
                available: self.order,
            });
        }
        Ok(())
    }

    pub fn conj(&self) -> Jet {
        let mut out = *self;
        out.v = self.v.conj();
        for a in 0..2 {
            out.d1[a] = self.d1[a].conj();
            for b in 0..2 {
                out.d2[a][b] = self.d2[a][b].conj();
                for c in 0..2 {
                    out.d3[a][b][c] = self.d3[a][b][c].conj();
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Jet {
        let mut out = *self;
        out.v *= s;
        for a in 0..2 {
            out.d1[a] *= s;
            for b in 0..2 {
                out.d2[a][b] *= s;
                for c in 0..2 {
                    out.d3[a][b][c] *= s;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut out = *self;
        out.order = self.order.min(other.order);
        out.v += other.v;
        for a in 0..2 {
            out.d1[a] += other.d1[a];
            for b in 0..2 {
                out.d2[a][b] += other.d2[a][b];
                for c in 0..2 {
                    out.d3[a][b][c] += other.d3[a][b][c];
                }
            }
        }
        out.with_order(out.order)
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Leibniz rule to third order.
    pub fn mul(&self, o: &Jet) -> Jet {
        let (u, w) = (self, o);
        let mut out = Jet::constant(u.v * w.v);
        out.order = u.order.min(w.order);
        for a in 0..2 {
            out.d1[a] = u.d1[a] * w.v + u.v * w.d1[a];
            for b in 0..2 {
                out.d2[a][b] = u.d2[a][b] * w.v
                    + u.d1[a] * w.d1[b]
                    + u.d1[b] * w.d1[a]
                    + u.v * w.d2[a][b];
                for c in 0..2 {
                    out.d3[a][b][c] = u.d3[a][b][c] * w.v
                        + u.d2[a][b] * w.d1[c]
                        + u.d2[a][c] * w.d1[b]
                        + u.d2[b][c] * w.d1[a]
                        + u.d1[a] * w.d2[b][c]
                        + u.d1[b] * w.d2[a][c]
                        + u.d1[c] * w.d2[a][b]
                        + u.v * w.d3[a][b][c];
                }
            }
        }
        out.with_order(out.order)
    }

    /// g∘u for a scalar function g given by (g, g′, g″, g‴) at u's value.
    pub fn apply(&self, g: [C64; 4]) -> Jet {
        let u = self;
        let mut out = Jet::constant(g[0]);
        out.order = u.order;
        for a in 0..2 {
            out.d1[a] = g[1] * u.d1[a];
            for b in 0..2 {
                out.d2[a][b] = g[2] * u.d1[a] * u.d1[b] + g[1] * u.d2[a][b];
                for c in 0..2 {
                    out.d3[a][b][c] = g[3] * u.d1[a] * u.d1[b] * u.d1[c]
                        + g[2]
                            * (u.d2[a][b] * u.d1[c] + u.d2[a][c] * u.d1[b] + u.d2[b][c] * u.d1[a])
                        + g[1] * u.d3[a][b][c];
                }
            }
        }
        out.with_order(out.order)
    }

    /// Jet of A∘M at z, where `self` is the jet of A at M(z) and `inner` the
    /// jet of the two-component map M at z.
    pub fn compose(&self, inner: &[Jet; 2]) -> Jet {
        let a = self;
        let m = inner;
        let mut out = Jet::constant(a.v);
        out.order = a.order.min(m[0].order).min(m[1].order);
        for x in 0..2 {
            let mut s1 = ZERO;
            for i in 0..2 {
                s1 += a.d1[i] * m[i].d1[x];
            }
            out.d1[x] = s1;
            for y in 0..2 {
                let mut s2 = ZERO;
                for i in 0..2 {
                    s2 += a.d1[i] * m[i].d2[x][y];
                    for j in 0..2 {
                        s2 += a.d2[i][j] * m[i].d1[x] * m[j].d1[y];
                    }
                }
                out.d2[x][y] = s2;
                for z in 0..2 {
                    let mut s3 = ZERO;
                    for i in 0..2 {
                        s3 += a.d1[i] * m[i].d3[x][y][z];
                        for j in 0..2 {
                            s3 += a.d2[i][j]
                                * (m[i].d1[x] * m[j].d2[y][z]
                                    + m[i].d1[y] * m[j].d2[x][z]
                                    + m[i].d1[z] * m[j].d2[x][y]);
                            for k in 0..2 {
                                s3 += a.d3[i][j][k] * m[i].d1[x] * m[j].d1[y] * m[k].d1[z];
                            }
                        }
                    }
                    out.d3[x][y][z] = s3;
                }
            }
        }
        out.with_order(out.order)
    }

    /// Largest asymmetry among mixed partials, relative to their magnitude.
    pub fn mixed_partial_asymmetry(&self) -> f64 {
        let rel = |x: C64, y: C64| (x - y).norm() / x.norm().max(y.norm()).max(1e-300);
        let mut worst = 0.0f64;
        if self.order >= 2 {
            let (x, y) = (self.d2[0][1], self.d2[1][0]);
            if x != y {
                worst = worst.max(rel(x, y));
            }
        }
        if self.order >= 3 {
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        let x = self.d3[a][b][c];
                        for y in [self.d3[b][a][c], self.d3[a][c][b], self.d3[c][b][a]] {
                            if x != y {
                                worst = worst.max(rel(x, y));
                            }
                        }
                    }
                }
            }
        }
        worst
    }
}

/// ∂^μ∂^ν of a jet's Hessian: J^{μα} J^{νβ} ∂_α∂_β.
pub fn raise2(h: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[ZERO; 2]; 2];
    for m in 0..2 {
        for n in 0..2 {
            let mut s = ZERO;
            for a in 0..2 {
                for b in 0..2 {
                    s += SYMPLECTIC[m][a] * SYMPLECTIC[n][b] * h[a][b];
                }
            }
            out[m][n] = s;
        }
    }
    out
}

/// ∂_μ∂_ν a · ∂^μ∂^ν c = a_qq c_pp − 2 a_qp c_qp + a_pp c_qq.
pub fn symplectic_contraction2(a: &Jet, c: &Jet) -> C64 {
    let up = raise2(&c.d2);
    let mut s = ZERO;
    for m in 0..2 {
        for n in 0..2 {
            s += a.d2[m][n] * up[m][n];
        }
    }
    s
}

fn inverse2(m: [[C64; 2]; 2]) -> Result<[[C64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() < 1e-300 || !det.is_finite() {
        return Err(Error::Domain("map Jacobian is singular".into()));
    }
    Ok([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// Jet of the local inverse M⁻¹ at M(z), given the jet of M at z (order 3).
/// The value of each returned component is the corresponding coordinate of `z`.
pub fn invert_map(m: &[Jet; 2], z: [f64; 2]) -> Result<[Jet; 2]> {
    let jac = [[m[0].d1[0], m[0].d1[1]], [m[1].d1[0], m[1].d1[1]]];
    let g = inverse2(jac)?;
    // second order: G2^a_{bc} = −G^a_m H^m_{ij} G^i_b G^j_c
    let mut g2 = [[[ZERO; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let mut s = ZERO;
                for mm in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            s += g[a][mm] * m[mm].d2[i][j] * g[i][b] * g[j][c];
                        }
                    }
                }
                g2[a][b][c] = -s;
            }
        }
    }
    // third order: G3^a_{bcd} = −G^a_m (H^m_{ij}(G^i_b G2^j_cd + G^i_c G2^j_bd + G^i_d G2^j_bc)
    //                                   + T^m_{ijk} G^i_b G^j_c G^k_d)
    let mut g3 = [[[[ZERO; 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let mut s = ZERO;
                    for mm in 0..2 {
                        let mut inner = ZERO;
                        for i in 0..2 {
                            for j in 0..2 {
                                inner += m[mm].d2[i][j]
                                    * (g[i][b] * g2[j][c][d] + g[i][c] * g2[j][b][d] + g[i][d] * g2[j][b][c]);
                                for k in 0..2 {
                                    inner += m[mm].d3[i][j][k] * g[i][b] * g[j][c] * g[k][d];
                                }
                            }
                        }
                        s += g[a][mm] * inner;
                    }
                    g3[a][b][c][d] = -s;
                }
            }
        }
    }
    let order = m[0].order.min(m[1].order);
    let mut out = [Jet::constant(ZERO), Jet::constant(ZERO)];
    for a in 0..2 {
        out[a].v = C64::new(z[a], 0.0);
        out[a].d1 = g[a];
        out[a].d2 = g2[a];
        out[a].d3 = g3[a];
        out[a] = out[a].with_order(order);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// Jet of q²p + i·q at (q, p), computed by hand.
    fn sample(q: f64, p: f64) -> Jet {
        let mut j = Jet::constant(C64::new(q * q * p, q));
        j.d1 = [C64::new(2.0 * q * p, 1.0), c(q * q)];
        j.d2 = [[c(2.0 * p), c(2.0 * q)], [c(2.0 * q), c(0.0)]];
        j.d3[0][0][1] = c(2.0);
        j.d3[0][1][0] = c(2.0);
        j.d3[1][0][0] = c(2.0);
        j
    }

    #[test]
    fn arithmetic_matches_hand_jets() {
        let (q, p) = (0.7, -1.3);
        let x = Jet::variable(0, q);
        let y = Jet::variable(1, p);
        let built = x.mul(&x).mul(&y).add(&x.scale(C64::new(0.0, 1.0)));
        let want = sample(q, p);
        assert!((built.v - want.v).norm() < 1e-14);
        for a in 0..2 {
            assert!((built.d1[a] - want.d1[a]).norm() < 1e-14);
            for b in 0..2 {
                assert!((built.d2[a][b] - want.d2[a][b]).norm() < 1e-14);
                for cc in 0..2 {
                    assert!((built.d3[a][b][cc] - want.d3[a][b][cc]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn partial_beyond_order_is_capability_error() {
        let j = Jet::variable(0, 1.0).with_order(1);
        assert!(j.partial(&[1]).is_ok());
        match j.partial(&[0, 1]) {
            Err(Error::Capability { multi_index, available }) => {
                assert_eq!(multi_index, "(q,p)");
                assert_eq!(available, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn apply_exp_matches_product_rule() {
        // exp(q·p) third derivative along q,q,p: d/dp [p² e^{qp}] = (2p + q p²) e^{qp}
        let (q, p) = (0.4, 0.9);
        let u = Jet::variable(0, q).mul(&Jet::variable(1, p));
        let e = u.v.exp();
        let j = u.apply([e, e, e, e]);
        let want = (2.0 * p + q * p * p) * (q * p).exp();
        assert!((j.d3[0][0][1].re - want).abs() < 1e-13);
        assert!(j.mixed_partial_asymmetry() < 1e-14);
    }

    #[test]
    fn compose_and_invert_round_trip() {
        // M(q, p) = (q + 0.3 p², p + 0.2 q³)
        let z = [0.5, -0.4];
        let id = Jet::identity_map(z);
        let m0 = id[0].add(&id[1].mul(&id[1]).scale(c(0.3)));
        let m1 = id[1].add(&id[0].mul(&id[0]).mul(&id[0]).scale(c(0.2)));
        let m = [m0, m1];
        let inv = invert_map(&m, z).unwrap();
        // inv∘M should be the identity jet at z
        for a in 0..2 {
            let back = inv[a].compose(&m);
            assert!((back.v - c(z[a])).norm() < 1e-14);
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((back.d1[b] - c(want)).norm() < 1e-13);
                for cc in 0..2 {
                    assert!(back.d2[b][cc].norm() < 1e-12);
                    for d in 0..2 {
                        assert!(back.d3[b][cc][d].norm() < 1e-12, "{a}{b}{cc}{d} {}", back.d3[b][cc][d]);
                    }
                }
            }
        }
    }

    #[test]
    fn contraction_of_monomials() {
        // a = q², c = p²: a_qq c_pp = 4
        let z = [0.3, 0.8];
        let id = Jet::identity_map(z);
        let a = id[0].mul(&id[0]);
        let cc = id[1].mul(&id[1]);
        assert!((symplectic_contraction2(&a, &cc) - c(4.0)).norm() < 1e-14);
        // a = c = q p: −2 a_qp c_qp = −2
        let qp = id[0].mul(&id[1]);
        assert!((symplectic_contraction2(&qp, &qp) - c(-2.0)).norm() < 1e-14);
    }
}
