//! The sector blocks `T^{(l)}(λ;φ)` of the periodic transfer matrix.
//!
//! [`build_transfer`] multiplies the local L-operators in the 2-dimensional
//! auxiliary space and takes the trace. [`apply_transfer_qdiff`] realises the
//! same operator as a q-difference operator on polynomials through the
//! shift/multiplication operators `𝒳`, `𝒟`; it is coded separately and serves
//! as the oracle for the matrix builder.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::qkernel::{ensure_finite, QComplex};
use crate::sector::{Monomial, OperatorMatrix, SectorBasis};

/// Matrix elements of the local L-operator on the site vector `v_i`.
///
/// `l11`, `l22` keep `v_i`; `l12` sends it to `v_{i+1}`; `l21` to `v_{i-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalL {
    pub l11: QComplex,
    pub l12: QComplex,
    pub l21: QComplex,
    pub l22: QComplex,
}

impl LocalL {
    /// Entry `(a, b)` of the auxiliary 2×2 matrix with its exponent shift.
    fn entry(&self, a: usize, b: usize) -> (QComplex, isize) {
        match (a, b) {
            (0, 0) => (self.l11, 0),
            (0, 1) => (self.l12, 1),
            (1, 0) => (self.l21, -1),
            _ => (self.l22, 0),
        }
    }
}

#[allow(non_snake_case)]
pub fn local_L(params: &ModelParams, i: usize) -> LocalL {
    let ModelParams {
        q, zeta, phi, lambda, ..
    } = *params;
    let qi = q.powi(i as i32);
    let qmi = qi.inv();
    let phinv = phi.inv();
    LocalL {
        l11: phinv * (lambda * zeta * qmi - (lambda * zeta).inv() * qi),
        l12: phinv * (zeta * zeta * qmi - (zeta * zeta).inv() * qi),
        // q^0 - q^0 is an exact zero, so v_0 is annihilated structurally.
        l21: phi * (qi - qmi),
        l22: phi * (lambda / zeta * qi - zeta / lambda * qmi),
    }
}

pub(crate) fn check_basis(params: &ModelParams, basis: &SectorBasis) -> Result<()> {
    match (params.spin_int, basis.cap()) {
        (_, None) => Ok(()),
        (Some(spin), Some(cap)) if spin == cap => Ok(()),
        (spin, cap) => Err(Error::InvalidParams(format!(
            "basis cap {cap:?} is inconsistent with spin {spin:?}"
        ))),
    }
}

type Partial = BTreeMap<Vec<usize>, QComplex>;

/// Builds `T^{(l)}` and reports the largest coefficient that left a capped basis.
///
/// The 2×2 auxiliary matrix of partial images is accumulated site by site,
/// left to right; the trace sums its two diagonal entries.
pub fn transfer_with_leak(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
) -> Result<(OperatorMatrix, f64)> {
    params.validate()?;
    check_basis(params, &basis)?;
    let sites = basis.sites();
    let cap = basis.max_exponent();
    let locals: Vec<LocalL> = (0..=cap).map(|i| local_L(params, i)).collect();
    let mut out = OperatorMatrix::zeros(basis.clone());
    let mut leak = 0.0f64;

    for (col, m) in basis.members().iter().enumerate() {
        // acc[a][b]: partial images from auxiliary state a to b over sites seen so far.
        let mut acc: [[Partial; 2]; 2] = Default::default();
        acc[0][0].insert(Vec::new(), QComplex::new(1.0, 0.0));
        acc[1][1].insert(Vec::new(), QComplex::new(1.0, 0.0));
        for site in 0..sites {
            let i = m.0[site];
            let l = &locals[i];
            let mut next: [[Partial; 2]; 2] = Default::default();
            for a in 0..2 {
                for b in 0..2 {
                    for (prefix, coef) in &acc[a][b] {
                        for c in 0..2 {
                            let (v, shift) = l.entry(b, c);
                            if v.norm() == 0.0 {
                                continue;
                            }
                            let e = i as isize + shift;
                            if e < 0 {
                                continue;
                            }
                            let mut p = prefix.clone();
                            p.push(e as usize);
                            *next[a][c].entry(p).or_default() += coef * v;
                        }
                    }
                }
            }
            acc = next;
        }
        for a in 0..2 {
            for (exps, coef) in &acc[a][a] {
                let mono = Monomial(exps.clone());
                match basis.position(&mono) {
                    Some(row) => out.entries[(row, col)] += coef,
                    None => {
                        debug_assert_eq!(mono.degree(), basis.degree());
                        leak = leak.max(coef.norm());
                    }
                }
            }
        }
    }
    for z in out.entries.iter() {
        ensure_finite(*z, "build_transfer")?;
    }
    Ok((out, leak))
}

/// Sector block of the transfer matrix.
///
/// On a capped basis, components leaving the cap are dropped after checking that
/// they vanish (they carry the factor `ζ²q^{-I} - ζ^{-2}q^{I} = 0`).
pub fn build_transfer(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<OperatorMatrix> {
    let (t, leak) = transfer_with_leak(params, basis)?;
    let scale = t.max_norm().max(1.0);
    if leak > 1e-12 * scale {
        return Err(Error::Singular(format!(
            "transfer matrix leaks {leak:e} out of the capped sector"
        )));
    }
    Ok(t)
}

type Poly = BTreeMap<Monomial, QComplex>;

fn scale_poly(p: &Poly, s: QComplex) -> Poly {
    p.iter().map(|(m, c)| (m.clone(), c * s)).collect()
}

fn add_into(acc: &mut Poly, p: Poly) {
    for (m, c) in p {
        *acc.entry(m).or_default() += c;
    }
}

/// `𝒟_k^{±1}`: `x_k -> q^{±1} x_k`.
fn shift_d(p: &Poly, site: usize, q: QComplex, power: i32) -> Poly {
    p.iter()
        .map(|(m, c)| (m.clone(), c * q.powi(power * m.0[site] as i32)))
        .collect()
}

/// `𝒳_k`: multiplication by `x_k`.
fn mul_x(p: &Poly, site: usize) -> Poly {
    p.iter()
        .map(|(m, c)| {
            let mut e = m.0.clone();
            e[site] += 1;
            (Monomial(e), *c)
        })
        .collect()
}

/// `𝒳_k^{-1}`, defined on polynomials whose `x_k^0` part vanishes exactly.
fn div_x(p: &Poly, site: usize) -> Poly {
    p.iter()
        .filter(|(m, c)| m.0[site] > 0 || c.norm() != 0.0)
        .map(|(m, c)| {
            assert!(m.0[site] > 0, "x_k^{{-1}} applied to a constant term");
            let mut e = m.0.clone();
            e[site] -= 1;
            (Monomial(e), *c)
        })
        .collect()
}

/// `α 𝒟^{-1} + β 𝒟` on one site.
fn d_combo(p: &Poly, site: usize, q: QComplex, alpha: QComplex, beta: QComplex) -> Poly {
    let mut r = scale_poly(&shift_d(p, site, q, -1), alpha);
    add_into(&mut r, scale_poly(&shift_d(p, site, q, 1), beta));
    r
}

/// Entry `(a, b)` of the polynomial-representation L-operator on `site`:
///
/// ```text
/// L = ( φ⁻¹[λζ𝒟⁻¹]      φ⁻¹𝒳[ζ²𝒟⁻¹] )
///     ( φ𝒳⁻¹[𝒟]         φ[λζ⁻¹𝒟]    )
/// ```
fn poly_l(params: &ModelParams, a: usize, b: usize, site: usize, p: &Poly) -> Poly {
    let ModelParams {
        q, zeta, phi, lambda, ..
    } = *params;
    let phinv = phi.inv();
    let one = QComplex::new(1.0, 0.0);
    match (a, b) {
        (0, 0) => scale_poly(
            &d_combo(p, site, q, lambda * zeta, -(lambda * zeta).inv()),
            phinv,
        ),
        (0, 1) => scale_poly(
            &mul_x(&d_combo(p, site, q, zeta * zeta, -(zeta * zeta).inv()), site),
            phinv,
        ),
        (1, 0) => {
            let mut inner = d_combo(p, site, q, -one, one);
            // [𝒟] x^0 = q^0 - q^0 is an exact zero; drop it before dividing.
            inner.retain(|m, c| m.0[site] > 0 || c.norm() != 0.0);
            scale_poly(&div_x(&inner, site), phi)
        }
        _ => scale_poly(
            &d_combo(p, site, q, -zeta / lambda, lambda / zeta),
            phi,
        ),
    }
}

/// Image of one monomial under the transfer matrix, computed as the trace of the
/// product of polynomial L-operators acting as q-difference operators.
pub fn apply_transfer_qdiff(params: &ModelParams, m: &Monomial) -> BTreeMap<Monomial, QComplex> {
    let sites = m.sites();
    let mut total = Poly::new();
    for code in 0..(1usize << sites) {
        let aux: Vec<usize> = (0..sites).map(|k| (code >> k) & 1).collect();
        let mut p = Poly::new();
        p.insert(m.clone(), QComplex::new(1.0, 0.0));
        for site in 0..sites {
            let a = aux[site];
            let b = aux[(site + 1) % sites];
            p = poly_l(params, a, b, site, &p);
            if p.is_empty() {
                break;
            }
        }
        add_into(&mut total, p);
    }
    total.retain(|_, c| c.norm() != 0.0);
    total
}
