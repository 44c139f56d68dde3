//! The Q-operators `A₊` (any spin) and `A₋` (integer spin).
//!
//! Both are transfer matrices whose auxiliary space is a q-oscillator Fock
//! space. The trace over the Fock index converges only for part of the
//! `φ`-plane, and the two regions are complementary:
//!
//! * `A₊` needs `|φ^{-2M} q^{IM-2l}| < 1`,
//! * `A₋` needs `|φ^{2M} q^{2l-IM}| < 1`.
//!
//! Outside its region an operator is reached through its closed forms: the
//! factorization `A₊(λ) = A₊(ζ) Q_f(λ)` and, for `A₋`, the mirror relation
//! `A₋^{(l)}(λ; φ) = -φ^{2M} q^{2l-IM} · P A₊^{(IM-l)}(λ; φ^{-1}) P` with
//! `P: i_k ↦ I - i_k`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::qf_operator::{build_qf, build_qf_reduced};
use crate::qkernel::{ensure_finite, phi_regularized, qpoch_n, qpoch_signed, CompensatedSum, QComplex, SeriesSpec};
use crate::sector::{enumerate_basis, OperatorMatrix, SectorBasis};
use crate::transfer::check_basis;

/// Cutoffs for the adaptive Fock-space summation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TruncationPolicy {
    pub n_min: usize,
    pub n_max: usize,
    pub tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            n_min: 8,
            n_max: 512,
            tol: 1e-14,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::InvalidParams(format!(
                "truncation needs 0 < n_min <= n_max, got {} and {}",
                self.n_min, self.n_max
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParams(format!("truncation tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// A truncated Fock trace.
///
/// `tail_bound` estimates the neglected tail relative to `matrix.max_norm()`.
#[derive(Debug, Clone)]
pub struct FockTraceResult {
    pub matrix: OperatorMatrix,
    pub tail_bound: f64,
    pub terms_used: usize,
}

fn one() -> QComplex {
    QComplex::new(1.0, 0.0)
}

fn sign(e: usize) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Per-step weight `g` with `[A₊]_{n,i}^{n',i'} = g^n · (n-bounded part)`.
fn aplus_site_ratio(q: QComplex, zeta: QComplex, phi: QComplex, i: usize, ip: usize) -> QComplex {
    zeta * zeta / (phi * phi) * q.powi(-((i + ip) as i32))
}

/// `A₊` element with the factor `g^n` removed; bounded as `n → ∞`.
fn aplus_element_scaled(
    q: QComplex,
    zeta: QComplex,
    lambda: QComplex,
    n: usize,
    i: usize,
    np: usize,
    ip: usize,
) -> Result<QComplex> {
    if i + np != ip + n {
        return Ok(QComplex::default());
    }
    let q2 = q * q;
    let (ii, ipi) = (i as i32, ip as i32);
    let e = (ii * (ii + 1) - ipi * (ipi + 1)) / 2 + ii * ipi;
    let pre = sign(i + ip) * lambda.powi(-ii) * q.powi(e) * zeta.powi(2 * ii) * qpoch_n(q2, q2, np)
        / (qpoch_n(q2, q2, n) * qpoch_n(q2, q2, i));
    let series = SeriesSpec::new(
        vec![q2.powi(-ipi), lambda * lambda / (zeta * zeta)],
        vec![zeta.powi(-4), q.powi(2 * (1 + n as i32 - ii))],
        i,
        q2,
        q2,
    );
    Ok(pre * phi_regularized(&series)?)
}

/// Matrix element `[A₊]_{n,i}^{n',i'}` of the oscillator L-operator of `A₊`.
///
/// Zero unless `i + n' = i' + n`. Polynomial in `ζ²`, so defined for every spin.
#[allow(non_snake_case)]
pub fn aplus_L_element(params: &ModelParams, n: usize, i: usize, nprime: usize, iprime: usize) -> Result<QComplex> {
    let (q, z, phi) = (params.q, params.zeta, params.phi);
    let s = aplus_element_scaled(q, z, params.lambda, n, i, nprime, iprime)?;
    ensure_finite(s * aplus_site_ratio(q, z, phi, i, iprime).powi(n as i32), "aplus_L_element")
}

fn require_integer(params: &ModelParams, what: &str) -> Result<usize> {
    params.spin_int.ok_or_else(|| {
        Error::Unsupported(format!("{what} is only constructed for integer spin I"))
    })
}

/// Matrix element `[A₋]_{n,i}^{n',i'} = [A₊]_{n,I-i}^{n',I-i'}|_{φ→φ^{-1}}`.
#[allow(non_snake_case)]
pub fn aminus_L_element(params: &ModelParams, n: usize, i: usize, nprime: usize, iprime: usize) -> Result<QComplex> {
    let spin = require_integer(params, "A-")?;
    if i > spin || iprime > spin {
        return Err(Error::InvalidParams(format!("A- indices must not exceed I = {spin}")));
    }
    aplus_L_element(&params.with_phi(params.phi.inv()), n, spin - i, nprime, spin - iprime)
}

/// `A₋` element from its own closed form, independent of the `A₊` formula.
#[allow(non_snake_case)]
pub fn aminus_L_element_direct(
    params: &ModelParams,
    n: usize,
    i: usize,
    nprime: usize,
    iprime: usize,
) -> Result<QComplex> {
    let spin = require_integer(params, "A-")?;
    if i > spin || iprime > spin {
        return Err(Error::InvalidParams(format!("A- indices must not exceed I = {spin}")));
    }
    if i + n != iprime + nprime {
        return Ok(QComplex::default());
    }
    let (q, lam, phi) = (params.q, params.lambda, params.phi);
    let q2 = q * q;
    let (ii, ipi, ni, si) = (i as i32, iprime as i32, n as i32, spin as i32);
    let e = (-ii * (ii - 1) + ipi * (ipi - 1)) / 2 + ii * (si + ipi) + ni * (si - ii - ipi);
    let poch = qpoch_signed(lam * lam * q.powi(-si + 2 * (ipi - ni)), q2, (si - ii - ipi) as i64)?;
    let pre = phi.powi(2 * ni) * lam.powi(ii - si) * q.powi(e) * poch / qpoch_n(q2, q2, i);
    let series = SeriesSpec::new(
        vec![q2.powi(-ipi), lam * lam * q.powi(-si)],
        vec![q2.powi(-si), q.powi(2 * (1 + ni - ipi))],
        i,
        q2,
        q2,
    );
    ensure_finite(pre * phi_regularized(&series)?, "aminus_L_element_direct")
}

/// Normalization `1 - φ^{2M} q^{2l-IM}` of both Fock traces.
pub fn trace_normalization(params: &ModelParams, sites: usize, degree: usize) -> QComplex {
    let m = sites as i32;
    one() - params.phi.powi(2 * m) * params.q.powi(2 * degree as i32) * params.zeta.powi(-2 * m)
}

/// Limit of `λ^{-l} A₊(λ)`: `(-1)^{l+1} φ^{2M} q^{l-IM}` times the identity.
pub fn aplus_asymptotic_constant(params: &ModelParams, sites: usize, degree: usize) -> QComplex {
    let m = sites as i32;
    -sign(degree) * params.phi.powi(2 * m) * params.q.powi(degree as i32) * params.zeta.powi(-2 * m)
}

/// Limit of `λ^{-(IM-l)} A₋(λ)`: `(-1)^{IM-l} q^{l-IM}` times the identity.
pub fn aminus_asymptotic_constant(params: &ModelParams, sites: usize, degree: usize) -> Result<QComplex> {
    let spin = require_integer(params, "A-")?;
    let total = spin * sites;
    if degree > total {
        return Err(Error::InvalidParams(format!("degree {degree} exceeds I·M = {total}")));
    }
    Ok(sign(total - degree) * params.q.powi(degree as i32 - total as i32))
}

/// One oscillator chain of the trace: scaled site elements and their per-step weights.
struct Chain<'a> {
    /// `n_{k+1} = n_k + dir·(in_k − out_k)`.
    dir: isize,
    ratio: &'a dyn Fn(usize, usize) -> QComplex,
    element: &'a dyn Fn(usize, usize, usize, usize) -> Result<QComplex>,
}

struct EntryPlan {
    row: usize,
    col: usize,
    offsets: Vec<usize>,
    weight: QComplex,
}

fn fock_trace(
    basis: Arc<SectorBasis>,
    policy: &TruncationPolicy,
    norm: QComplex,
    chain: Chain<'_>,
) -> Result<FockTraceResult> {
    policy.validate()?;
    let sites = basis.sites();
    let dim = basis.len();
    let members = basis.members();

    // Per entry: smallest admissible n_1, Fock offsets n_k - n_1, and ∏ g_k^{δ_k}.
    let mut plans = Vec::new();
    let mut step = one();
    for (row, out) in members.iter().enumerate() {
        for (col, inp) in members.iter().enumerate() {
            let mut delta = vec![0isize; sites + 1];
            for k in 0..sites {
                delta[k + 1] = delta[k] + chain.dir * (inp.0[k] as isize - out.0[k] as isize);
            }
            debug_assert_eq!(delta[sites], 0);
            let lowest = *delta.iter().min().unwrap_or(&0);
            let start = (-lowest).max(0) as usize;
            let mut weight = one();
            let mut g_all = one();
            for k in 0..sites {
                let g = (chain.ratio)(out.0[k], inp.0[k]);
                weight *= g.powi((delta[k] + start as isize) as i32);
                g_all *= g;
            }
            step = g_all;
            let offsets = delta.iter().map(|d| (d + start as isize) as usize).collect();
            plans.push(EntryPlan { row, col, offsets, weight });
        }
    }

    let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::new(); dim * dim];
    let mut last_max = f64::NAN;
    let mut ratios: Vec<f64> = Vec::new();
    let mut small_run = 0usize;
    let mut growth_run = 0usize;
    let mut step_pow = one();
    for n in 0..policy.n_max {
        let mut term_max = 0.0f64;
        for p in &plans {
            // Term index n counts Fock steps above the entry's lowest occupation.
            let mut t = p.weight * step_pow;
            for k in 0..sites {
                let (nk, nk1) = (n + p.offsets[k], n + p.offsets[k + 1]);
                t *= (chain.element)(nk, members[p.row].0[k], nk1, members[p.col].0[k])?;
            }
            if !(t.re.is_finite() && t.im.is_finite()) {
                return Err(Error::Divergence { terms: n + 1, ratio: f64::INFINITY });
            }
            term_max = term_max.max(t.norm());
            acc[p.row * dim + p.col].add(t);
        }
        step_pow *= step;
        let acc_max = acc.iter().fold(0.0f64, |m, s| m.max(s.value().norm()));
        if last_max > 0.0 {
            let r = term_max / last_max;
            ratios.push(r);
            growth_run = if r > 1.0 { growth_run + 1 } else { 0 };
        }
        last_max = term_max;
        if n + 1 < policy.n_min {
            continue;
        }
        if growth_run >= 8 {
            return Err(Error::Divergence { terms: n + 1, ratio: *ratios.last().unwrap_or(&f64::NAN) });
        }
        small_run = if term_max <= policy.tol * acc_max { small_run + 1 } else { 0 };
        if small_run >= 3 {
            let rho = ratios.iter().rev().take(3).fold(0.0f64, |m, r| m.max(*r));
            let tail = if term_max == 0.0 {
                0.0
            } else if rho < 1.0 {
                term_max * rho / (1.0 - rho) / acc_max
            } else {
                f64::INFINITY
            };
            if tail < policy.tol {
                let entries = nalgebra::DMatrix::from_fn(dim, dim, |r, c| acc[r * dim + c].value() * norm);
                let matrix = OperatorMatrix::from_entries(basis.clone(), entries);
                for z in matrix.entries.iter() {
                    ensure_finite(*z, "fock_trace")?;
                }
                return Ok(FockTraceResult {
                    matrix,
                    tail_bound: tail,
                    terms_used: n + 1,
                });
            }
        }
    }
    Err(Error::Divergence {
        terms: policy.n_max,
        ratio: *ratios.last().unwrap_or(&f64::NAN),
    })
}

/// `A₊(λ)` on a sector by the truncated Fock-space trace.
pub fn build_aplus_trace(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    policy: &TruncationPolicy,
) -> Result<FockTraceResult> {
    params.validate()?;
    check_basis(params, &basis)?;
    let (q, z, phi, lam) = (params.q, params.zeta, params.phi, params.lambda);
    let ratio = |i: usize, ip: usize| aplus_site_ratio(q, z, phi, i, ip);
    let element = |n, i, np, ip| aplus_element_scaled(q, z, lam, n, i, np, ip);
    let norm = trace_normalization(params, basis.sites(), basis.degree());
    fock_trace(basis, policy, norm, Chain { dir: 1, ratio: &ratio, element: &element })
}

/// `A₋(λ)` on a capped sector by the truncated Fock-space trace (integer spin only).
pub fn build_aminus(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    policy: &TruncationPolicy,
) -> Result<FockTraceResult> {
    params.validate()?;
    let spin = require_integer(params, "A-")?;
    if basis.cap() != Some(spin) {
        return Err(Error::InvalidParams(format!("A- lives on the sector capped at I = {spin}")));
    }
    let (q, z, lam) = (params.q, params.zeta, params.lambda);
    let phi_inv = params.phi.inv();
    let ratio = |i: usize, ip: usize| aplus_site_ratio(q, z, phi_inv, spin - i, spin - ip);
    let element = |n, i: usize, np, ip: usize| aplus_element_scaled(q, z, lam, n, spin - i, np, spin - ip);
    let norm = trace_normalization(params, basis.sites(), basis.degree());
    fock_trace(basis, policy, norm, Chain { dir: -1, ratio: &ratio, element: &element })
}

/// Power-series product `a · b`.
fn poly_mul(a: &[QComplex], b: &[QComplex]) -> Vec<QComplex> {
    let mut out = vec![QComplex::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn aplus_at_zeta_impl(params: &ModelParams, basis: &Arc<SectorBasis>, row_factors: bool) -> Result<OperatorMatrix> {
    let (q, z, phi) = (params.q, params.zeta, params.phi);
    let q2 = q * q;
    let sites = basis.sites();
    let l = basis.degree();
    let m = sites as i32;
    let x = phi.powi(2 * m) * z.powi(-2 * m);
    let norm = trace_normalization(params, sites, l);

    // Denominator factors 1 - x q^{2s}; s = l is cancelled by the normalization.
    for s in 0..l {
        let f = one() - x * q2.powi(s as i32);
        if f.norm() < 1e-12 {
            return Err(Error::Singular(format!(
                "A+(zeta) has a pole: phi^(2M) zeta^(-2M) q^(2s) = 1 at resonant s = {s}"
            )));
        }
    }

    let mut out = OperatorMatrix::zeros(basis.clone());
    for (r, iv) in basis.members().iter().enumerate() {
        for (c, jv) in basis.members().iter().enumerate() {
            let (i, ip) = (&iv.0, &jv.0);
            let mut pre = -sign(l) * q.powi(l as i32) * z.powi(l as i32);
            for k in 0..sites {
                if row_factors {
                    pre *= qpoch_n(z.powi(-4), q2, i[k]);
                }
                let e = 2 + 2 * (k as i32 + 1) * (ip[k] as i32 - i[k] as i32);
                pre *= (phi / z).powi(e) / qpoch_n(q2, q2, i[k]);
            }
            // Taylor coefficients in the auxiliary variable.
            let mut poly = vec![one()];
            let mut shift = 0i32;
            for s in 1..sites {
                shift += i[s - 1] as i32 - ip[s - 1] as i32;
                let c0 = q.powi(2 + 2 * shift);
                for t in 0..i[s] {
                    poly = poly_mul(&poly, &[one(), -c0 * q2.powi(t as i32)]);
                }
            }
            let i0 = i[0];
            let mut sum = CompensatedSum::new();
            for s in 0..=(l - i0) {
                let Some(&coef) = poly.get(s) else { break };
                let mut den = one();
                for t in 0..=i0 {
                    if s + t != l {
                        den *= one() - x * q2.powi((s + t) as i32);
                    }
                }
                let num = if s == l - i0 { one() } else { norm };
                sum.add(qpoch_n(q2, q2, i0) * num / den * coef);
            }
            out.entries[(r, c)] = ensure_finite(pre * sum.value(), "aplus_at_zeta")?;
        }
    }
    Ok(out)
}

/// Closed-form `A₊(ζ)` on a sector.
pub fn aplus_at_zeta(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<OperatorMatrix> {
    params.validate()?;
    check_basis(params, &basis)?;
    aplus_at_zeta_impl(params, &basis, true)
}

/// `A₊(ζ)` with its rows divided by `∏_k (ζ^{-4};q²)_{i_k}`; pairs with
/// [`build_qf_reduced`] so that the product is free of `0/0` at integer spin.
pub fn aplus_at_zeta_reduced(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<OperatorMatrix> {
    params.validate()?;
    aplus_at_zeta_impl(params, &basis, false)
}

/// `A₊(λ) = A₊(ζ) Q_f(λ)`.
///
/// At integer spin the product is taken as `Q̃_f(λ) Ã₊(ζ)` over the uncapped
/// sector, where the vanishing and divergent `(ζ^{-4};q²)` factors have been
/// removed from both operands, and the capped block is returned.
pub fn build_aplus_factorized(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<OperatorMatrix> {
    params.validate()?;
    check_basis(params, &basis)?;
    match params.spin_int {
        None => {
            let a = aplus_at_zeta(params, basis.clone())?;
            let qf = build_qf(params, basis)?;
            Ok(a.matmul(&qf))
        }
        Some(_) => {
            let full = Arc::new(enumerate_basis(basis.sites(), basis.degree(), None)?);
            let qf = build_qf_reduced(params, full.clone())?;
            let a = aplus_at_zeta_reduced(params, full)?;
            let product = qf.matmul(&a);
            if product.entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::Singular(
                    "integer-spin factorization left an uncancelled singular factor".into(),
                ));
            }
            product.restrict(basis)
        }
    }
}

/// `A₋(λ)` from the mirror relation with `A₊` at `φ^{-1}` in the complementary sector.
pub fn build_aminus_mirror(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<OperatorMatrix> {
    params.validate()?;
    let spin = require_integer(params, "A-")?;
    if basis.cap() != Some(spin) {
        return Err(Error::InvalidParams(format!("A- lives on the sector capped at I = {spin}")));
    }
    let sites = basis.sites();
    let l = basis.degree();
    let mirror = Arc::new(enumerate_basis(sites, spin * sites - l, Some(spin))?);
    let a = build_aplus_factorized(&params.with_phi(params.phi.inv()), mirror.clone())?;
    let m = sites as i32;
    let scale = -params.phi.powi(2 * m) * params.q.powi(2 * l as i32) * params.zeta.powi(-2 * m);
    let pos = basis
        .members()
        .iter()
        .map(|mono| mirror.index_of(&mono.mirrored(spin)))
        .collect::<Result<Vec<_>>>()?;
    let n = basis.len();
    let entries = nalgebra::DMatrix::from_fn(n, n, |r, c| a.entries[(pos[r], pos[c])] * scale);
    Ok(OperatorMatrix::from_entries(basis, entries))
}
