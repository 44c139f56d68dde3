//! The polynomial Q-operator `Q_f(λ)`.
//!
//! On one site it sends `y_i^m` to a degree-`m` form in `x_{i-1}, x_i`
//! ([`qf_monomial_action`]); the kernel factorizes over sites, so a monomial
//! maps to the product of its site images with `x_0 ≡ x_M`. Degree is
//! conserved, which makes every sector `W_l` invariant.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::qkernel::{ensure_finite, phi_standard, qpoch_n, CompensatedSum, QComplex, SeriesSpec};
use crate::sector::{Monomial, OperatorMatrix, SectorBasis};

/// Image of `y_i^m`: `coeffs[k]` multiplies `x_{i-1}^k x_i^{m-k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QfActionRow {
    pub power: usize,
    pub coeffs: Vec<QComplex>,
}

fn one() -> QComplex {
    QComplex::new(1.0, 0.0)
}

/// `(ζ^{-4};q²)_m`, failing where it vanishes (integer `I` with `m > I`).
pub(crate) fn zeta4_poch(params: &ModelParams, m: usize) -> Result<QComplex> {
    if let Some(spin) = params.spin_int {
        if m > spin {
            return Err(Error::Singular(format!(
                "(zeta^-4; q^2)_{m} = 0 for integer I = {spin}: Q_f becomes singular for m > I"
            )));
        }
    }
    let q2 = params.q * params.q;
    let z4 = params.zeta.powi(-4);
    let mut acc = one();
    for t in 0..m {
        let f = one() - z4 * q2.powi(t as i32);
        if f.norm() < 1e-12 {
            return Err(Error::Singular(format!(
                "(zeta^-4; q^2)_{m} vanishes at factor {t}"
            )));
        }
        acc *= f;
    }
    Ok(acc)
}

/// Site coefficients without the `1/(ζ^{-4};q²)_m` normalization; finite for all ζ.
pub(crate) fn qf_row_unnormalized(params: &ModelParams, lambda: QComplex, m: usize) -> Vec<QComplex> {
    let q2 = params.q * params.q;
    let zeta = params.zeta;
    let l2z = lambda * lambda / (zeta * zeta);
    let il2z = (lambda * lambda * zeta * zeta).inv();
    let ratio = params.phi * params.phi / (lambda * lambda);
    let pre = (lambda / zeta).powi(m as i32) * qpoch_n(q2, q2, m);
    (0..=m)
        .map(|k| {
            pre * ratio.powi(k as i32) * qpoch_n(l2z, q2, k) * qpoch_n(il2z, q2, m - k)
                / (qpoch_n(q2, q2, k) * qpoch_n(q2, q2, m - k))
        })
        .collect()
}

/// Action of `Q_f(λ)` (with `λ = params.lambda`) on a single site power `y^m`.
pub fn qf_monomial_action(params: &ModelParams, m: usize) -> Result<QfActionRow> {
    let norm = zeta4_poch(params, m)?;
    let coeffs = qf_row_unnormalized(params, params.lambda, m)
        .into_iter()
        .map(|c| ensure_finite(c / norm, "qf_monomial_action"))
        .collect::<Result<Vec<_>>>()?;
    Ok(QfActionRow { power: m, coeffs })
}

/// Applies per-site rows to a monomial: site `i` sends `k` units to site `i-1` (cyclic).
fn assemble_image(rows: &[Vec<QComplex>], m: &Monomial) -> BTreeMap<Vec<usize>, QComplex> {
    let sites = m.sites();
    let mut poly: BTreeMap<Vec<usize>, QComplex> = BTreeMap::new();
    poly.insert(vec![0; sites], one());
    for i in 0..sites {
        let row = &rows[i];
        let mi = m.0[i];
        let prev = (i + sites - 1) % sites;
        let mut next = BTreeMap::new();
        for (exps, c) in &poly {
            for (k, ck) in row.iter().enumerate() {
                let mut e = exps.clone();
                e[prev] += k;
                e[i] += mi - k;
                *next.entry(e).or_insert_with(QComplex::default) += c * ck;
            }
        }
        poly = next;
    }
    poly
}

fn require_uncapped(basis: &SectorBasis) -> Result<()> {
    if basis.cap().is_some() {
        return Err(Error::Unsupported(
            "Q_f maps outside capped sectors; use the factorized A+ for integer spin".into(),
        ));
    }
    Ok(())
}

fn build_from_rows<F>(basis: Arc<SectorBasis>, mut row_for: F) -> Result<OperatorMatrix>
where
    F: FnMut(usize) -> Result<Vec<QComplex>>,
{
    let lmax = basis.degree();
    let rows: Vec<Vec<QComplex>> = (0..=lmax).map(&mut row_for).collect::<Result<_>>()?;
    let mut out = OperatorMatrix::zeros(basis.clone());
    for (col, m) in basis.members().iter().enumerate() {
        let site_rows: Vec<Vec<QComplex>> = m.0.iter().map(|&e| rows[e].clone()).collect();
        for (exps, c) in assemble_image(&site_rows, m) {
            let row = basis.index_of(&Monomial(exps))?;
            out.entries[(row, col)] += c;
        }
    }
    for z in out.entries.iter() {
        ensure_finite(*z, "build_qf")?;
    }
    Ok(out)
}

/// Sector matrix of `Q_f(λ)` on an uncapped basis.
pub fn build_qf(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<OperatorMatrix> {
    params.validate()?;
    require_uncapped(&basis)?;
    build_from_rows(basis, |m| Ok(qf_monomial_action(params, m)?.coeffs))
}

/// `Q_f(λ)` with its columns multiplied by `∏_k (ζ^{-4};q²)_{j_k}`.
///
/// Finite at integer spin; the removed factors are restored by the rows of
/// [`crate::aplus_operator::aplus_at_zeta_reduced`].
pub fn build_qf_reduced(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<OperatorMatrix> {
    params.validate()?;
    build_from_rows(basis, |m| Ok(qf_row_unnormalized(params, params.lambda, m)))
}

/// Coefficient of `x_{i-1}^n x_i^{m-n-k} x_{i+1}^k` in `Q_f(λ) Q_f(μ) x_{i+1}^m`,
/// via a balanced terminating `₄φ₃`.
pub fn compose_coeff(params: &ModelParams, mu: QComplex, m: usize, n: usize, k: usize) -> Result<QComplex> {
    if n + k > m {
        return Err(Error::InvalidParams(format!("need n + k <= m, got {n} + {k} > {m}")));
    }
    let q = params.q;
    let q2 = q * q;
    let zeta = params.zeta;
    let lam = params.lambda;
    let phi = params.phi;
    let z2 = zeta * zeta;
    let z4 = z2 * z2;
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    let top = m - n - k;

    let mut pre = phi.powi(2 * (mi + ni - ki)) * lam.powi(2 * ki - mi) * mu.powi(mi - 2 * ni)
        * zeta.powi(-2 * mi);
    pre *= qpoch_n((lam * lam * z2).inv(), q2, k)
        * qpoch_n((mu * mu * z2).inv(), q2, m - n)
        * qpoch_n(lam * lam / z2, q2, top);
    pre /= zeta4_poch(params, m)? * zeta4_poch(params, m - n)? * qpoch_n(q2, q2, n) * zeta4_poch(params, n)?;
    pre *= qpoch_n(q2, q2, m) * qpoch_n(lam * lam / z2, q2, n) * qpoch_n(mu * mu / z2, q2, n)
        / (qpoch_n(q2, q2, k) * qpoch_n(q2, q2, top));

    let topi = top as i32;
    let series = SeriesSpec::new(
        vec![
            q.powi(2 + 2 * ni - 2 * mi) * z4,
            (lam * lam * z2).inv(),
            q.powi(2 * ni) * mu * mu / z2,
        ],
        vec![
            q.powi(2 * ni) / z4,
            q.powi(2 - 2 * topi) * z2 / (lam * lam),
            q.powi(2 + 2 * ni - 2 * mi) * mu * mu * z2,
        ],
        top,
        q2,
        q2,
    );
    let phi43 = phi_standard(&series).map_err(|e| match e {
        Error::Pole { param, k } => Error::Singular(format!(
            "4phi3 denominator parameter {param} degenerates at k = {k}"
        )),
        other => other,
    })?;
    ensure_finite(pre * phi43, "compose_coeff")
}

/// Leading coefficient `Q∞ = lim λ^{-l} Q_f(λ)` on an uncapped basis.
///
/// Entry `(i, j)` is `ζ^{-l} ∏_k 1/(ζ^{-4};q²)_{j_k} Σ_{l_1} ∏_k (q^{-2j_k};q²)_{n_k}/(q²;q²)_{n_k} (q^{j_k}φ/ζ)^{2n_k}`
/// with `n_k = l_1 + Σ_{s<k}(i_s - j_s)`.
pub fn build_qinf(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<OperatorMatrix> {
    params.validate()?;
    require_uncapped(&basis)?;
    let q = params.q;
    let q2 = q * q;
    let zeta = params.zeta;
    let phi = params.phi;
    let l = basis.degree();
    let mut out = OperatorMatrix::zeros(basis.clone());
    let mut z4 = vec![one(); l + 1];
    for (j, slot) in z4.iter_mut().enumerate() {
        *slot = zeta4_poch(params, j)?;
    }
    for (r, iv) in basis.members().iter().enumerate() {
        for (c, jv) in basis.members().iter().enumerate() {
            let mut pre = zeta.powi(-(l as i32));
            for &j in &jv.0 {
                pre /= z4[j];
            }
            let mut acc = CompensatedSum::new();
            'l1: for l1 in 0..=jv.0[0] {
                let mut t = one();
                let mut shift: isize = 0;
                for (k, &j) in jv.0.iter().enumerate() {
                    let nk = l1 as isize + shift;
                    if nk < 0 || nk > j as isize {
                        continue 'l1;
                    }
                    let nk = nk as usize;
                    let w = q.powi(j as i32) * phi / zeta;
                    t *= qpoch_n(q2.powi(-(j as i32)), q2, nk) / qpoch_n(q2, q2, nk)
                        * w.powi(2 * nk as i32);
                    shift += iv.0[k] as isize - j as isize;
                }
                acc.add(t);
            }
            out.entries[(r, c)] = ensure_finite(pre * acc.value(), "build_qinf")?;
        }
    }
    Ok(out)
}

/// Coefficientwise check of the generating-function action of `Q_f(λ)`.
///
/// Both sides of
/// `Q_f(λ) ∏_i (ζ^{-2}φ^{-1}μ_i x_i;q²)_∞/(ζ²φ^{-1}μ_i x_i;q²)_∞
///   = ∏_i (λζ^{-1}φμ_i x_{i-1};q²)_∞/(ζλ^{-1}φμ_i x_{i-1};q²)_∞ · ((λζφ)^{-1}μ_i x_i;q²)_∞/(λζφ^{-1}μ_i x_i;q²)_∞`
/// are expanded by the q-binomial theorem as power series in `μ` up to total
/// degree `order`. Each term `coefficient · μ^m` is compared; the result is the
/// largest mismatch divided by the largest term.
pub fn genfun_residual(params: &ModelParams, mu_values: &[QComplex], order: usize) -> Result<f64> {
    params.validate()?;
    let sites = mu_values.len();
    if sites == 0 {
        return Err(Error::InvalidParams("need one mu per site".into()));
    }
    let q2 = params.q * params.q;
    let (zeta, phi, lam) = (params.zeta, params.phi, params.lambda);

    // Left weights: ζ^{2m} φ^{-m} (ζ^{-4};q²)_m/(q²;q²)_m.
    let mut left_rows = Vec::with_capacity(order + 1);
    let mut weights = Vec::with_capacity(order + 1);
    for m in 0..=order {
        left_rows.push(qf_monomial_action(params, m)?.coeffs);
        weights.push(
            zeta.powi(2 * m as i32) * phi.powi(-(m as i32)) * zeta4_poch(params, m)? / qpoch_n(q2, q2, m),
        );
    }
    // Right factors: A_k (μ x_{i-1})^k and B_j (μ x_i)^j.
    let a: Vec<QComplex> = (0..=order)
        .map(|k| {
            qpoch_n(lam * lam / (zeta * zeta), q2, k) / qpoch_n(q2, q2, k) * (zeta * phi / lam).powi(k as i32)
        })
        .collect();
    let b: Vec<QComplex> = (0..=order)
        .map(|j| {
            qpoch_n((lam * lam * zeta * zeta).inv(), q2, j) / qpoch_n(q2, q2, j)
                * (lam * zeta / phi).powi(j as i32)
        })
        .collect();

    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for total in 0..=order {
        let basis = crate::sector::enumerate_basis(sites, total, None)?;
        for mvec in basis.members() {
            let mut mu_pow = one();
            for (i, &e) in mvec.0.iter().enumerate() {
                mu_pow *= mu_values[i].powi(e as i32);
            }
            let mut w = one();
            for &e in &mvec.0 {
                w *= weights[e];
            }
            let site_rows: Vec<Vec<QComplex>> = mvec.0.iter().map(|&e| left_rows[e].clone()).collect();
            let lhs: BTreeMap<Vec<usize>, QComplex> = assemble_image(&site_rows, mvec)
                .into_iter()
                .map(|(e, c)| (e, c * w))
                .collect();
            let rhs_rows: Vec<Vec<QComplex>> = mvec
                .0
                .iter()
                .map(|&e| (0..=e).map(|k| a[k] * b[e - k]).collect())
                .collect();
            let rhs = assemble_image(&rhs_rows, mvec);
            let keys: std::collections::BTreeSet<&Vec<usize>> = lhs.keys().chain(rhs.keys()).collect();
            for key in keys {
                let l = lhs.get(key).copied().unwrap_or_default() * mu_pow;
                let r = rhs.get(key).copied().unwrap_or_default() * mu_pow;
                worst = worst.max((l - r).norm());
                scale = scale.max(l.norm()).max(r.norm());
            }
        }
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(worst / scale)
}
