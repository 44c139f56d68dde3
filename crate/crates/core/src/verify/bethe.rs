//! Bethe roots from the eigenvalues of `A±`.
//!
//! `A±` commute with `T`, so eigenvectors of `T` at one reference point
//! diagonalize `A±(λ)` for every `λ`, and eigenvalues follow from Rayleigh
//! quotients. `λ^d 𝒜(λ)` is a polynomial of degree `2d` in `λ` (even, so its
//! roots come in `±` pairs); it is interpolated on a circle and its zeros
//! are the eigenvalues of the companion matrix.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{build_operator, Construction, OperatorChoice};
use crate::aplus_operator::TruncationPolicy;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::qkernel::{bracket, QComplex};
use crate::sector::SectorBasis;
use crate::transfer::build_transfer;

/// Relative gap below which two `T` eigenvalues count as degenerate.
const DEGENERACY_GAP: f64 = 1e-6;
/// Roots beyond this magnitude are artefacts of a tiny leading coefficient.
const SPURIOUS_ROOT: f64 = 1e8;

/// Roots attached to one eigenvalue of `T(λ_ref)`.
#[derive(Debug, Clone, Serialize)]
pub struct EigenRoots {
    pub index: usize,
    pub operator: String,
    pub t_eigenvalue: QComplex,
    /// Coefficients of `λ^d 𝒜(λ)`, constant term first.
    pub coefficients: Vec<QComplex>,
    pub roots: Vec<QComplex>,
    /// Normalized `|φ^{±M}[λ/ζ]^M 𝒜(qλ) + φ^{∓M}[λζ]^M 𝒜(λ/q)|` at each root.
    pub residuals: Vec<f64>,
    pub discarded: Vec<QComplex>,
    /// Number of `±` root pairs; the count of Bethe roots in the `λ²` variable.
    pub pairs: usize,
    pub unpaired: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheRootReport {
    pub sector: usize,
    pub sites: usize,
    pub lambda_ref: QComplex,
    pub eigen: Vec<EigenRoots>,
    pub warnings: Vec<String>,
}

impl BetheRootReport {
    pub fn max_residual(&self) -> f64 {
        self.eigen
            .iter()
            .flat_map(|e| e.residuals.iter().copied())
            .fold(0.0f64, f64::max)
    }
}

fn eigenvalues(m: &DMatrix<QComplex>) -> Result<Vec<QComplex>> {
    let schur = m
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or_else(|| Error::Linalg("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

/// Right singular vector of `m - e·1` for its smallest singular value.
fn null_vector(m: &DMatrix<QComplex>, e: QComplex) -> Result<DVector<QComplex>> {
    let n = m.nrows();
    let shifted = m - DMatrix::<QComplex>::identity(n, n) * e;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Linalg("SVD without right singular vectors".into()))?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, s)| if *s < best.1 { (k, *s) } else { best });
    Ok(v_t.row(k).adjoint())
}

fn rayleigh(m: &DMatrix<QComplex>, v: &DVector<QComplex>) -> QComplex {
    let mv = m * v;
    v.dotc(&mv) / v.dotc(v)
}

/// Circle radius for the interpolation nodes, kept away from `|ζ|`, `|ζ|^{-1}` and 1.
fn node_radius(params: &ModelParams) -> f64 {
    let avoid = [params.zeta.norm().ln(), -params.zeta.norm().ln(), 0.0];
    [0.55f64, 0.7, 1.45, 1.8, 2.4]
        .into_iter()
        .map(|r| (r, avoid.iter().fold(f64::INFINITY, |m, a| m.min((r.ln() - a).abs()))))
        .fold((1.45, -1.0), |best, (r, d)| if d > best.1 { (r, d) } else { best })
        .0
}

#[cfg(test)]
fn poly_eval(coeffs: &[QComplex], x: QComplex) -> QComplex {
    coeffs.iter().rev().fold(QComplex::default(), |acc, c| acc * x + c)
}

/// Roots of `Σ c_k x^k` from the eigenvalues of its companion matrix.
fn poly_roots(coeffs: &[QComplex]) -> Result<Vec<QComplex>> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    if lead.norm() == 0.0 {
        return Err(Error::Linalg("interpolated polynomial has a zero leading coefficient".into()));
    }
    let mut comp = DMatrix::<QComplex>::zeros(deg, deg);
    for k in 1..deg {
        comp[(k, k - 1)] = QComplex::new(1.0, 0.0);
    }
    for k in 0..deg {
        comp[(k, deg - 1)] = -coeffs[k] / lead;
    }
    eigenvalues(&comp)
}

/// Knobs of the root extraction.
#[derive(Debug, Clone, Default)]
pub struct BetheOptions {
    /// Order in which the interpolation nodes are sampled (a permutation of
    /// `0..2d+1`, reduced modulo the node count); natural order if `None`.
    pub node_order: Option<Vec<usize>>,
}

/// Extracts Bethe roots for every `T` eigenvalue on a sector.
///
/// `A₊` is always analysed; `A₋` as well at integer spin. Both come from
/// their closed forms, which are valid for any field `φ`.
pub fn bethe_roots(params: &ModelParams, basis: Arc<SectorBasis>, lambda_ref: QComplex) -> Result<BetheRootReport> {
    bethe_roots_with(params, basis, lambda_ref, &BetheOptions::default())
}

/// [`bethe_roots`] with explicit options.
pub fn bethe_roots_with(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    lambda_ref: QComplex,
    options: &BetheOptions,
) -> Result<BetheRootReport> {
    params.validate()?;
    let sites = basis.sites();
    let l = basis.degree();
    let mut report = BetheRootReport {
        sector: l,
        sites,
        lambda_ref,
        eigen: Vec::new(),
        warnings: Vec::new(),
    };
    let t = build_transfer(&params.with_lambda(lambda_ref), basis.clone())?;
    let evals = eigenvalues(&t.entries)?;
    let scale = evals.iter().fold(0.0f64, |m, e| m.max(e.norm())).max(f64::MIN_POSITIVE);
    for a in 0..evals.len() {
        for b in a + 1..evals.len() {
            if (evals[a] - evals[b]).norm() < DEGENERACY_GAP * scale {
                report.warnings.push(format!(
                    "sector {l}: T({lambda_ref}) has near-degenerate eigenvalues {a} and {b}; roots left unmatched"
                ));
                return Ok(report);
            }
        }
    }
    let vectors = evals
        .iter()
        .map(|e| null_vector(&t.entries, *e))
        .collect::<Result<Vec<_>>>()?;

    let mut operators = vec![(OperatorChoice::Aplus, l)];
    if let Some(spin) = params.spin_int {
        operators.push((OperatorChoice::Aminus, spin * sites - l));
    }
    let policy = TruncationPolicy::default();
    let (q, z, phi) = (params.q, params.zeta, params.phi);
    let m = sites as i32;
    let radius = node_radius(params);

    for (choice, d) in operators {
        let nodes = 2 * d + 1;
        let build = |lam: QComplex| {
            build_operator(&params.with_lambda(lam), basis.clone(), choice, Construction::Analytic, &policy)
                .map(|b| b.matrix.entries)
        };
        // Samples of λ^d 𝒜(λ) on the circle, in the scaled variable w = λ/r.
        let mut samples = vec![vec![QComplex::default(); nodes]; evals.len()];
        let mut vander = DMatrix::<QComplex>::zeros(nodes, nodes);
        let order: Vec<usize> = match &options.node_order {
            Some(o) => {
                let mut v: Vec<usize> = Vec::with_capacity(nodes);
                for j in o.iter().map(|j| j % nodes).chain(0..nodes) {
                    if !v.contains(&j) {
                        v.push(j);
                    }
                }
                v
            }
            None => (0..nodes).collect(),
        };
        for (row, &j) in order.iter().enumerate() {
            let w = QComplex::from_polar(1.0, 2.0 * PI * j as f64 / nodes as f64);
            let lam = w * radius;
            let x = build(lam)?;
            for (e, v) in vectors.iter().enumerate() {
                samples[e][row] = rayleigh(&x, v) * lam.powi(d as i32);
            }
            for k in 0..nodes {
                vander[(row, k)] = w.powi(k as i32);
            }
        }
        let lu = vander.lu();
        let s = if choice == OperatorChoice::Aminus { -1 } else { 1 };
        for (e, v) in vectors.iter().enumerate() {
            let rhs = DVector::from_vec(samples[e].clone());
            let scaled = lu
                .solve(&rhs)
                .ok_or_else(|| Error::Linalg("singular interpolation system".into()))?;
            let coefficients: Vec<QComplex> = scaled
                .iter()
                .enumerate()
                .map(|(k, c)| c / radius.powi(k as i32))
                .collect();
            let all = poly_roots(&coefficients)?;
            let (roots, discarded): (Vec<_>, Vec<_>) = all.into_iter().partition(|r| r.norm() <= SPURIOUS_ROOT);
            if !discarded.is_empty() {
                report.warnings.push(format!(
                    "sector {l}, eigenvalue {e}, {}: discarded {} spurious roots beyond 1e8",
                    choice.label(),
                    discarded.len()
                ));
            }
            let mut residuals = Vec::with_capacity(roots.len());
            for r in &roots {
                let a_up = rayleigh(&build(q * r)?, v);
                let a_dn = rayleigh(&build(r / q)?, v);
                let t1 = phi.powi(s * m) * bracket(r / z).powi(m) * a_up;
                let t2 = phi.powi(-s * m) * bracket(r * z).powi(m) * a_dn;
                let denom = t1.norm() + t2.norm();
                residuals.push(if denom == 0.0 { 0.0 } else { (t1 + t2).norm() / denom });
            }
            let (pairs, unpaired) = count_pairs(&roots);
            if unpaired > 0 {
                report.warnings.push(format!(
                    "sector {l}, eigenvalue {e}, {}: {unpaired} roots without a partner at -λ",
                    choice.label()
                ));
            }
            report.eigen.push(EigenRoots {
                index: e,
                operator: choice.label().to_string(),
                t_eigenvalue: evals[e],
                coefficients,
                roots,
                residuals,
                discarded,
                pairs,
                unpaired,
            });
        }
    }
    Ok(report)
}

/// Greedy matching of each root with its negative.
fn count_pairs(roots: &[QComplex]) -> (usize, usize) {
    let mut used = vec![false; roots.len()];
    let mut pairs = 0;
    for a in 0..roots.len() {
        if used[a] {
            continue;
        }
        let tol = 1e-6 * roots[a].norm().max(1.0);
        let partner = (0..roots.len())
            .filter(|&b| b != a && !used[b])
            .map(|b| (b, (roots[a] + roots[b]).norm()))
            .filter(|(_, d)| *d < tol)
            .fold(None, |best: Option<(usize, f64)>, c| match best {
                Some(bb) if bb.1 <= c.1 => Some(bb),
                _ => Some(c),
            });
        if let Some((b, _)) = partner {
            used[a] = true;
            used[b] = true;
            pairs += 1;
        }
    }
    (pairs, used.iter().filter(|u| !**u).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::c64;

    #[test]
    fn companion_roots() {
        // (x - 2)(x + 3) = x² + x - 6
        let mut r = poly_roots(&[c64(-6.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] + 3.0).norm() < 1e-12 && (r[1] - 2.0).norm() < 1e-12);
        assert!(poly_roots(&[c64(4.0, 0.0)]).unwrap().is_empty());
        assert_eq!(poly_eval(&[c64(1.0, 0.0), c64(2.0, 0.0)], c64(3.0, 0.0)), c64(7.0, 0.0));
    }

    #[test]
    fn pairing() {
        let r = [c64(1.0, 0.5), c64(0.3, 0.0), c64(-1.0, -0.5)];
        assert_eq!(count_pairs(&r), (1, 1));
    }
}
