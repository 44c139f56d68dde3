//! Residual checks of the operator identities, Bethe-root extraction, and
//! the suite runner behind the command-line tool.
//!
//! Every residual is scale-free: a max-entry norm divided by the norms of
//! the operands it came from.

mod bethe;
mod report;

pub use bethe::{bethe_roots, bethe_roots_with, BetheOptions, BetheRootReport, EigenRoots};
pub use report::{
    asymptotic_ratio, dump_matrices, genfun_mu, run_suite, sears_symmetry_residual, Environment, RunConfig, SpinMode,
    Suite, SuiteRecord, SuiteReport, ASKEY_ROY_POINT, ASYMPTOTIC_POINTS, SCHEMA_VERSION,
};

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::aplus_operator::{
    aminus_asymptotic_constant, aplus_asymptotic_constant, aplus_at_zeta, build_aminus, build_aminus_mirror,
    build_aplus_factorized, build_aplus_trace, TruncationPolicy,
};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::qf_operator::{build_qf, build_qinf};
use crate::qkernel::{bracket, qpoch_n, QComplex};
use crate::sector::{max_norm, OperatorMatrix, SectorBasis};
use crate::transfer::build_transfer;

/// Which Q-operator a check is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorChoice {
    Qf,
    Aplus,
    Aminus,
}

impl OperatorChoice {
    pub fn label(self) -> &'static str {
        match self {
            OperatorChoice::Qf => "Qf",
            OperatorChoice::Aplus => "A+",
            OperatorChoice::Aminus => "A-",
        }
    }
}

/// How `A±` are constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Construction {
    /// Fock trace, falling back to the closed forms when the trace diverges.
    Auto,
    /// Fock trace only; divergence is an error.
    Trace,
    /// Closed forms only (`A₊(ζ)Q_f(λ)` and the mirror relation for `A₋`).
    Analytic,
}

/// The construction route an operator actually took.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum OperatorPath {
    Direct,
    Trace { terms: usize, tail_bound: f64 },
    Factorized,
    Mirror,
}

/// An operator matrix together with how it was obtained.
#[derive(Debug, Clone)]
pub struct Built {
    pub matrix: OperatorMatrix,
    pub path: OperatorPath,
}

/// Builds `Q_f`, `A₊` or `A₋` at `params.lambda`.
pub fn build_operator(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    choice: OperatorChoice,
    how: Construction,
    policy: &TruncationPolicy,
) -> Result<Built> {
    let traced = |r: crate::aplus_operator::FockTraceResult| Built {
        path: OperatorPath::Trace {
            terms: r.terms_used,
            tail_bound: r.tail_bound,
        },
        matrix: r.matrix,
    };
    match choice {
        OperatorChoice::Qf => Ok(Built {
            matrix: build_qf(params, basis)?,
            path: OperatorPath::Direct,
        }),
        OperatorChoice::Aplus => {
            let analytic = |b| {
                Ok(Built {
                    matrix: build_aplus_factorized(params, b)?,
                    path: OperatorPath::Factorized,
                })
            };
            match how {
                Construction::Analytic => analytic(basis),
                Construction::Trace => build_aplus_trace(params, basis, policy).map(traced),
                Construction::Auto => match build_aplus_trace(params, basis.clone(), policy) {
                    Err(Error::Divergence { .. }) => analytic(basis),
                    other => other.map(traced),
                },
            }
        }
        OperatorChoice::Aminus => {
            let analytic = |b| {
                Ok(Built {
                    matrix: build_aminus_mirror(params, b)?,
                    path: OperatorPath::Mirror,
                })
            };
            match how {
                Construction::Analytic => analytic(basis),
                Construction::Trace => build_aminus(params, basis, policy).map(traced),
                Construction::Auto => match build_aminus(params, basis.clone(), policy) {
                    Err(Error::Divergence { .. }) => analytic(basis),
                    other => other.map(traced),
                },
            }
        }
    }
}

/// Options shared by the residual functions.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub construction: Construction,
    pub policy: TruncationPolicy,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            construction: Construction::Auto,
            policy: TruncationPolicy::default(),
        }
    }
}

/// A residual together with the construction route of the operator it checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    pub path: OperatorPath,
}

/// `‖diff‖ / max(‖parts‖)`; zero when every part vanishes.
fn relative(diff: &DMatrix<QComplex>, parts: &[f64]) -> f64 {
    let scale = parts.iter().fold(0.0f64, |m, p| m.max(*p));
    if scale == 0.0 {
        0.0
    } else {
        max_norm(diff) / scale
    }
}

fn op_at(
    params: &ModelParams,
    basis: &Arc<SectorBasis>,
    choice: OperatorChoice,
    lambda: QComplex,
    opts: &EvalOptions,
) -> Result<Built> {
    build_operator(&params.with_lambda(lambda), basis.clone(), choice, opts.construction, &opts.policy)
}

/// Normalized residual of the three-term TQ relation at `params.lambda`.
///
/// `Q_f` is checked in the left-multiplied form
/// `Q_f(λ)T(λ) = φ^M[λ/ζ]^M Q_f(qλ) + φ^{-M}[λζ]^M Q_f(λ/q)`;
/// `A±` in the right-multiplied form `T(λ)A±(λ) = φ^{±M}[λ/ζ]^M A±(qλ) + φ^{∓M}[λζ]^M A±(λ/q)`.
pub fn tq_residual(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    choice: OperatorChoice,
    opts: &EvalOptions,
) -> Result<Residual> {
    let lam = params.lambda;
    let (q, z, phi) = (params.q, params.zeta, params.phi);
    let m = basis.sites() as i32;
    let t = build_transfer(params, basis.clone())?;
    let x = op_at(params, &basis, choice, lam, opts)?;
    let xq = op_at(params, &basis, choice, q * lam, opts)?;
    let xqi = op_at(params, &basis, choice, lam / q, opts)?;
    let s = if choice == OperatorChoice::Aminus { -1 } else { 1 };
    let c1 = phi.powi(s * m) * bracket(lam / z).powi(m);
    let c2 = phi.powi(-s * m) * bracket(lam * z).powi(m);
    let lhs = if choice == OperatorChoice::Qf {
        &x.matrix.entries * &t.entries
    } else {
        &t.entries * &x.matrix.entries
    };
    let r1 = &xq.matrix.entries * c1;
    let r2 = &xqi.matrix.entries * c2;
    let diff = &lhs - &r1 - &r2;
    Ok(Residual {
        value: relative(&diff, &[max_norm(&lhs), max_norm(&r1), max_norm(&r2)]),
        path: x.path,
    })
}

/// Operator pairs whose commutator is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CommutatorPair {
    /// `[Q_f(λ), Q_f(μ)]`
    QfQf,
    /// `[Q_f(λ), T(μ)]`
    QfT,
    /// `[T(λ), T(μ)]`
    TT,
    /// `[A₊(λ), T(μ)]`
    AplusT,
    /// `[A₋(λ), T(μ)]`
    AminusT,
    /// `[A₊(λ), A₊(μ)]`
    AplusAplus,
    /// `[A₊(λ), A₋(μ)]`
    AplusAminus,
}

impl CommutatorPair {
    pub fn label(self) -> &'static str {
        match self {
            CommutatorPair::QfQf => "[Qf,Qf]",
            CommutatorPair::QfT => "[Qf,T]",
            CommutatorPair::TT => "[T,T]",
            CommutatorPair::AplusT => "[A+,T]",
            CommutatorPair::AminusT => "[A-,T]",
            CommutatorPair::AplusAplus => "[A+,A+]",
            CommutatorPair::AplusAminus => "[A+,A-]",
        }
    }

    /// Whether the pair only involves `T` and `Q_f`.
    pub fn is_qf_family(self) -> bool {
        matches!(self, CommutatorPair::QfQf | CommutatorPair::QfT | CommutatorPair::TT)
    }
}

/// `‖[X(λ), Y(μ)]‖ / (‖X‖·‖Y‖)` for the chosen pair.
pub fn commutativity_residual(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    lambda: QComplex,
    mu: QComplex,
    pair: CommutatorPair,
    opts: &EvalOptions,
) -> Result<f64> {
    use OperatorChoice::*;
    let t_at = |l: QComplex| build_transfer(&params.with_lambda(l), basis.clone());
    let op = |c, l| op_at(params, &basis, c, l, opts).map(|b| b.matrix);
    let (a, b) = match pair {
        CommutatorPair::QfQf => (op(Qf, lambda)?, op(Qf, mu)?),
        CommutatorPair::QfT => (op(Qf, lambda)?, t_at(mu)?),
        CommutatorPair::TT => (t_at(lambda)?, t_at(mu)?),
        CommutatorPair::AplusT => (op(Aplus, lambda)?, t_at(mu)?),
        CommutatorPair::AminusT => (op(Aminus, lambda)?, t_at(mu)?),
        CommutatorPair::AplusAplus => (op(Aplus, lambda)?, op(Aplus, mu)?),
        CommutatorPair::AplusAminus => (op(Aplus, lambda)?, op(Aminus, mu)?),
    };
    let comm = &a.entries * &b.entries - &b.entries * &a.entries;
    let scale = a.max_norm() * b.max_norm();
    Ok(if scale == 0.0 { 0.0 } else { max_norm(&comm) / scale })
}

/// Right side of the Wronskian relation:
/// `(-1)^{IM} φ^M q^{l-IM} (1 - φ^{2M}q^{2l-IM}) λ^{IM} (λ^{-2}q^{-I};q²)_I^M`.
pub fn wronskian_scalar(params: &ModelParams, sites: usize, degree: usize) -> Result<QComplex> {
    let spin = params
        .spin_int
        .ok_or_else(|| Error::Unsupported("the Wronskian needs A-, i.e. integer spin".into()))?;
    let (q, phi, lam) = (params.q, params.phi, params.lambda);
    let m = sites as i32;
    let total = (spin * sites) as i32;
    let l = degree as i32;
    let sign = if total % 2 == 0 { 1.0 } else { -1.0 };
    let norm = crate::aplus_operator::trace_normalization(params, sites, degree);
    let poch = qpoch_n(lam.powi(-2) * q.powi(-(spin as i32)), q * q, spin);
    Ok(sign * phi.powi(m) * q.powi(l - total) * norm * lam.powi(total) * poch.powi(m))
}

/// Residual of `φ^M A₊(qλ)A₋(λ) − φ^{−M}A₋(qλ)A₊(λ) = W(λ)·1` at `params.lambda`.
///
/// `A₊` and `A₋` converge as traces in complementary `φ` regions, so both come
/// from their closed forms here.
pub fn wronskian_residual(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<f64> {
    let opts = EvalOptions {
        construction: Construction::Analytic,
        ..EvalOptions::default()
    };
    let lam = params.lambda;
    let q = params.q;
    let m = basis.sites() as i32;
    let w = wronskian_scalar(params, basis.sites(), basis.degree())?;
    let ap_q = op_at(params, &basis, OperatorChoice::Aplus, q * lam, &opts)?.matrix;
    let ap = op_at(params, &basis, OperatorChoice::Aplus, lam, &opts)?.matrix;
    let am_q = op_at(params, &basis, OperatorChoice::Aminus, q * lam, &opts)?.matrix;
    let am = op_at(params, &basis, OperatorChoice::Aminus, lam, &opts)?.matrix;
    let t1 = (&ap_q.entries * &am.entries) * params.phi.powi(m);
    let t2 = (&am_q.entries * &ap.entries) * params.phi.powi(-m);
    let n = basis.len();
    let diff = &t1 - &t2 - DMatrix::<QComplex>::identity(n, n) * w;
    Ok(relative(&diff, &[w.norm(), max_norm(&t1), max_norm(&t2)]))
}

/// Residual of `A₊(ζ) Q∞ = (-1)^{l+1} φ^{2M} q^{l-IM} · 1` (generic spin).
pub fn inversion_residual(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<f64> {
    let a = aplus_at_zeta(params, basis.clone())?;
    let qinf = build_qinf(params, basis.clone())?;
    let c = aplus_asymptotic_constant(params, basis.sites(), basis.degree());
    let n = basis.len();
    let diff = &a.entries * &qinf.entries - DMatrix::<QComplex>::identity(n, n) * c;
    Ok(max_norm(&diff) / c.norm())
}

/// Deviation of `λ^{-d} X(λ)` from its limit, relative to the limit.
///
/// `d` is `l` for `Q_f` and `A₊` and `IM - l` for `A₋`; the limits are `Q∞`,
/// `(-1)^{l+1}φ^{2M}q^{l-IM}` and `(-1)^{IM-l}q^{l-IM}`.
pub fn asymptotic_deviation(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    choice: OperatorChoice,
    lambda: QComplex,
    opts: &EvalOptions,
) -> Result<f64> {
    let (sites, l) = (basis.sites(), basis.degree());
    let n = basis.len();
    let (limit, power) = match choice {
        OperatorChoice::Qf => (build_qinf(params, basis.clone())?.entries, l),
        OperatorChoice::Aplus => (
            DMatrix::identity(n, n) * aplus_asymptotic_constant(params, sites, l),
            l,
        ),
        OperatorChoice::Aminus => {
            let spin = params.spin_int.unwrap_or(0);
            (
                DMatrix::identity(n, n) * aminus_asymptotic_constant(params, sites, l)?,
                spin * sites - l,
            )
        }
    };
    let x = op_at(params, &basis, choice, lambda, opts)?.matrix;
    let scaled = x.entries * lambda.powi(-(power as i32));
    Ok(max_norm(&(&scaled - &limit)) / max_norm(&limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::c64;
    use crate::sector::enumerate_basis;

    fn generic() -> ModelParams {
        ModelParams::generic(c64(0.5, 0.15), c64(0.75, 0.3), c64(3.0, 0.4), c64(0.8, 0.6)).unwrap()
    }

    #[test]
    fn tq_single_site_vacuum() {
        let p = ModelParams::integer(c64(0.5, 0.15), 1, c64(2.2, 0.3), c64(0.8, 0.6)).unwrap();
        let b = Arc::new(enumerate_basis(1, 0, Some(1)).unwrap());
        let r = tq_residual(&p, b, OperatorChoice::Aplus, &EvalOptions::default()).unwrap();
        assert!(r.value < 1e-14, "{}", r.value);
        assert!(matches!(r.path, OperatorPath::Trace { .. }));
    }

    #[test]
    fn trivial_commutators() {
        let p = generic();
        let b = Arc::new(enumerate_basis(2, 2, None).unwrap());
        let o = EvalOptions::default();
        let lam = c64(0.7, 0.2);
        assert_eq!(commutativity_residual(&p, b.clone(), lam, lam, CommutatorPair::QfQf, &o).unwrap(), 0.0);
        let r = commutativity_residual(&p, b, lam, p.zeta, CommutatorPair::QfQf, &o).unwrap();
        assert!(r < 1e-15);
    }

    #[test]
    fn inversion_vacuum() {
        let b = Arc::new(enumerate_basis(2, 0, None).unwrap());
        assert!(inversion_residual(&generic(), b).unwrap() < 1e-15);
    }

    #[test]
    fn wronskian_needs_integer_spin() {
        let b = Arc::new(enumerate_basis(2, 1, None).unwrap());
        assert!(matches!(wronskian_residual(&generic(), b), Err(Error::Unsupported(_))));
    }
}
