//! Run configuration, per-suite records, and the suite runner.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    asymptotic_deviation, bethe_roots, build_operator, commutativity_residual, inversion_residual, tq_residual,
    wronskian_residual, CommutatorPair, Construction, EvalOptions, OperatorChoice, OperatorPath,
};
use crate::aplus_operator::{aplus_at_zeta, build_aplus_factorized, build_aplus_trace, TruncationPolicy};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::qf_operator::{build_qf, compose_coeff, genfun_residual};
use crate::qkernel::{askey_roy_residual, c64, root_of_unity_warning, QComplex};
use crate::sector::{enumerate_basis, max_norm, SectorBasis};
use crate::transfer::build_transfer;

pub const SCHEMA_VERSION: u32 = 1;

/// The checks a run can select.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Tq,
    Wronskian,
    Commute,
    Factorize,
    Inversion,
    Asymptotics,
    Genfun,
    Askeyroy,
    Bethe,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Tq,
        Suite::Wronskian,
        Suite::Commute,
        Suite::Factorize,
        Suite::Inversion,
        Suite::Asymptotics,
        Suite::Genfun,
        Suite::Askeyroy,
        Suite::Bethe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Tq => "tq",
            Suite::Wronskian => "wronskian",
            Suite::Commute => "commute",
            Suite::Factorize => "factorize",
            Suite::Inversion => "inversion",
            Suite::Asymptotics => "asymptotics",
            Suite::Genfun => "genfun",
            Suite::Askeyroy => "askeyroy",
            Suite::Bethe => "bethe",
        }
    }

    /// Parses a comma-separated list; `all` selects every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                for suite in Suite::ALL {
                    if !out.contains(&suite) {
                        out.push(suite);
                    }
                }
                continue;
            }
            let suite = Suite::ALL
                .into_iter()
                .find(|x| x.name() == part)
                .ok_or_else(|| Error::InvalidParams(format!("unknown suite `{part}`")))?;
            if !out.contains(&suite) {
                out.push(suite);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinMode {
    Integer(usize),
    Complex(QComplex),
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub sites: usize,
    pub sectors: Vec<usize>,
    pub spin: SpinMode,
    pub q: QComplex,
    pub phi: QComplex,
    pub lambdas: Vec<QComplex>,
    pub truncation: TruncationPolicy,
    pub suites: Vec<Suite>,
    pub out: Option<PathBuf>,
    pub dump_matrices: Option<PathBuf>,
    pub precision_warn: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sites: 2,
            sectors: vec![0, 1, 2, 3],
            spin: SpinMode::Complex(c64(0.75, 0.3)),
            q: c64(0.5, 0.15),
            phi: c64(3.0, 0.4),
            lambdas: vec![c64(0.83, 0.41), c64(-0.37, 1.12), c64(1.21, -0.28)],
            truncation: TruncationPolicy::default(),
            suites: Suite::ALL.to_vec(),
            out: None,
            dump_matrices: None,
            precision_warn: false,
        }
    }
}

impl RunConfig {
    /// Model parameters at the first grid point.
    pub fn params(&self) -> Result<ModelParams> {
        let lambda = *self
            .lambdas
            .first()
            .ok_or_else(|| Error::InvalidParams("the lambda grid is empty".into()))?;
        match self.spin {
            SpinMode::Integer(spin) => ModelParams::integer(self.q, spin, self.phi, lambda),
            SpinMode::Complex(zeta) => ModelParams::generic(self.q, zeta, self.phi, lambda),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::InvalidParams("need at least one site".into()));
        }
        let p = self.params()?;
        for lam in &self.lambdas {
            p.with_lambda(*lam).validate()?;
        }
        self.truncation.validate()?;
        if let Some(spin) = p.spin_int {
            if let Some(&l) = self.sectors.iter().find(|&&l| l > spin * self.sites) {
                return Err(Error::EmptySector {
                    sites: self.sites,
                    degree: l,
                    cap: spin,
                });
            }
        }
        Ok(())
    }

    fn basis(&self, p: &ModelParams, degree: usize) -> Result<Arc<SectorBasis>> {
        Ok(Arc::new(enumerate_basis(self.sites, degree, p.spin_int)?))
    }
}

/// One check at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRecord {
    pub name: String,
    pub params: Value,
    /// `None` when the check could not be evaluated or was skipped.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub package: &'static str,
    pub version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
}

impl Environment {
    fn current() -> Self {
        Environment {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub environment: Environment,
    pub config: RunConfig,
    pub suites: Vec<SuiteRecord>,
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.suites.iter().all(|r| r.pass)
    }

    /// Multi-line JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}

fn cjson(z: QComplex) -> Value {
    json!([z.re, z.im])
}

fn path_json(p: OperatorPath) -> Value {
    serde_json::to_value(p).unwrap_or(Value::Null)
}

struct Recorder {
    suite: Suite,
    records: Vec<SuiteRecord>,
    warnings: Vec<String>,
    precision_warn: bool,
}

impl Recorder {
    fn new(suite: Suite, cfg: &RunConfig) -> Self {
        Recorder {
            suite,
            records: Vec::new(),
            warnings: Vec::new(),
            precision_warn: cfg.precision_warn,
        }
    }

    /// Times `f` and records a residual against `tolerance`.
    fn check<F>(&mut self, params: Value, tolerance: f64, f: F)
    where
        F: FnOnce(&mut Value, &mut Vec<String>) -> Result<f64>,
    {
        let start = Instant::now();
        let mut params = params;
        let mut warns = Vec::new();
        let outcome = f(&mut params, &mut warns);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        self.warnings.extend(warns);
        let record = match outcome {
            Ok(r) => {
                let pass = r.is_finite() && r < tolerance;
                if pass && self.precision_warn && r > 0.1 * tolerance {
                    self.warnings.push(format!(
                        "{}: residual {r:.3e} is within a factor 10 of its tolerance {tolerance:.0e} ({params})",
                        self.suite.name()
                    ));
                }
                SuiteRecord {
                    name: self.suite.name().into(),
                    params,
                    residual: Some(r),
                    tolerance,
                    pass,
                    ms,
                    error: None,
                    skipped: None,
                }
            }
            Err(e) => SuiteRecord {
                name: self.suite.name().into(),
                params,
                residual: None,
                tolerance,
                pass: false,
                ms,
                error: Some(e.to_string()),
                skipped: None,
            },
        };
        self.records.push(record);
    }

    fn skip(&mut self, params: Value, reason: &str) {
        self.records.push(SuiteRecord {
            name: self.suite.name().into(),
            params,
            residual: None,
            tolerance: 0.0,
            pass: true,
            ms: 0.0,
            error: None,
            skipped: Some(reason.into()),
        });
    }
}

/// Pairs of grid points for two-argument checks: consecutive, cyclic.
fn lambda_pairs(lambdas: &[QComplex]) -> Vec<(QComplex, QComplex)> {
    match lambdas.len() {
        0 => Vec::new(),
        1 => vec![(lambdas[0], lambdas[0] * QComplex::from_polar(1.3, 0.7))],
        2 => vec![(lambdas[0], lambdas[1])],
        n => (0..n).map(|j| (lambdas[j], lambdas[(j + 1) % n])).collect(),
    }
}

fn fallback_warning(op: OperatorChoice, path: OperatorPath, l: usize) -> Option<String> {
    match path {
        OperatorPath::Factorized | OperatorPath::Mirror => Some(format!(
            "sector {l}: the {} Fock trace diverges at this phi; the closed form was used instead",
            op.label()
        )),
        _ => None,
    }
}

fn run_tq(rec: &mut Recorder, cfg: &RunConfig, p: &ModelParams, l: usize) -> Result<()> {
    let basis = cfg.basis(p, l)?;
    let mut ops = Vec::new();
    if !p.is_integer() {
        ops.push((OperatorChoice::Qf, 1e-10));
    }
    ops.push((OperatorChoice::Aplus, 1e-9));
    if p.is_integer() {
        ops.push((OperatorChoice::Aminus, 1e-9));
    }
    let opts = EvalOptions {
        construction: Construction::Auto,
        policy: cfg.truncation,
    };
    for lam in &cfg.lambdas {
        for (op, tol) in &ops {
            let params = json!({"sector": l, "lambda": cjson(*lam), "operator": op.label()});
            rec.check(params, *tol, |meta, warns| {
                let r = tq_residual(&p.with_lambda(*lam), basis.clone(), *op, &opts)?;
                meta["construction"] = path_json(r.path);
                warns.extend(fallback_warning(*op, r.path, l));
                Ok(r.value)
            });
        }
    }
    Ok(())
}

fn run_commute(rec: &mut Recorder, cfg: &RunConfig, p: &ModelParams, l: usize) -> Result<()> {
    let basis = cfg.basis(p, l)?;
    let pairs: Vec<CommutatorPair> = if p.is_integer() {
        vec![
            CommutatorPair::TT,
            CommutatorPair::AplusT,
            CommutatorPair::AminusT,
            CommutatorPair::AplusAplus,
            CommutatorPair::AplusAminus,
        ]
    } else {
        vec![
            CommutatorPair::QfQf,
            CommutatorPair::QfT,
            CommutatorPair::TT,
            CommutatorPair::AplusT,
            CommutatorPair::AplusAplus,
        ]
    };
    let opts = EvalOptions {
        construction: Construction::Auto,
        policy: cfg.truncation,
    };
    for (lam, mu) in lambda_pairs(&cfg.lambdas) {
        for pair in &pairs {
            let tol = if pair.is_qf_family() { 1e-11 } else { 1e-9 };
            let params = json!({"sector": l, "lambda": cjson(lam), "mu": cjson(mu), "pair": pair.label()});
            rec.check(params, tol, |_, _| commutativity_residual(p, basis.clone(), lam, mu, *pair, &opts));
        }
    }
    Ok(())
}

/// Max over `n + k ≤ m ≤ m_max` of `|c(λ,μ) - c(μ,λ)| / max|c|` for the composition coefficients.
pub fn sears_symmetry_residual(p: &ModelParams, lambda: QComplex, mu: QComplex, m_max: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for m in 0..=m_max {
        for n in 0..=m {
            for k in 0..=(m - n) {
                let a = compose_coeff(&p.with_lambda(lambda), mu, m, n, k)?;
                let b = compose_coeff(&p.with_lambda(mu), lambda, m, n, k)?;
                let scale = a.norm().max(b.norm());
                if scale > 0.0 {
                    worst = worst.max((a - b).norm() / scale);
                }
            }
        }
    }
    Ok(worst)
}

fn run_sears(rec: &mut Recorder, cfg: &RunConfig, p: &ModelParams) {
    let m_max = p.spin_int.map_or(5, |s| s.min(5));
    for (lam, mu) in lambda_pairs(&cfg.lambdas) {
        let params = json!({"check": "composition symmetry", "lambda": cjson(lam), "mu": cjson(mu), "m_max": m_max});
        rec.check(params, 1e-11, |_, _| sears_symmetry_residual(p, lam, mu, m_max));
    }
}

fn run_factorize(rec: &mut Recorder, cfg: &RunConfig, p: &ModelParams, l: usize) -> Result<()> {
    let basis = cfg.basis(p, l)?;
    for lam in &cfg.lambdas {
        let params = json!({"sector": l, "lambda": cjson(*lam), "check": "trace vs A+(zeta) Qf(lambda)"});
        rec.check(params, 1e-9, |meta, _| {
            let pl = p.with_lambda(*lam);
            let trace = build_aplus_trace(&pl, basis.clone(), &cfg.truncation)?;
            meta["terms"] = json!(trace.terms_used);
            meta["tail_bound"] = json!(trace.tail_bound);
            let fact = build_aplus_factorized(&pl, basis.clone())?;
            Ok(max_norm(&(&trace.matrix.entries - &fact.entries)) / trace.matrix.max_norm())
        });
    }
    if !p.is_integer() {
        let params = json!({"sector": l, "check": "Qf(zeta) = identity"});
        rec.check(params, 1e-13, |_, _| {
            let q = build_qf(&p.with_lambda(p.zeta), basis.clone())?;
            let n = basis.len();
            Ok(max_norm(&(q.entries - nalgebra::DMatrix::<QComplex>::identity(n, n))))
        });
        for lam in &cfg.lambdas {
            let params = json!({"sector": l, "lambda": cjson(*lam), "check": "A+(zeta) Qf = Qf A+(zeta)"});
            rec.check(params, 1e-10, |_, _| {
                let a = aplus_at_zeta(p, basis.clone())?;
                let q = build_qf(&p.with_lambda(*lam), basis.clone())?;
                let d = &a.entries * &q.entries - &q.entries * &a.entries;
                Ok(max_norm(&d) / (a.max_norm() * q.max_norm()))
            });
        }
    }
    Ok(())
}

fn run_wronskian(rec: &mut Recorder, cfg: &RunConfig, p: &ModelParams, l: usize) -> Result<()> {
    if !p.is_integer() {
        rec.skip(json!({"sector": l}), "the Wronskian involves A-, which needs integer spin");
        return Ok(());
    }
    let basis = cfg.basis(p, l)?;
    for lam in &cfg.lambdas {
        let params = json!({"sector": l, "lambda": cjson(*lam)});
        rec.check(params, 1e-8, |_, _| wronskian_residual(&p.with_lambda(*lam), basis.clone()));
    }
    Ok(())
}

fn run_inversion(rec: &mut Recorder, cfg: &RunConfig, p: &ModelParams, l: usize) -> Result<()> {
    if p.is_integer() {
        rec.skip(json!({"sector": l}), "Q-infinity is singular at integer spin");
        return Ok(());
    }
    let basis = cfg.basis(p, l)?;
    rec.check(json!({"sector": l}), 1e-10, |_, _| inversion_residual(p, basis.clone()));
    Ok(())
}

/// Large-λ points of the asymptotics check.
pub const ASYMPTOTIC_POINTS: [f64; 2] = [1e3, 1e4];

/// Ratio `d(10⁴)/d(10³)` of deviations from the λ → ∞ limit, with both deviations.
pub fn asymptotic_ratio(
    p: &ModelParams,
    basis: Arc<SectorBasis>,
    op: OperatorChoice,
    opts: &EvalOptions,
) -> Result<(f64, f64, f64)> {
    let dir = QComplex::from_polar(1.0, 0.3);
    let d3 = asymptotic_deviation(p, basis.clone(), op, dir * ASYMPTOTIC_POINTS[0], opts)?;
    let d4 = asymptotic_deviation(p, basis, op, dir * ASYMPTOTIC_POINTS[1], opts)?;
    Ok((d4 / d3, d3, d4))
}

fn run_asymptotics(rec: &mut Recorder, cfg: &RunConfig, p: &ModelParams, l: usize) -> Result<()> {
    let basis = cfg.basis(p, l)?;
    let mut ops = vec![(OperatorChoice::Aplus, l)];
    if !p.is_integer() {
        ops.push((OperatorChoice::Qf, l));
    }
    if let Some(spin) = p.spin_int {
        ops.push((OperatorChoice::Aminus, spin * cfg.sites - l));
    }
    let opts = EvalOptions {
        construction: Construction::Auto,
        policy: cfg.truncation,
    };
    for (op, power) in ops {
        let params = json!({"sector": l, "operator": op.label(), "power": power});
        if power == 0 {
            // λ-independent operator: the deviation itself must vanish.
            rec.check(params, 1e-12, |meta, _| {
                let (_, d3, d4) = asymptotic_ratio(p, basis.clone(), op, &opts)?;
                meta["deviations"] = json!([d3, d4]);
                Ok(d3.max(d4))
            });
            continue;
        }
        // Pass when the ratio lies within a factor 2 of λ⁻² scaling, i.e. in [5e-3, 2e-2).
        rec.check(params, 2e-2, |meta, _| {
            let (ratio, d3, d4) = asymptotic_ratio(p, basis.clone(), op, &opts)?;
            meta["deviations"] = json!([d3, d4]);
            meta["expected_ratio"] = json!(1e-2);
            Ok(if ratio >= 5e-3 { ratio } else { f64::INFINITY })
        });
    }
    Ok(())
}

/// Per-site expansion points of the generating-function check.
pub fn genfun_mu(sites: usize) -> Vec<QComplex> {
    (0..sites)
        .map(|k| QComplex::from_polar(0.3 + 0.05 * k as f64, 0.2 + 0.7 * k as f64))
        .collect()
}

fn run_genfun(rec: &mut Recorder, cfg: &RunConfig, p: &ModelParams) {
    let order = p.spin_int.map_or(3, |s| s.min(3));
    let mu = genfun_mu(cfg.sites);
    for lam in &cfg.lambdas {
        let params = json!({"lambda": cjson(*lam), "order": order});
        rec.check(params, 1e-11, |_, _| genfun_residual(&p.with_lambda(*lam), &mu, order));
    }
}

/// Parameters of the Askey–Roy check: `(a, b, c, d, ρ)`.
pub const ASKEY_ROY_POINT: [(f64, f64); 5] = [(0.3, 0.1), (-0.2, 0.25), (0.0, 0.35), (0.25, -0.1), (0.7, 0.2)];

fn run_askeyroy(rec: &mut Recorder, p: &ModelParams) {
    let [a, b, c, d, rho] = ASKEY_ROY_POINT.map(|(re, im)| c64(re, im));
    let params = json!({"nodes": 1024, "a": cjson(a), "b": cjson(b), "c": cjson(c), "d": cjson(d), "rho": cjson(rho)});
    rec.check(params, 1e-8, |meta, _| {
        let ladder = [8usize, 16, 32, 64, 256, 512, 1024]
            .iter()
            .map(|&n| askey_roy_residual(a, b, c, d, rho, p.q, n).map(|r| json!([n, r])))
            .collect::<Result<Vec<_>>>()?;
        meta["convergence"] = Value::Array(ladder);
        askey_roy_residual(a, b, c, d, rho, p.q, 1024)
    });
}

fn run_bethe(rec: &mut Recorder, cfg: &RunConfig, p: &ModelParams, l: usize) -> Result<()> {
    let basis = cfg.basis(p, l)?;
    let lambda_ref = cfg.lambdas[0];
    let params = json!({"sector": l, "lambda_ref": cjson(lambda_ref)});
    rec.check(params, 1e-6, |meta, warns| {
        let report = bethe_roots(p, basis.clone(), lambda_ref)?;
        warns.extend(report.warnings.iter().cloned());
        let expected = |op: &str| match (op, p.spin_int) {
            ("A-", Some(spin)) => spin * cfg.sites - l,
            _ => l,
        };
        let counts_ok = !report.eigen.is_empty()
            && report
                .eigen
                .iter()
                .all(|e| e.pairs == expected(&e.operator) && e.unpaired == 0 && e.discarded.is_empty());
        meta["eigenvalues"] = json!(report.eigen.len());
        meta["root_pairs"] = json!(report.eigen.iter().map(|e| json!({"operator": e.operator, "pairs": e.pairs})).collect::<Vec<_>>());
        meta["counts_ok"] = json!(counts_ok);
        let r = report.max_residual();
        Ok(if counts_ok { r } else { f64::INFINITY })
    });
    Ok(())
}

fn run_sector(suite: Suite, cfg: &RunConfig, p: &ModelParams, l: usize) -> (Vec<SuiteRecord>, Vec<String>) {
    let mut rec = Recorder::new(suite, cfg);
    let outcome = match suite {
        Suite::Tq => run_tq(&mut rec, cfg, p, l),
        Suite::Commute => run_commute(&mut rec, cfg, p, l),
        Suite::Factorize => run_factorize(&mut rec, cfg, p, l),
        Suite::Wronskian => run_wronskian(&mut rec, cfg, p, l),
        Suite::Inversion => run_inversion(&mut rec, cfg, p, l),
        Suite::Asymptotics => run_asymptotics(&mut rec, cfg, p, l),
        Suite::Bethe => run_bethe(&mut rec, cfg, p, l),
        Suite::Genfun | Suite::Askeyroy => Ok(()),
    };
    if let Err(e) = outcome {
        rec.check(json!({"sector": l}), 0.0, |_, _| Err(e));
    }
    (rec.records, rec.warnings)
}

/// Runs the selected suites and assembles the report.
///
/// Sectors are processed in parallel; records are merged in configuration
/// order, so the report is deterministic apart from the `ms` fields.
pub fn run_suite(config: &RunConfig) -> Result<SuiteReport> {
    config.validate()?;
    let p = config.params()?;
    let mut report = SuiteReport {
        schema: SCHEMA_VERSION,
        environment: Environment::current(),
        config: config.clone(),
        suites: Vec::new(),
        warnings: Vec::new(),
    };
    if let Some(w) = root_of_unity_warning(p.q) {
        report.warnings.push(w);
    }
    for &suite in &config.suites {
        match suite {
            Suite::Genfun | Suite::Askeyroy => {
                let mut rec = Recorder::new(suite, config);
                if suite == Suite::Genfun {
                    run_genfun(&mut rec, config, &p);
                } else {
                    run_askeyroy(&mut rec, &p);
                }
                report.suites.extend(rec.records);
                report.warnings.extend(rec.warnings);
            }
            _ => {
                if suite == Suite::Commute {
                    let mut rec = Recorder::new(suite, config);
                    run_sears(&mut rec, config, &p);
                    report.suites.extend(rec.records);
                    report.warnings.extend(rec.warnings);
                }
                let per_sector: Vec<_> = config
                    .sectors
                    .par_iter()
                    .map(|&l| run_sector(suite, config, &p, l))
                    .collect();
                for (records, warnings) in per_sector {
                    report.suites.extend(records);
                    report.warnings.extend(warnings);
                }
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    report.warnings.retain(|w| seen.insert(w.clone()));
    Ok(report)
}

/// Writes `T`, `A₊` (and `Q_f` or `A₋`) at the first grid point as CSV files
/// `<name>_l<sector>.csv` inside `dir`.
pub fn dump_matrices(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let p = config.params()?;
    fs::create_dir_all(dir).map_err(|e| Error::InvalidParams(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for &l in &config.sectors {
        let basis = config.basis(&p, l)?;
        let mut mats = vec![("T", build_transfer(&p, basis.clone())?)];
        let a = build_operator(&p, basis.clone(), OperatorChoice::Aplus, Construction::Auto, &config.truncation)?;
        mats.push(("Aplus", a.matrix));
        if p.is_integer() {
            let a = build_operator(&p, basis.clone(), OperatorChoice::Aminus, Construction::Auto, &config.truncation)?;
            mats.push(("Aminus", a.matrix));
        } else {
            mats.push(("Qf", build_qf(&p, basis.clone())?));
        }
        for (name, m) in mats {
            let path = dir.join(format!("{name}_l{l}.csv"));
            let file = fs::File::create(&path)
                .map_err(|e| Error::InvalidParams(format!("cannot write {}: {e}", path.display())))?;
            m.write_csv(BufWriter::new(file))
                .map_err(|e| Error::InvalidParams(format!("cannot write {}: {e}", path.display())))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_list_parsing() {
        assert_eq!(Suite::parse_list("tq,bethe").unwrap(), vec![Suite::Tq, Suite::Bethe]);
        assert_eq!(Suite::parse_list("all").unwrap().len(), 9);
        assert!(Suite::parse_list("tq,nope").is_err());
        assert!(Suite::parse_list("").unwrap().is_empty());
    }

    #[test]
    fn empty_selection_is_empty_report() {
        let cfg = RunConfig {
            suites: Vec::new(),
            ..RunConfig::default()
        };
        let r = run_suite(&cfg).unwrap();
        assert!(r.suites.is_empty() && r.all_pass());
    }

    #[test]
    fn sector_beyond_cap_is_config_error() {
        let cfg = RunConfig {
            spin: SpinMode::Integer(1),
            sectors: vec![3],
            ..RunConfig::default()
        };
        assert!(matches!(run_suite(&cfg), Err(Error::EmptySector { .. })));
    }
}
