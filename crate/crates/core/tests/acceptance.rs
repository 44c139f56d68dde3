//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{field_for, generic_params, integer_params, polar};
use sixvertex_q::aplus_operator::{build_aplus_factorized, build_aplus_trace, TruncationPolicy};
use sixvertex_q::qf_operator::{build_qf, genfun_residual};
use sixvertex_q::qkernel::{askey_roy_residual, geom_identity_residual, phi_regularized, phi_standard, qpoch_n, SeriesSpec};
use sixvertex_q::sector::max_norm;
use sixvertex_q::transfer::{apply_transfer_qdiff, build_transfer};
use sixvertex_q::verify::{
    asymptotic_ratio, bethe_roots, commutativity_residual, inversion_residual, sears_symmetry_residual, tq_residual,
    wronskian_residual, CommutatorPair, Construction, EvalOptions, OperatorChoice,
};
use sixvertex_q::{c64, enumerate_basis, ModelParams, QComplex, Result};

struct Outcome {
    worst: f64,
    detail: String,
}

fn basis(sites: usize, degree: usize, cap: Option<usize>) -> Arc<sixvertex_q::SectorBasis> {
    Arc::new(enumerate_basis(sites, degree, cap).unwrap())
}

fn criterion_1(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut geom = 0.0f64;
    for _ in 0..100 {
        let i = rng.gen_range(0..=6);
        let q = polar(rng, 0.2, 0.8);
        let x = polar(rng, 0.3, 3.0);
        geom = geom.max(geom_identity_residual(i, x, q)?);
    }
    let mut series = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(0..=6);
        let r = rng.gen_range(1..=3);
        let base = polar(rng, 0.2, 0.8);
        let numer: Vec<QComplex> = (0..r).map(|_| polar(rng, 0.2, 2.0)).collect();
        let denom: Vec<QComplex> = (0..r).map(|_| polar(rng, 0.2, 2.0)).collect();
        let spec = SeriesSpec::new(numer, denom.clone(), n, base, polar(rng, 0.2, 1.5));
        let reg = phi_regularized(&spec)?;
        let norm: QComplex = denom.iter().map(|b| qpoch_n(*b, base, n)).product();
        let std = phi_standard(&spec)? * norm;
        series = series.max((reg - std).norm() / reg.norm().max(std.norm()));
    }
    Ok(Outcome {
        worst: geom.max(series) / 1e-12,
        detail: format!("geom identity {geom:.1e}, regularized vs standard {series:.1e} (tol 1e-12)"),
    })
}

fn criterion_2(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let q = QComplex::from_polar(0.5, rng.gen_range(-1.0..1.0));
    let mut worst = 0.0f64;
    let mut geometric = true;
    for _ in 0..5 {
        let [a, b, c, d] = [0; 4].map(|_| polar(rng, 0.05, 0.5));
        let rho = polar(rng, 0.5, 1.5);
        let res = |n| askey_roy_residual(a, b, c, d, rho, q, n);
        let low = [8, 16, 32, 64].map(res);
        let high = [256, 512, 1024].map(res);
        let low = low.into_iter().collect::<Result<Vec<_>>>()?;
        let high = high.into_iter().collect::<Result<Vec<_>>>()?;
        geometric &= low.windows(2).all(|w| w[1] <= (w[0] / 10.0).max(1e-13));
        geometric &= high.windows(2).all(|w| w[1] <= w[0].max(1e-13));
        worst = worst.max(high[2]);
        geometric &= high.iter().all(|r| *r < 1e-8);
    }
    Ok(Outcome {
        worst: if geometric { worst / 1e-8 } else { f64::INFINITY },
        detail: format!("1024-node residual {worst:.1e} (tol 1e-8), geometric convergence {geometric}"),
    })
}

fn criterion_3(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let p = generic_params(rng);
        for sites in [2, 3] {
            for l in 0..=3 {
                let b = basis(sites, l, None);
                let t = build_transfer(&p, b.clone())?;
                for (col, m) in b.members().iter().enumerate() {
                    let image = apply_transfer_qdiff(&p, m);
                    let mut seen = 0;
                    for (mono, c) in &image {
                        let row = b.index_of(mono)?;
                        seen += 1;
                        worst = worst.max((t.entries[(row, col)] - c).norm());
                    }
                    for row in 0..b.len() {
                        if !image.contains_key(b.member(row)) {
                            worst = worst.max(t.entries[(row, col)].norm());
                        }
                    }
                    let _ = seen;
                }
            }
        }
    }
    Ok(Outcome {
        worst: worst / 1e-12,
        detail: format!("max entry difference {worst:.1e} (tol 1e-12)"),
    })
}

fn criterion_4(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let opts = EvalOptions {
        construction: Construction::Trace,
        policy: TruncationPolicy::default(),
    };
    let mut qf = 0.0f64;
    let p = generic_params(rng);
    for _ in 0..10 {
        let lam = polar(rng, 0.5, 2.0);
        for sites in 1..=3 {
            for l in 0..=3 {
                let r = tq_residual(&p.with_lambda(lam), basis(sites, l, None), OperatorChoice::Qf, &opts)?;
                qf = qf.max(r.value);
            }
        }
    }
    let mut apm = 0.0f64;
    let q = polar(rng, 0.4, 0.6);
    for spin in [1, 2] {
        for sites in 1..=3 {
            for l in 0..=(spin * sites).min(3) {
                let b = basis(sites, l, Some(spin));
                let pp = integer_params(q, spin, field_for(q, spin, sites, l, 3.0));
                let pm = integer_params(q, spin, field_for(q, spin, sites, l, 0.3));
                for _ in 0..10 {
                    let lam = polar(rng, 0.5, 2.0);
                    let rp = tq_residual(&pp.with_lambda(lam), b.clone(), OperatorChoice::Aplus, &opts)?;
                    let rm = tq_residual(&pm.with_lambda(lam), b.clone(), OperatorChoice::Aminus, &opts)?;
                    apm = apm.max(rp.value).max(rm.value);
                }
            }
        }
    }
    Ok(Outcome {
        worst: (qf / 1e-10).max(apm / 1e-9),
        detail: format!("Qf {qf:.1e} (tol 1e-10), A± trace {apm:.1e} (tol 1e-9)"),
    })
}

fn criterion_5(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let opts = EvalOptions::default();
    let p = generic_params(rng);
    let q = p.q;
    let mut qf = 0.0f64;
    let mut apm = 0.0f64;
    let mut sears = 0.0f64;
    for _ in 0..20 {
        let (lam, mu) = (polar(rng, 0.5, 2.0), polar(rng, 0.5, 2.0));
        for sites in 1..=3 {
            for l in 0..=3 {
                let b = basis(sites, l, None);
                for pair in [CommutatorPair::QfQf, CommutatorPair::QfT, CommutatorPair::TT] {
                    qf = qf.max(commutativity_residual(&p, b.clone(), lam, mu, pair, &opts)?);
                }
                for pair in [CommutatorPair::AplusT, CommutatorPair::AplusAplus] {
                    apm = apm.max(commutativity_residual(&p, b.clone(), lam, mu, pair, &opts)?);
                }
            }
        }
        for spin in [1, 2] {
            for sites in 1..=2 {
                for l in 0..=spin * sites {
                    let b = basis(sites, l, Some(spin));
                    let pi = integer_params(q, spin, field_for(q, spin, sites, l, 3.0));
                    for pair in [
                        CommutatorPair::AplusT,
                        CommutatorPair::AminusT,
                        CommutatorPair::AplusAplus,
                        CommutatorPair::AplusAminus,
                    ] {
                        apm = apm.max(commutativity_residual(&pi, b.clone(), lam, mu, pair, &opts)?);
                    }
                }
            }
        }
        sears = sears.max(sears_symmetry_residual(&p, lam, mu, 5)?);
    }
    Ok(Outcome {
        worst: (qf / 1e-11).max(apm / 1e-9).max(sears / 1e-11),
        detail: format!("Qf family {qf:.1e} (1e-11), A± family {apm:.1e} (1e-9), composition symmetry {sears:.1e} (1e-11)"),
    })
}

fn criterion_6(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let policy = TruncationPolicy::default();
    let mut fact = 0.0f64;
    let mut ident = 0.0f64;
    for _ in 0..3 {
        let p = generic_params(rng);
        for sites in 1..=2 {
            for l in 0..=3 {
                let b = basis(sites, l, None);
                // Trace ratio is (ζ/φ)^{2M} q^{-2l}; sit at |ratio| = 3^{-2M}.
                let scale = 3.0 * p.zeta.norm() * p.q.norm().powf(-(l as f64) / sites as f64);
                let inside = ModelParams::generic(p.q, p.zeta, QComplex::from_polar(scale, 0.2), p.lambda)?;
                for _ in 0..3 {
                    let pl = inside.with_lambda(polar(rng, 0.5, 2.0));
                    let t = build_aplus_trace(&pl, b.clone(), &policy)?;
                    let f = build_aplus_factorized(&pl, b.clone())?;
                    fact = fact.max(max_norm(&(&t.matrix.entries - &f.entries)) / t.matrix.max_norm());
                }
                let qz = build_qf(&p.with_lambda(p.zeta), b.clone())?;
                let n = b.len();
                ident = ident.max(max_norm(&(qz.entries - nalgebra::DMatrix::<QComplex>::identity(n, n))));
            }
        }
    }
    Ok(Outcome {
        worst: (fact / 1e-9).max(ident / 1e-13),
        detail: format!("trace vs A+(ζ)Qf {fact:.1e} (1e-9), Qf(ζ) = 1 to {ident:.1e} (1e-13)"),
    })
}

fn criterion_7(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let q = polar(rng, 0.4, 0.6);
    let mut cases = Vec::new();
    for sites in 1..=2 {
        for l in 0..=sites {
            cases.push((1, sites, l));
        }
    }
    cases.push((2, 2, 2));
    let mut worst = 0.0f64;
    for (spin, sites, l) in cases {
        for _ in 0..5 {
            let p = ModelParams::integer(q, spin, polar(rng, 0.5, 2.0), polar(rng, 0.5, 2.0))?;
            worst = worst.max(wronskian_residual(&p, basis(sites, l, Some(spin)))?);
        }
    }
    Ok(Outcome {
        worst: worst / 1e-8,
        detail: format!("Wronskian residual {worst:.1e} (tol 1e-8)"),
    })
}

fn criterion_8(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let p = generic_params(rng);
    let opts = EvalOptions::default();
    let mut inv = 0.0f64;
    let mut ratio_dev = 0.0f64;
    let mut ratios = Vec::new();
    for sites in 1..=3 {
        for l in 0..=3 {
            let b = basis(sites, l, None);
            inv = inv.max(inversion_residual(&p, b.clone())?);
            if l == 0 {
                continue;
            }
            for op in [OperatorChoice::Aplus, OperatorChoice::Qf] {
                let (r, _, _) = asymptotic_ratio(&p, b.clone(), op, &opts)?;
                ratios.push(r);
                // Within a factor 2 of 1e-2 ⇔ |log2(r / 1e-2)| ≤ 1.
                ratio_dev = ratio_dev.max((r / 1e-2).log2().abs());
            }
        }
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    Ok(Outcome {
        worst: (inv / 1e-10).max(ratio_dev),
        detail: format!("inversion {inv:.1e} (1e-10), deviation ratios d(1e4)/d(1e3) in [{lo:.4e}, {hi:.4e}]"),
    })
}

fn criterion_9(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let q = polar(rng, 0.4, 0.6);
    let p = ModelParams::integer(q, 1, polar(rng, 1.3, 2.0), c64(0.9, 0.3))?;
    let mut worst = 0.0f64;
    let mut counts_ok = true;
    let mut roots = 0;
    for l in [1, 2] {
        let report = bethe_roots(&p, basis(2, l, Some(1)), polar(rng, 0.6, 1.5))?;
        counts_ok &= report.warnings.is_empty() && !report.eigen.is_empty();
        for e in &report.eigen {
            let expected = if e.operator == "A-" { 2 - l } else { l };
            counts_ok &= e.pairs == expected && e.unpaired == 0 && e.discarded.is_empty();
            roots += e.roots.len();
        }
        worst = worst.max(report.max_residual());
    }
    Ok(Outcome {
        worst: if counts_ok { worst / 1e-6 } else { f64::INFINITY },
        detail: format!("{roots} roots, max Bethe residual {worst:.1e} (tol 1e-6), root counts match {counts_ok}"),
    })
}

fn criterion_10(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let p = generic_params(rng);
        let mu = [polar(rng, 0.1, 0.6), polar(rng, 0.1, 0.6)];
        worst = worst.max(genfun_residual(&p, &mu, 3)?);
    }
    Ok(Outcome {
        worst: worst / 1e-11,
        detail: format!("coefficientwise residual {worst:.1e} through order 3 (tol 1e-11)"),
    })
}

type Criterion = fn(&mut ChaCha8Rng) -> Result<Outcome>;

fn main() {
    let criteria: [(&str, Criterion, Duration); 10] = [
        ("q-kernel self-tests", criterion_1, Duration::from_secs(1)),
        ("Askey-Roy quadrature", criterion_2, Duration::from_secs(1)),
        ("transfer oracle equivalence", criterion_3, Duration::from_secs(5)),
        ("TQ relations", criterion_4, Duration::from_secs(30)),
        ("commutativity", criterion_5, Duration::from_secs(30)),
        ("factorization", criterion_6, Duration::from_secs(30)),
        ("Wronskian", criterion_7, Duration::from_secs(30)),
        ("inversion and asymptotics", criterion_8, Duration::from_secs(30)),
        ("Bethe roots", criterion_9, Duration::from_secs(30)),
        ("generating function", criterion_10, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + k as u64);
        let start = Instant::now();
        let outcome = run(&mut rng);
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(o) => (o.worst <= 1.0 && elapsed <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<28} {}  {detail}; {:.2} s (budget {} s)",
            k + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
