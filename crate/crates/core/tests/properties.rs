//! Structural invariants over randomly drawn parameters.

use std::sync::Arc;

use proptest::prelude::*;

use sixvertex_q::qf_operator::build_qf;
use sixvertex_q::qkernel::{geom_identity_residual, qpoch_n};
use sixvertex_q::sector::max_norm;
use sixvertex_q::transfer::{build_transfer, transfer_with_leak};
use sixvertex_q::verify::{
    bethe_roots_with, commutativity_residual, run_suite, sears_symmetry_residual, BetheOptions, CommutatorPair,
    EvalOptions, RunConfig, Suite,
};
use sixvertex_q::{enumerate_basis, ModelParams, QComplex, SectorBasis};

fn cplx(rmin: f64, rmax: f64) -> impl Strategy<Value = QComplex> {
    (rmin..rmax, -3.1f64..3.1).prop_map(|(r, t)| QComplex::from_polar(r, t))
}

fn generic() -> impl Strategy<Value = ModelParams> {
    (cplx(0.35, 0.65), cplx(0.6, 0.9), cplx(0.6, 2.0), cplx(0.6, 1.6))
        .prop_map(|(q, z, phi, lam)| ModelParams::generic(q, z, phi, lam).unwrap())
}

fn basis(sites: usize, degree: usize, cap: Option<usize>) -> Arc<SectorBasis> {
    Arc::new(enumerate_basis(sites, degree, cap).unwrap())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_size_and_round_trip(sites in 1usize..5, degree in 0usize..6, cap in proptest::option::of(1usize..4)) {
        let b = match enumerate_basis(sites, degree, cap) {
            Ok(b) => b,
            Err(_) => {
                // Only an unreachable degree may be rejected.
                prop_assert!(cap.is_some_and(|c| degree > c * sites));
                return Ok(());
            }
        };
        if cap.is_none() {
            prop_assert_eq!(b.len(), binomial(degree + sites - 1, sites - 1));
        }
        for (k, m) in b.members().iter().enumerate() {
            prop_assert_eq!(m.degree(), degree);
            prop_assert!(cap.is_none_or(|c| m.exponents().iter().all(|&e| e <= c)));
            prop_assert_eq!(b.index_of(m).unwrap(), k);
        }
    }

    #[test]
    fn transfer_never_leaves_the_sector(p in generic(), sites in 1usize..4, degree in 0usize..4) {
        let (_, leak) = transfer_with_leak(&p, basis(sites, degree, None)).unwrap();
        prop_assert_eq!(leak, 0.0);
    }

    #[test]
    fn capped_transfer_leak_is_roundoff(q in cplx(0.35, 0.65), phi in cplx(0.6, 2.0), lam in cplx(0.6, 1.6),
                                        spin in 1usize..3, sites in 1usize..4, degree in 0usize..4) {
        prop_assume!(degree <= spin * sites);
        let p = ModelParams::integer(q, spin, phi, lam).unwrap();
        let (t, leak) = transfer_with_leak(&p, basis(sites, degree, Some(spin))).unwrap();
        prop_assert!(leak < 1e-13 * t.max_norm().max(1.0), "leak {}", leak);
    }

    #[test]
    fn transfer_matrices_commute(p in generic(), mu in cplx(0.6, 1.6), sites in 1usize..4, degree in 0usize..4) {
        let b = basis(sites, degree, None);
        let r = commutativity_residual(&p, b, p.lambda, mu, CommutatorPair::TT, &EvalOptions::default()).unwrap();
        prop_assert!(r < 1e-11, "{}", r);
    }

    #[test]
    fn qf_family_commutes(p in generic(), mu in cplx(0.6, 1.6), sites in 1usize..4, degree in 0usize..4) {
        let b = basis(sites, degree, None);
        for pair in [CommutatorPair::QfQf, CommutatorPair::QfT] {
            let r = commutativity_residual(&p, b.clone(), p.lambda, mu, pair, &EvalOptions::default()).unwrap();
            prop_assert!(r < 1e-11, "{}: {}", pair.label(), r);
        }
    }

    #[test]
    fn composition_is_symmetric(p in generic(), mu in cplx(0.6, 1.6)) {
        prop_assert!(sears_symmetry_residual(&p, p.lambda, mu, 5).unwrap() < 1e-11);
    }

    #[test]
    fn qf_is_identity_at_zeta(p in generic(), sites in 1usize..4, degree in 0usize..4) {
        let b = basis(sites, degree, None);
        let qz = build_qf(&p.with_lambda(p.zeta), b.clone()).unwrap();
        let n = b.len();
        prop_assert!(max_norm(&(qz.entries - nalgebra::DMatrix::<QComplex>::identity(n, n))) < 1e-13);
    }

    #[test]
    fn qpoch_splits(x in cplx(0.1, 3.0), q in cplx(0.2, 0.9), a in 0usize..8, b in 0usize..8) {
        let whole = qpoch_n(x, q, a + b);
        let split = qpoch_n(x, q, a) * qpoch_n(x * q.powi(a as i32), q, b);
        prop_assert!((whole - split).norm() <= 1e-13 * whole.norm().max(split.norm()).max(1.0));
    }

    #[test]
    fn geometric_identity(i in 0usize..7, x in cplx(0.3, 3.0), q in cplx(0.2, 0.8)) {
        prop_assert!(geom_identity_residual(i, x, q).unwrap() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn bethe_roots_ignore_node_order(q in cplx(0.4, 0.6), phi in cplx(1.3, 2.0), degree in 1usize..3, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let p = ModelParams::integer(q, 1, phi, QComplex::new(0.9, 0.3)).unwrap();
        let b = basis(2, degree, Some(1));
        let lam_ref = QComplex::new(0.85, 0.45);
        let natural = bethe_roots_with(&p, b.clone(), lam_ref, &BetheOptions::default()).unwrap();
        let mut order: Vec<usize> = (0..16).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = bethe_roots_with(&p, b, lam_ref, &BetheOptions { node_order: Some(order) }).unwrap();
        prop_assert_eq!(natural.eigen.len(), shuffled.eigen.len());
        for (a, s) in natural.eigen.iter().zip(&shuffled.eigen) {
            prop_assert_eq!(a.roots.len(), s.roots.len());
            for r in &a.roots {
                let nearest = s.roots.iter().map(|t| (t - r).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(nearest < 1e-7 * r.norm().max(1.0), "root {} moved by {}", r, nearest);
            }
        }
    }
}

#[test]
fn transfer_is_deterministic() {
    let p = ModelParams::generic(QComplex::new(0.5, 0.1), QComplex::new(0.7, 0.3), QComplex::new(1.5, 0.2), QComplex::new(0.9, 0.4)).unwrap();
    let b = basis(3, 3, None);
    assert_eq!(build_transfer(&p, b.clone()).unwrap().entries, build_transfer(&p, b).unwrap().entries);
}

#[test]
fn suite_runs_are_reproducible() {
    let config = RunConfig {
        suites: vec![Suite::Tq, Suite::Commute, Suite::Bethe, Suite::Factorize],
        ..RunConfig::default()
    };
    let strip = |mut r: sixvertex_q::verify::SuiteReport| {
        for s in &mut r.suites {
            s.ms = 0.0;
        }
        serde_json::to_value(&r.suites).unwrap()
    };
    let a = strip(run_suite(&config).unwrap());
    let b = strip(run_suite(&config).unwrap());
    assert_eq!(a, b);
}
