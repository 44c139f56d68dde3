#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sixvertex_q::{c64, ModelParams, QComplex};

pub fn polar(rng: &mut ChaCha8Rng, rmin: f64, rmax: f64) -> QComplex {
    QComplex::from_polar(rng.gen_range(rmin..rmax), rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Generic complex spin with moderate magnitudes and a field inside the A₊ trace region for l ≤ 3.
pub fn generic_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let q = polar(rng, 0.35, 0.6);
    let zeta = polar(rng, 0.6, 0.9);
    let phi = polar(rng, 2.5, 3.5);
    let lambda = polar(rng, 0.6, 1.6);
    ModelParams::generic(q, zeta, phi, lambda).unwrap()
}

pub fn integer_params(q: QComplex, spin: usize, phi: QComplex) -> ModelParams {
    ModelParams::integer(q, spin, phi, c64(0.9, 0.3)).unwrap()
}

/// Field with `|φ^{∓2M} q^{±(IM-2l)}| = scale^{-2M}`: inside the A₊ region for
/// `scale > 1`, inside the A₋ region for `scale < 1`.
pub fn field_for(q: QComplex, spin: usize, sites: usize, degree: usize, scale: f64) -> QComplex {
    let e = (spin as f64 * sites as f64 - 2.0 * degree as f64) / (2.0 * sites as f64);
    QComplex::from_polar(scale * q.norm().powf(e), 0.2)
}
