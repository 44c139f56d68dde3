use super::{ensure_finite, QComplex, INFINITE_PRODUCT_CUTOFF};
use crate::error::{Error, Result};

/// Length of a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Length {
    Finite(usize),
    Infinite,
}

/// Value of `(x;q)_n` together with an a-priori bound on the truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pochhammer {
    pub value: QComplex,
    /// Bound on `|log(true) - log(value)|`; zero for finite products.
    pub tail_bound: f64,
    /// Number of factors actually multiplied.
    pub factors: usize,
}

/// `(x;q)_n = prod_{k<n} (1 - x q^k)` by direct product.
pub fn qpoch_n(x: QComplex, q: QComplex, n: usize) -> QComplex {
    let mut acc = QComplex::new(1.0, 0.0);
    let mut xk = x;
    for _ in 0..n {
        acc *= QComplex::new(1.0, 0.0) - xk;
        xk *= q;
    }
    acc
}

/// `(x;q)_n` for finite `n`, or the infinite product for [`Length::Infinite`].
pub fn qpoch(x: QComplex, q: QComplex, n: Length) -> Result<Pochhammer> {
    match n {
        Length::Finite(n) => Ok(Pochhammer {
            value: ensure_finite(qpoch_n(x, q, n), "qpoch")?,
            tail_bound: 0.0,
            factors: n,
        }),
        Length::Infinite => qpoch_inf(x, q),
    }
}

/// Infinite product `(x;q)_∞`, truncated once `|x q^k| < 1e-18`.
///
/// The neglected factors satisfy `|log(1 - w)| <= 2|w|` for `|w| <= 1/2`, so the
/// log-tail is bounded by `2|x q^K| / (1 - |q|)`.
pub fn qpoch_inf(x: QComplex, q: QComplex) -> Result<Pochhammer> {
    let aq = q.norm();
    if aq >= 1.0 {
        return Err(Error::Domain(format!(
            "infinite q-Pochhammer needs |q| < 1, got |q| = {aq}"
        )));
    }
    let mut acc = QComplex::new(1.0, 0.0);
    let mut xk = x;
    let mut factors = 0usize;
    // |q| close to 1 needs many factors; cap well above any sensible use.
    const MAX_FACTORS: usize = 1_000_000;
    while xk.norm() >= INFINITE_PRODUCT_CUTOFF {
        acc *= QComplex::new(1.0, 0.0) - xk;
        xk *= q;
        factors += 1;
        if factors > MAX_FACTORS {
            return Err(Error::Domain(format!(
                "infinite q-Pochhammer did not reach cutoff within {MAX_FACTORS} factors"
            )));
        }
    }
    let tail_bound = 2.0 * xk.norm() / (1.0 - aq);
    Ok(Pochhammer {
        value: ensure_finite(acc, "qpoch_inf")?,
        tail_bound,
        factors,
    })
}

/// `(x;q)_n` for signed `n`, with `(x;q)_{-k} = 1 / (x q^{-k}; q)_k`.
pub fn qpoch_signed(x: QComplex, q: QComplex, n: i64) -> Result<QComplex> {
    if n >= 0 {
        return ensure_finite(qpoch_n(x, q, n as usize), "qpoch_signed");
    }
    let k = (-n) as usize;
    let den = qpoch_n(x * q.powi(n as i32), q, k);
    if den.norm() == 0.0 {
        return Err(Error::Singular(format!(
            "(x;q)_{n} has a vanishing denominator"
        )));
    }
    ensure_finite(den.inv(), "qpoch_signed")
}
