use super::{ensure_finite, qpoch_n, CompensatedSum, QComplex};
use crate::error::{Error, Result};

/// Parameters of a terminating series `_{r+1}φ_r(q^{-n}; a_1..a_r; b_1..b_r | q, z)`.
///
/// The terminating numerator parameter `q^{-n}` is implicit in `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub numer: Vec<QComplex>,
    pub denom: Vec<QComplex>,
    pub degree: usize,
    pub base: QComplex,
    pub arg: QComplex,
}

impl SeriesSpec {
    pub fn new(
        numer: Vec<QComplex>,
        denom: Vec<QComplex>,
        degree: usize,
        base: QComplex,
        arg: QComplex,
    ) -> Self {
        Self {
            numer,
            denom,
            degree,
            base,
            arg,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.numer.len() != self.denom.len() {
            return Err(Error::InvalidParams(format!(
                "series needs as many numerator as denominator parameters ({} vs {})",
                self.numer.len(),
                self.denom.len()
            )));
        }
        if self.base.norm() == 0.0 {
            return Err(Error::InvalidParams("series base must be non-zero".into()));
        }
        Ok(())
    }

    /// Common factor `z^k (q^{-n};q)_k / (q;q)_k` of the k-th term.
    fn leading(&self, k: usize) -> QComplex {
        let q = self.base;
        let top = q.powi(-(self.degree as i32));
        self.arg.powi(k as i32) * qpoch_n(top, q, k) / qpoch_n(q, q, k)
    }
}

/// Regularized terminating series
/// `Σ_{k=0}^{n} z^k (q^{-n};q)_k/(q;q)_k ∏_s (a_s;q)_k (b_s q^k;q)_{n-k}`.
///
/// Finite for every choice of `b_s`, including `b_s = q^{-m}`.
pub fn phi_regularized(spec: &SeriesSpec) -> Result<QComplex> {
    spec.validate()?;
    let q = spec.base;
    let n = spec.degree;
    let mut acc = CompensatedSum::new();
    for k in 0..=n {
        let mut t = spec.leading(k);
        let qk = q.powi(k as i32);
        for (a, b) in spec.numer.iter().zip(&spec.denom) {
            t *= qpoch_n(*a, q, k) * qpoch_n(*b * qk, q, n - k);
        }
        acc.add(t);
    }
    ensure_finite(acc.value(), "phi_regularized")
}

/// Relative size below which a denominator factor `1 - b q^j` counts as zero.
const POLE_TOL: f64 = 1e-13;

/// Standard terminating series
/// `Σ_{k=0}^{n} z^k (q^{-n};q)_k/(q;q)_k ∏_s (a_s;q)_k/(b_s;q)_k`.
pub fn phi_standard(spec: &SeriesSpec) -> Result<QComplex> {
    spec.validate()?;
    let q = spec.base;
    let n = spec.degree;
    for (s, b) in spec.denom.iter().enumerate() {
        let mut bq = *b;
        // (b;q)_k for k <= n uses factors j = 0..n-1.
        for j in 0..n {
            if (QComplex::new(1.0, 0.0) - bq).norm() <= POLE_TOL * bq.norm().max(1.0) {
                return Err(Error::Pole { param: s, k: j });
            }
            bq *= q;
        }
    }
    let mut acc = CompensatedSum::new();
    for k in 0..=n {
        let mut t = spec.leading(k);
        for (a, b) in spec.numer.iter().zip(&spec.denom) {
            t *= qpoch_n(*a, q, k) / qpoch_n(*b, q, k);
        }
        acc.add(t);
    }
    ensure_finite(acc.value(), "phi_standard")
}
