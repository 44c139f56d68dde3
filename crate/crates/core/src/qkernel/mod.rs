//! Complex scalar substrate: q-Pochhammer symbols, terminating basic
//! hypergeometric series (standard and regularized), and numerical self-tests
//! of the summation and integral identities the operators are built on.
//!
//! All routines work in binary64 complex arithmetic. Sums accumulate their terms
//! in increasing index order through [`CompensatedSum`], so results are
//! reproducible bit for bit across runs.

mod identities;
mod pochhammer;
mod series;

pub use identities::{
    askey_roy_lhs, askey_roy_residual, askey_roy_rhs, geom_identity_residual,
};
pub use pochhammer::{qpoch, qpoch_inf, qpoch_n, qpoch_signed, Length, Pochhammer};
pub use series::{phi_regularized, phi_standard, SeriesSpec};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Complex scalar used for every parameter (q, ζ, φ, λ, series arguments).
pub type QComplex = Complex64;

/// Truncation threshold for infinite products: stop once `|x q^k|` drops below it.
pub const INFINITE_PRODUCT_CUTOFF: f64 = 1e-18;

/// Shorthand constructor.
#[inline]
pub fn c64(re: f64, im: f64) -> QComplex {
    QComplex::new(re, im)
}

/// The bracket `[x] = x - 1/x`.
#[inline]
pub fn bracket(x: QComplex) -> QComplex {
    x - x.inv()
}

pub(crate) fn is_finite(z: QComplex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Returns `z` if finite, otherwise a [`Error::NonFinite`] tagged with `what`.
pub fn ensure_finite(z: QComplex, what: &'static str) -> Result<QComplex> {
    if is_finite(z) {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Flags bases that sit close to a root of unity: `|q^N - 1| < 1e-8` for some `N <= 64`.
pub fn root_of_unity_warning(q: QComplex) -> Option<String> {
    let mut p = QComplex::new(1.0, 0.0);
    for n in 1..=64 {
        p *= q;
        if (p - 1.0).norm() < 1e-8 {
            return Some(format!(
                "q = {}{:+}i is within 1e-8 of a root of unity of order {n}",
                q.re, q.im
            ));
        }
    }
    None
}

/// Neumaier-compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum_re: f64,
    sum_im: f64,
    comp_re: f64,
    comp_im: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: QComplex) {
        neumaier(&mut self.sum_re, &mut self.comp_re, z.re);
        neumaier(&mut self.sum_im, &mut self.comp_im, z.im);
    }

    pub fn value(&self) -> QComplex {
        QComplex::new(self.sum_re + self.comp_re, self.sum_im + self.comp_im)
    }
}

impl FromIterator<QComplex> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = QComplex>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(c64(1.0, 1.0));
        for _ in 0..10 {
            acc.add(c64(1e-16, -1e-16));
        }
        acc.add(c64(-1.0, -1.0));
        let v = acc.value();
        assert!((v.re - 1e-15).abs() < 1e-30);
        assert!((v.im + 1e-15).abs() < 1e-30);
    }

    #[test]
    fn bracket_of_one_vanishes() {
        assert_eq!(bracket(c64(1.0, 0.0)), c64(0.0, 0.0));
    }

    #[test]
    fn root_of_unity_flag() {
        assert!(root_of_unity_warning(c64(0.5, 0.1)).is_none());
        let near = QComplex::from_polar(1.0 - 1e-12, std::f64::consts::PI / 3.0);
        assert!(root_of_unity_warning(near).is_some());
    }
}
