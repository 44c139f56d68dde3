use std::f64::consts::PI;

use super::{ensure_finite, qpoch_inf, qpoch_n, CompensatedSum, QComplex};
use crate::error::{Error, Result};

const SINGULAR_TOL: f64 = 1e-13;

/// Relative residual of the finite summation identity
///
/// `Σ_{k=0}^{i} (q^{-2i};q²)_k/(q²;q²)_k · q^{2ik}/(1 - x q^{-2k}) = -x^{-1} (q²;q²)_i/(x^{-1};q²)_{i+1}`,
///
/// returned as `|LHS - RHS| / (|LHS| + |RHS|)`.
pub fn geom_identity_residual(i: usize, x: QComplex, q: QComplex) -> Result<f64> {
    if x.norm() == 0.0 {
        return Err(Error::Domain("identity needs x != 0".into()));
    }
    let q2 = q * q;
    let one = QComplex::new(1.0, 0.0);
    let top = q2.powi(-(i as i32));
    let mut lhs = CompensatedSum::new();
    for k in 0..=i {
        let den = one - x * q2.powi(-(k as i32));
        if den.norm() < SINGULAR_TOL {
            return Err(Error::Domain(format!("x q^(-2k) = 1 at k = {k}")));
        }
        lhs.add(qpoch_n(top, q2, k) / qpoch_n(q2, q2, k) * q2.powi((i * k) as i32) / den);
    }
    let den = qpoch_n(x.inv(), q2, i + 1);
    if den.norm() < SINGULAR_TOL {
        return Err(Error::Domain("(1/x; q^2)_{i+1} vanishes".into()));
    }
    let rhs = -x.inv() * qpoch_n(q2, q2, i) / den;
    let lhs = ensure_finite(lhs.value(), "geom_identity_residual")?;
    let rhs = ensure_finite(rhs, "geom_identity_residual")?;
    let scale = lhs.norm() + rhs.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((lhs - rhs).norm() / scale)
}

fn check_askey_roy(
    a: QComplex,
    b: QComplex,
    c: QComplex,
    d: QComplex,
    rho: QComplex,
    q: QComplex,
) -> Result<()> {
    if q.norm() >= 1.0 {
        return Err(Error::Domain("Askey-Roy integral needs |q| < 1".into()));
    }
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if v.norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "|{name}| = {} >= 1: the unit circle does not separate the pole sequences",
                v.norm()
            )));
        }
    }
    if (rho * c * d).norm() == 0.0 {
        return Err(Error::Domain("Askey-Roy integral needs rho*c*d != 0".into()));
    }
    Ok(())
}

fn pinf(x: QComplex, q: QComplex) -> Result<QComplex> {
    Ok(qpoch_inf(x, q)?.value)
}

/// Closed-form value
/// `(abcd, ρ, q/ρ, ρc/d, qd/(ρc); q)_∞ / (ac, ad, bc, bd, q; q)_∞`.
pub fn askey_roy_rhs(
    a: QComplex,
    b: QComplex,
    c: QComplex,
    d: QComplex,
    rho: QComplex,
    q: QComplex,
) -> Result<QComplex> {
    check_askey_roy(a, b, c, d, rho, q)?;
    let num = pinf(a * b * c * d, q)?
        * pinf(rho, q)?
        * pinf(q / rho, q)?
        * pinf(rho * c / d, q)?
        * pinf(q * d / (rho * c), q)?;
    let den = pinf(a * c, q)? * pinf(a * d, q)? * pinf(b * c, q)? * pinf(b * d, q)? * pinf(q, q)?;
    ensure_finite(num / den, "askey_roy_rhs")
}

/// `(1/2πi) ∮ f(y) dy/y` over the unit circle by the periodic trapezoidal rule
/// with `npoints` equally spaced nodes.
pub fn askey_roy_lhs(
    a: QComplex,
    b: QComplex,
    c: QComplex,
    d: QComplex,
    rho: QComplex,
    q: QComplex,
    npoints: usize,
) -> Result<QComplex> {
    check_askey_roy(a, b, c, d, rho, q)?;
    if npoints == 0 {
        return Err(Error::InvalidParams("quadrature needs at least one node".into()));
    }
    let mut acc = CompensatedSum::new();
    for j in 0..npoints {
        let y = QComplex::from_polar(1.0, 2.0 * PI * j as f64 / npoints as f64);
        let num = pinf(rho * y / d, q)?
            * pinf(q * d / (rho * y), q)?
            * pinf(rho * c / y, q)?
            * pinf(q * y / (rho * c), q)?;
        let den = pinf(a * y, q)? * pinf(b * y, q)? * pinf(c / y, q)? * pinf(d / y, q)?;
        acc.add(num / den);
    }
    ensure_finite(acc.value() / npoints as f64, "askey_roy_lhs")
}

/// Relative difference `|LHS - RHS| / |RHS|` between the quadrature estimate
/// of the Askey-Roy integral and its closed form.
pub fn askey_roy_residual(
    a: QComplex,
    b: QComplex,
    c: QComplex,
    d: QComplex,
    rho: QComplex,
    q: QComplex,
    npoints: usize,
) -> Result<f64> {
    let lhs = askey_roy_lhs(a, b, c, d, rho, q, npoints)?;
    let rhs = askey_roy_rhs(a, b, c, d, rho, q)?;
    Ok((lhs - rhs).norm() / rhs.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::c64;

    #[test]
    fn identity_at_zero_and_one() {
        let q = c64(0.5, 0.0);
        assert!(geom_identity_residual(0, c64(0.3, 0.4), q).unwrap() < 4e-16);
        assert!(geom_identity_residual(1, c64(2.0, 0.0), q).unwrap() < 1e-14);
    }

    #[test]
    fn identity_pole_is_reported() {
        let q = c64(0.5, 0.0);
        // x q^{-2} = 1 at k = 1
        assert!(geom_identity_residual(2, q * q, q).is_err());
    }

    #[test]
    fn askey_roy_contour_condition() {
        let q = c64(0.5, 0.0);
        let p = c64(0.3, 0.0);
        assert!(askey_roy_residual(c64(1.2, 0.0), p, p, p, c64(0.7, 0.0), q, 64).is_err());
        assert!(askey_roy_residual(p, p, c64(0.0, 0.0), p, c64(0.7, 0.0), q, 64).is_err());
    }

    #[test]
    fn askey_roy_rhs_swap_symmetry() {
        let q = c64(0.5, 0.1);
        let (a, b, c, d, rho) = (c64(0.3, 0.1), c64(-0.2, 0.3), c64(0.25, -0.1), c64(0.4, 0.2), c64(0.7, 0.2));
        let r1 = askey_roy_rhs(a, b, c, d, rho, q).unwrap();
        let r2 = askey_roy_rhs(a, b, d, c, rho * c / d, q).unwrap();
        assert!((r1 - r2).norm() < 1e-13 * r1.norm());
    }
}
