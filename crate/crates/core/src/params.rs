//! Model parameters shared by every operator builder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qkernel::{is_finite, QComplex};

/// Parameter bundle `(q, ζ, I, φ, λ)`.
///
/// `zeta = q^{I/2}`. When `spin_int` is present the model is the
/// finite-dimensional spin `I/2` chain and `zeta^2` must equal `q^I`;
/// otherwise `zeta` is free and the site spaces are Verma modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub q: QComplex,
    pub zeta: QComplex,
    pub spin_int: Option<usize>,
    pub phi: QComplex,
    pub lambda: QComplex,
}

impl ModelParams {
    /// Generic complex spin.
    pub fn generic(q: QComplex, zeta: QComplex, phi: QComplex, lambda: QComplex) -> Result<Self> {
        let p = ModelParams {
            q,
            zeta,
            spin_int: None,
            phi,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    /// Integer `I`, with `zeta = exp(I/2 · log q)` on the principal branch.
    pub fn integer(q: QComplex, spin: usize, phi: QComplex, lambda: QComplex) -> Result<Self> {
        let zeta = (q.ln() * (spin as f64 / 2.0)).exp();
        let p = ModelParams {
            q,
            zeta,
            spin_int: Some(spin),
            phi,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("q", self.q),
            ("zeta", self.zeta),
            ("phi", self.phi),
            ("lambda", self.lambda),
        ] {
            if !is_finite(v) {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
            if v.norm() == 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be non-zero")));
            }
        }
        let aq = self.q.norm();
        if aq >= 1.0 {
            return Err(Error::InvalidParams(format!("need 0 < |q| < 1, got |q| = {aq}")));
        }
        if let Some(spin) = self.spin_int {
            let dev = (self.zeta * self.zeta - self.q.powi(spin as i32)).norm();
            if dev >= 1e-12 {
                return Err(Error::InvalidParams(format!(
                    "zeta^2 differs from q^I by {dev:e} for I = {spin}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: QComplex) -> Self {
        ModelParams { lambda, ..*self }
    }

    pub fn with_phi(&self, phi: QComplex) -> Self {
        ModelParams { phi, ..*self }
    }

    /// `q^I`, read as `zeta^2` so it stays meaningful for complex `I`.
    pub fn q_spin(&self) -> QComplex {
        self.zeta * self.zeta
    }

    pub fn is_integer(&self) -> bool {
        self.spin_int.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::c64;

    #[test]
    fn integer_zeta_squares_to_q_power() {
        let q = c64(0.4, 0.3);
        for spin in 0..5 {
            let p = ModelParams::integer(q, spin, c64(1.5, 0.0), c64(0.7, 0.2)).unwrap();
            assert!((p.q_spin() - q.powi(spin as i32)).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let one = c64(1.0, 0.0);
        assert!(ModelParams::generic(c64(1.0, 0.0), one, one, one).is_err());
        assert!(ModelParams::generic(c64(0.5, 0.0), one, c64(0.0, 0.0), one).is_err());
        let mut p = ModelParams::integer(c64(0.5, 0.0), 2, one, one).unwrap();
        p.zeta = c64(0.7, 0.0);
        assert!(p.validate().is_err());
    }
}
