//! Transfer matrices and Baxter Q-operators of the periodic XXZ / six-vertex
//! chain with arbitrary complex spin and a horizontal field, together with
//! numerical checks of the operator identities that tie them together.
//!
//! The state space of `M` sites is the polynomial ring in `x_1..x_M`; every
//! operator preserves total degree, so all work happens on a finite sector
//! `W_l` (see [`sector`]). For integer spin `I` the exponents are capped at
//! `I` and the chain is the ordinary spin `I/2` model.
//!
//! ```
//! use std::sync::Arc;
//! use sixvertex_q::{c64, enumerate_basis, transfer::build_transfer, ModelParams};
//!
//! let p = ModelParams::generic(c64(0.5, 0.1), c64(0.7, 0.2), c64(1.3, 0.0), c64(0.9, 0.4))?;
//! let basis = Arc::new(enumerate_basis(2, 1, None)?);
//! let t = build_transfer(&p, basis)?;
//! assert_eq!(t.dim(), 2);
//! # Ok::<(), sixvertex_q::Error>(())
//! ```

pub mod aplus_operator;
pub mod cli;
pub mod error;
pub mod params;
pub mod qf_operator;
pub mod qkernel;
pub mod sector;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use qkernel::{c64, QComplex};
pub use sector::{enumerate_basis, Monomial, OperatorMatrix, SectorBasis};

// The guide's code blocks run as doc-tests so the book cannot drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sectors.md")]
    mod sectors {}
    #[doc = include_str!("../../../book/src/transfer.md")]
    mod transfer {}
    #[doc = include_str!("../../../book/src/qf.md")]
    mod qf {}
    #[doc = include_str!("../../../book/src/aplus.md")]
    mod aplus {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
