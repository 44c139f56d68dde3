//! Charge sectors `W_l`: monomials of total degree `l` in `M` site variables,
//! optionally with every exponent capped at an integer spin `I`.
//!
//! A monomial `x_1^{i_1} … x_M^{i_M}` stands for the basis vector
//! `v_{i_1} ⊗ … ⊗ v_{i_M}`. Members are kept in graded-lexicographic order with
//! the leftmost site most significant, so `(2,0)` precedes `(1,1)` precedes `(0,2)`.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qkernel::QComplex;

/// Exponent vector (site occupation numbers).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<usize>);

impl Monomial {
    pub fn new(exponents: Vec<usize>) -> Self {
        Monomial(exponents)
    }

    pub fn sites(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[usize] {
        &self.0
    }

    /// `i_k -> cap - i_k` on every site.
    pub fn mirrored(&self, cap: usize) -> Monomial {
        Monomial(self.0.iter().map(|&e| cap - e).collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Ordered basis of one sector.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    sites: usize,
    degree: usize,
    cap: Option<usize>,
    members: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl PartialEq for SectorBasis {
    fn eq(&self, other: &Self) -> bool {
        self.sites == other.sites
            && self.degree == other.degree
            && self.cap == other.cap
            && self.members == other.members
    }
}

fn compositions(sites: usize, degree: usize, cap: usize, prefix: &mut Vec<usize>, out: &mut Vec<Monomial>) {
    if prefix.len() + 1 == sites {
        if degree <= cap {
            prefix.push(degree);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
        }
        return;
    }
    for e in (0..=degree.min(cap)).rev() {
        prefix.push(e);
        compositions(sites, degree - e, cap, prefix, out);
        prefix.pop();
    }
}

/// Enumerates the sector of degree `degree` over `sites` variables.
pub fn enumerate_basis(sites: usize, degree: usize, cap: Option<usize>) -> Result<SectorBasis> {
    if sites == 0 {
        return Err(Error::InvalidParams("a sector needs at least one site".into()));
    }
    if let Some(c) = cap {
        if degree > sites * c {
            return Err(Error::EmptySector { sites, degree, cap: c });
        }
    }
    let mut members = Vec::new();
    compositions(sites, degree, cap.unwrap_or(degree), &mut Vec::with_capacity(sites), &mut members);
    let index = members.iter().cloned().enumerate().map(|(k, m)| (m, k)).collect();
    Ok(SectorBasis {
        sites,
        degree,
        cap,
        members,
        index,
    })
}

impl SectorBasis {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Monomial] {
        &self.members
    }

    pub fn member(&self, k: usize) -> &Monomial {
        &self.members[k]
    }

    /// Position of `m` in the member ordering.
    pub fn index_of(&self, m: &Monomial) -> Result<usize> {
        self.index
            .get(m)
            .copied()
            .ok_or_else(|| Error::NotFound(m.0.clone()))
    }

    /// Like [`index_of`](Self::index_of) but returns `None` for non-members.
    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Largest exponent any member can carry: the cap, or the degree when uncapped.
    pub fn max_exponent(&self) -> usize {
        self.cap.unwrap_or(self.degree).min(self.degree)
    }
}

/// Dense complex matrix over a sector basis.
///
/// `entries[(r, c)]` is the coefficient of member `r` in the image of member `c`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub basis: Arc<SectorBasis>,
    pub entries: DMatrix<QComplex>,
}

impl OperatorMatrix {
    pub fn zeros(basis: Arc<SectorBasis>) -> Self {
        let n = basis.len();
        OperatorMatrix {
            basis,
            entries: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(basis: Arc<SectorBasis>) -> Self {
        let n = basis.len();
        OperatorMatrix {
            basis,
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn from_entries(basis: Arc<SectorBasis>, entries: DMatrix<QComplex>) -> Self {
        assert_eq!(entries.nrows(), basis.len());
        assert_eq!(entries.ncols(), basis.len());
        OperatorMatrix { basis, entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Max-absolute-entry norm.
    pub fn max_norm(&self) -> f64 {
        max_norm(&self.entries)
    }

    pub fn scaled(&self, s: QComplex) -> OperatorMatrix {
        OperatorMatrix {
            basis: self.basis.clone(),
            entries: &self.entries * s,
        }
    }

    pub fn matmul(&self, rhs: &OperatorMatrix) -> OperatorMatrix {
        debug_assert!(*self.basis == *rhs.basis, "operators live on different sectors");
        OperatorMatrix {
            basis: self.basis.clone(),
            entries: &self.entries * &rhs.entries,
        }
    }

    /// Restriction to the members of `sub` (which must be a subset of this basis).
    pub fn restrict(&self, sub: Arc<SectorBasis>) -> Result<OperatorMatrix> {
        let pos = sub
            .members()
            .iter()
            .map(|m| self.basis.index_of(m))
            .collect::<Result<Vec<_>>>()?;
        let n = pos.len();
        let entries = DMatrix::from_fn(n, n, |r, c| self.entries[(pos[r], pos[c])]);
        Ok(OperatorMatrix { basis: sub, entries })
    }

    /// Writes `row,col,re,im` lines, one per entry, preceded by a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "row,col,re,im")?;
        for c in 0..self.dim() {
            for r in 0..self.dim() {
                let z = self.entries[(r, c)];
                writeln!(out, "{r},{c},{:e},{:e}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Max-absolute-entry norm of a dense complex matrix.
pub fn max_norm(m: &DMatrix<QComplex>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}
