//! Command-line arguments and their translation into a [`RunConfig`].

use std::path::PathBuf;

use clap::Parser;

use crate::aplus_operator::TruncationPolicy;
use crate::error::{Error, Result};
use crate::qkernel::QComplex;
use crate::verify::{RunConfig, SpinMode, Suite};

/// Verify Q-operator identities of the XXZ chain on small sectors and write a JSON report.
#[derive(Debug, Parser)]
#[command(name = "sixvertex-q", version)]
pub struct Args {
    /// Number of lattice sites M.
    #[arg(long = "sites", default_value_t = 2)]
    pub sites: usize,

    /// Comma-separated sector degrees l.
    #[arg(long, conflicts_with = "sector_max")]
    pub sectors: Option<String>,

    /// Run every sector 0..=L.
    #[arg(long = "sector-max")]
    pub sector_max: Option<usize>,

    /// Integer spin parameter I (site spin I/2).
    #[arg(long = "spin-int", conflicts_with = "zeta")]
    pub spin_int: Option<usize>,

    /// Complex ζ = q^{I/2} as `re,im` (generic spin).
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<String>,

    /// Deformation parameter q as `re,im`, with |q| < 1.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,

    /// Horizontal field φ as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,

    /// Spectral parameter `re,im`; repeat for a grid.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "lambda_circle")]
    pub lambda: Vec<String>,

    /// Grid of n points on the circle |λ| = r, as `r,n`.
    #[arg(long = "lambda-circle")]
    pub lambda_circle: Option<String>,

    /// Relative tolerance of the Fock-trace truncation.
    #[arg(long = "trunc-tol")]
    pub trunc_tol: Option<f64>,

    /// Maximal number of Fock-trace terms.
    #[arg(long = "trunc-max")]
    pub trunc_max: Option<usize>,

    /// Comma-separated suites: tq, wronskian, commute, factorize, inversion,
    /// asymptotics, genfun, askeyroy, bethe, all.
    #[arg(long, default_value = "all")]
    pub suites: String,

    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Directory for CSV dumps of the operator matrices.
    #[arg(long = "dump-matrices")]
    pub dump_matrices: Option<PathBuf>,

    /// Warn about residuals that pass by less than a factor 10.
    #[arg(long = "precision-warn")]
    pub precision_warn: bool,
}

/// Parses `re,im` (or a bare real number).
pub fn parse_complex(s: &str) -> Result<QComplex> {
    let bad = || Error::InvalidParams(format!("expected a complex number `re,im`, got `{s}`"));
    let mut parts = s.split(',').map(str::trim);
    let re: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(t) => t.parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(QComplex::new(re, im))
}

fn parse_sectors(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| Error::InvalidParams(format!("bad sector `{p}`")))
        })
        .collect()
}

fn parse_circle(s: &str) -> Result<Vec<QComplex>> {
    let bad = || Error::InvalidParams(format!("expected `r,n` for --lambda-circle, got `{s}`"));
    let (r, n) = s.split_once(',').ok_or_else(bad)?;
    let r: f64 = r.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !(r > 0.0) {
        return Err(bad());
    }
    // Offset by half a step so no node lands on the real axis.
    Ok((0..n)
        .map(|j| QComplex::from_polar(r, std::f64::consts::PI * (2.0 * j as f64 + 0.5) / n as f64))
        .collect())
}

impl Args {
    /// Builds and validates the run configuration.
    pub fn into_config(self) -> Result<RunConfig> {
        let defaults = RunConfig::default();
        let sectors = match (&self.sectors, self.sector_max) {
            (Some(s), _) => parse_sectors(s)?,
            (None, Some(max)) => (0..=max).collect(),
            (None, None) => defaults.sectors.clone(),
        };
        let spin = match (self.spin_int, &self.zeta) {
            (Some(i), _) => SpinMode::Integer(i),
            (None, Some(z)) => SpinMode::Complex(parse_complex(z)?),
            (None, None) => defaults.spin,
        };
        let lambdas = if let Some(c) = &self.lambda_circle {
            parse_circle(c)?
        } else if !self.lambda.is_empty() {
            self.lambda.iter().map(|s| parse_complex(s)).collect::<Result<_>>()?
        } else {
            defaults.lambdas.clone()
        };
        let mut truncation = TruncationPolicy::default();
        if let Some(t) = self.trunc_tol {
            truncation.tol = t;
        }
        if let Some(n) = self.trunc_max {
            truncation.n_max = n;
            truncation.n_min = truncation.n_min.min(n);
        }
        let config = RunConfig {
            sites: self.sites,
            sectors,
            spin,
            q: self.q.as_deref().map(parse_complex).transpose()?.unwrap_or(defaults.q),
            phi: self.phi.as_deref().map(parse_complex).transpose()?.unwrap_or(defaults.phi),
            lambdas,
            truncation,
            suites: Suite::parse_list(&self.suites)?,
            out: self.out,
            dump_matrices: self.dump_matrices,
            precision_warn: self.precision_warn,
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> std::result::Result<Args, clap::Error> {
        Args::try_parse_from(std::iter::once("sixvertex-q").chain(list.iter().copied()))
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0.5,-0.25").unwrap(), QComplex::new(0.5, -0.25));
        assert_eq!(parse_complex("2").unwrap(), QComplex::new(2.0, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn spin_modes_are_exclusive() {
        assert!(args(&["--spin-int", "1", "--zeta", "0.5,0.1"]).is_err());
        let cfg = args(&["--spin-int", "2", "--sector-max", "2"]).unwrap().into_config().unwrap();
        assert_eq!(cfg.spin, SpinMode::Integer(2));
        assert_eq!(cfg.sectors, vec![0, 1, 2]);
    }

    #[test]
    fn lambda_grid() {
        let cfg = args(&["--lambda", "0.5,0.5", "--lambda", "-1,0.2"]).unwrap().into_config().unwrap();
        assert_eq!(cfg.lambdas.len(), 2);
        let cfg = args(&["--lambda-circle", "1.5,4"]).unwrap().into_config().unwrap();
        assert!(cfg.lambdas.iter().all(|l| (l.norm() - 1.5).abs() < 1e-14));
    }

    #[test]
    fn invalid_q_is_config_error() {
        assert!(args(&["--q", "1.2,0"]).unwrap().into_config().is_err());
    }
}
