//! `construct`: build an integral symbolically and certify `{C, H} = 0`.

use std::path::Path;

use num_rational::BigRational;
use serde::Serialize;
use superint::rational::{format_rational, parse_rational};
use superint::symbolic::{
    construct_monomial, construct_zernike, h_symbolic, poisson_bracket, SymbolicError, TrigPoly,
};
use superint::FSpec;

use crate::config::SCHEMA_VERSION;
use crate::error::{exit, CliError};
use crate::write_json;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstructTarget {
    /// `F = γ s^N`.
    Monomial { n: u32, gamma: BigRational },
    /// `F = γ₁ s + γ₂ s²`.
    Zernike {
        gamma1: BigRational,
        gamma2: BigRational,
    },
}

impl ConstructTarget {
    pub fn monomial(n: u32, gamma: &str) -> Result<Self, CliError> {
        if n == 0 {
            return Err(CliError::Config("N must be at least 1".into()));
        }
        Ok(ConstructTarget::Monomial {
            n,
            gamma: rational_arg("gamma", gamma)?,
        })
    }

    pub fn zernike(gamma1: &str, gamma2: &str) -> Result<Self, CliError> {
        Ok(ConstructTarget::Zernike {
            gamma1: rational_arg("gamma1", gamma1)?,
            gamma2: rational_arg("gamma2", gamma2)?,
        })
    }

    pub fn f(&self) -> FSpec {
        match self {
            ConstructTarget::Monomial { n, gamma } => FSpec::monomial(*n as usize, gamma.clone()),
            ConstructTarget::Zernike { gamma1, gamma2 } => FSpec::poly(
                BigRational::from_integer(0.into()),
                vec![gamma1.clone(), gamma2.clone()],
            ),
        }
    }
}

fn rational_arg(name: &str, text: &str) -> Result<BigRational, CliError> {
    parse_rational(text).map_err(|e| CliError::Config(format!("{name}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub family: &'static str,
    pub n: Option<u32>,
    pub gamma: Vec<String>,
    pub f: String,
    pub integral_pretty: String,
    pub integral: TrigPoly,
    pub bracket_with_h_is_zero: bool,
    pub bracket_with_h: String,
    pub momentum_degree: i64,
    pub exit_code: i32,
}

impl ConstructReport {
    pub fn compute_exit_code(&self) -> i32 {
        if self.bracket_with_h_is_zero {
            exit::OK
        } else {
            exit::THRESHOLD
        }
    }
}

fn symbolic_error(e: SymbolicError) -> CliError {
    match e {
        SymbolicError::DivisibilityFailure(m) => CliError::Divisibility(m),
        SymbolicError::DegenerateChoice | SymbolicError::InvalidParameter(_) => {
            CliError::Config(e.to_string())
        }
        e => CliError::Runtime(e.to_string()),
    }
}

/// Constructs the integral, brackets it with `H` exactly and optionally
/// writes `construct_report.json` to `out`.
pub fn cmd_construct(
    target: &ConstructTarget,
    out: Option<&Path>,
) -> Result<ConstructReport, CliError> {
    let f = target.f();
    let (integral, family, n, gamma) = match target {
        ConstructTarget::Monomial { n, gamma } => (
            construct_monomial(*n, gamma),
            "monomial",
            Some(*n),
            vec![format_rational(gamma)],
        ),
        ConstructTarget::Zernike { gamma1, gamma2 } => (
            construct_zernike(gamma1, gamma2),
            "zernike",
            None,
            vec![format_rational(gamma1), format_rational(gamma2)],
        ),
    };
    let integral = integral.map_err(symbolic_error)?;
    let h = h_symbolic(&f).map_err(symbolic_error)?;
    let bracket = poisson_bracket(&integral, &h).map_err(symbolic_error)?;
    let mut report = ConstructReport {
        schema_version: SCHEMA_VERSION,
        command: "construct",
        family,
        n,
        gamma,
        f: f.to_string(),
        integral_pretty: integral.to_string(),
        momentum_degree: integral.momentum_degree(),
        integral,
        bracket_with_h_is_zero: bracket.is_zero(),
        bracket_with_h: bracket.to_string(),
        exit_code: 0,
    };
    report.exit_code = report.compute_exit_code();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("construct_report.json"), &report)?;
    }
    Ok(report)
}
