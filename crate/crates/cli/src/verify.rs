//! `verify` and `independence`: sampled oracle checks of the integrals.

use num_traits::Zero;
use serde::Serialize;
use superint::integrals::{IntegralSpec, Observable};
use superint::phase::plane_pairs;
use superint::sampling::{rng_from_seed, sample_from, SamplingBox};
use superint::verify::{
    bracket_suite, identity8_suite, oracle_suite, rank_suite, BracketReport, Identity8Report,
    OracleReport, RankReport, IDENTITY8_MIN_P2,
};
use superint::FSpec;

use crate::config::{Resolved, Thresholds, SCHEMA_VERSION};
use crate::error::{exit, CliError};
use crate::write_json;

/// A suite result together with the bound it was held to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate<T> {
    #[serde(flatten)]
    pub report: T,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub f: String,
    pub dim: usize,
    pub seed: u64,
    pub samples: usize,
    pub rejected: usize,
    pub fd_step: f64,
    pub thresholds: Thresholds,
    pub brackets: Vec<Gate<BracketReport>>,
    pub identity8: Option<Gate<Identity8Report>>,
    pub oracle: Gate<OracleReport>,
    pub ranks: Vec<Gate<RankReport>>,
    pub passed: bool,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub f: String,
    pub dim: usize,
    pub seed: u64,
    pub samples: usize,
    pub rejected: usize,
    pub ranks: Vec<Gate<RankReport>>,
    pub passed: bool,
    pub exit_code: i32,
}

fn gate_exit(passed: bool) -> i32 {
    if passed {
        exit::OK
    } else {
        exit::THRESHOLD
    }
}

impl VerifyReport {
    pub fn compute_exit_code(&self) -> i32 {
        gate_exit(self.passed)
    }
}

impl IndependenceReport {
    pub fn compute_exit_code(&self) -> i32 {
        gate_exit(self.passed)
    }
}

/// The default `[−2, 2]^{2n}` box; collinear states are dropped in higher
/// dimension where the invariant plane is needed.
pub fn verify_box(dim: usize) -> SamplingBox {
    if dim > 2 {
        SamplingBox::default().with_min_l2(1e-2)
    } else {
        SamplingBox::default()
    }
}

fn angular_momenta(dim: usize) -> impl Iterator<Item = IntegralSpec> {
    plane_pairs(dim)
        .into_iter()
        .map(|(i, j)| IntegralSpec::AngularMomentum { i: i + 1, j: j + 1 })
}

/// The constructed integrals whose `F` matches exactly.
pub fn matching_constructions(f: &FSpec) -> Vec<IntegralSpec> {
    let Some(poly) = f.as_poly() else {
        return Vec::new();
    };
    let nonzero: Vec<usize> = poly
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, _)| i + 1)
        .collect();
    let mut candidates = Vec::new();
    if let [degree] = nonzero[..] {
        let gamma = poly.coeff(degree);
        let k = (degree / 2) as u32;
        if degree % 2 == 0 {
            candidates.push(IntegralSpec::CtildeEven {
                k,
                gamma: gamma.clone(),
            });
        } else {
            candidates.push(IntegralSpec::CtildeOdd {
                k,
                gamma: gamma.clone(),
            });
        }
        if degree == 3 {
            candidates.push(IntegralSpec::C3Explicit { gamma });
        }
    }
    if poly.degree() <= 2 && nonzero.len() == 2 {
        candidates.push(IntegralSpec::Zernike {
            gamma1: poly.coeff(1),
            gamma2: poly.coeff(2),
        });
    }
    candidates
        .into_iter()
        .filter(|c| Observable::new(c, f, 2).is_ok())
        .collect()
}

/// `L`, `C₁`, `C₂`, `K₁`, `K₂` and matching constructions in the plane;
/// all `L_ij`, `L²` and the plane `C₁` in higher dimension.
pub fn default_bracket_integrals(f: &FSpec, dim: usize) -> Vec<IntegralSpec> {
    let mut out: Vec<IntegralSpec> = angular_momenta(dim).collect();
    if dim == 2 {
        out.extend([
            IntegralSpec::Cn { n: 1 },
            IntegralSpec::Cn { n: 2 },
            IntegralSpec::KAnalytic { axis: 1 },
            IntegralSpec::KAnalytic { axis: 2 },
        ]);
        out.extend(matching_constructions(f));
    } else {
        out.push(IntegralSpec::AngularMomentumTotal);
        out.push(IntegralSpec::PlaneC1);
    }
    out
}

/// Integrals whose pairwise brackets are compared between the two oracles.
pub fn oracle_integrals(dim: usize) -> Vec<IntegralSpec> {
    let mut out = vec![IntegralSpec::Energy];
    out.extend(angular_momenta(dim));
    if dim == 2 {
        out.extend([
            IntegralSpec::Cn { n: 1 },
            IntegralSpec::KAnalytic { axis: 1 },
            IntegralSpec::KAnalytic { axis: 2 },
        ]);
    } else {
        out.push(IntegralSpec::AngularMomentumTotal);
        out.push(IntegralSpec::PlaneC1);
    }
    out
}

/// `(integrals, expected rank)` for each independence test.
pub fn rank_sets(dim: usize) -> Vec<(Vec<IntegralSpec>, usize)> {
    if dim == 2 {
        let base = vec![
            IntegralSpec::Energy,
            IntegralSpec::AngularMomentum { i: 1, j: 2 },
            IntegralSpec::Cn { n: 1 },
        ];
        let mut with_c2 = base.clone();
        with_c2.push(IntegralSpec::Cn { n: 2 });
        vec![(base, 3), (with_c2, 3)]
    } else {
        let mut set = vec![IntegralSpec::Energy];
        set.extend(angular_momenta(dim));
        set.push(IntegralSpec::PlaneC1);
        vec![(set, 2 * dim - 1)]
    }
}

fn compile(specs: &[IntegralSpec], f: &FSpec, dim: usize) -> Result<Vec<Observable>, CliError> {
    specs
        .iter()
        .map(|s| {
            Observable::new(s, f, dim).map_err(|e| CliError::Config(format!("integral {s}: {e}")))
        })
        .collect()
}

fn run_ranks(
    cfg: &Resolved,
    states: &[superint::CartesianState],
) -> Result<Vec<Gate<RankReport>>, CliError> {
    let min_fraction = cfg.raw.thresholds.rank_fraction;
    rank_sets(cfg.dim)
        .into_iter()
        .map(|(specs, expected)| {
            let obs = compile(&specs, &cfg.f, cfg.dim)?;
            let report = rank_suite(&obs, states, cfg.raw.verify.rank_tol, expected);
            let passed = report.samples > 0 && report.fraction_at_expected >= min_fraction;
            Ok(Gate {
                report,
                threshold: min_fraction,
                passed,
            })
        })
        .collect()
}

/// Bracket, identity and oracle suites plus the rank tests; writes
/// `verify_report.json`.
pub fn cmd_verify(cfg: &Resolved) -> Result<VerifyReport, CliError> {
    let raw = &cfg.raw;
    let settings = &raw.verify;
    let t = raw.thresholds;
    let region = settings.region.unwrap_or_else(|| verify_box(cfg.dim));
    let integrals = match &settings.integrals {
        Some(list) => list.clone(),
        None => default_bracket_integrals(&cfg.f, cfg.dim),
    };
    compile(&integrals, &cfg.f, cfg.dim)?;
    let oracle_obs = compile(&oracle_integrals(cfg.dim), &cfg.f, cfg.dim)?;

    let mut rng = rng_from_seed(raw.seed);
    let sampled = sample_from(&mut rng, settings.samples, cfg.dim, &region)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let states = &sampled.states;

    let brackets = integrals
        .iter()
        .map(|spec| {
            let report = bracket_suite(&cfg.f, spec, states, settings.fd_step)
                .map_err(|e| CliError::Config(format!("integral {spec}: {e}")))?;
            let passed = report.samples > 0 && report.max_abs_residual <= t.bracket;
            Ok(Gate {
                report,
                threshold: t.bracket,
                passed,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let identity8 = if cfg.dim == 2 {
        let loose = SamplingBox::momentum_only(region.half_width, IDENTITY8_MIN_P2);
        let set = sample_from(&mut rng, settings.samples, 2, &loose)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let report = identity8_suite(&cfg.f, &set.states);
        let passed = report.samples > 0 && report.max_abs_residual <= t.identity8;
        Some(Gate {
            report,
            threshold: t.identity8,
            passed,
        })
    } else {
        None
    };

    let report = oracle_suite(&oracle_obs, states, &mut rng, settings.fd_step);
    let passed = report.pairs > 0 && report.max_relative_discrepancy <= t.oracle;
    let oracle = Gate {
        report,
        threshold: t.oracle,
        passed,
    };

    let ranks = run_ranks(cfg, states)?;

    let passed = brackets.iter().all(|g| g.passed)
        && identity8.as_ref().is_none_or(|g| g.passed)
        && oracle.passed
        && ranks.iter().all(|g| g.passed);
    let mut report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        f: cfg.f.to_string(),
        dim: cfg.dim,
        seed: raw.seed,
        samples: states.len(),
        rejected: sampled.rejected,
        fd_step: settings.fd_step,
        thresholds: t,
        brackets,
        identity8,
        oracle,
        ranks,
        passed,
        exit_code: 0,
    };
    report.exit_code = report.compute_exit_code();
    std::fs::create_dir_all(&cfg.out)?;
    write_json(&cfg.out.join("verify_report.json"), &report)?;
    Ok(report)
}

/// Rank tests only; writes `independence_report.json`.
pub fn cmd_independence(cfg: &Resolved) -> Result<IndependenceReport, CliError> {
    let raw = &cfg.raw;
    let region = raw.verify.region.unwrap_or_else(|| verify_box(cfg.dim));
    let mut rng = rng_from_seed(raw.seed);
    let sampled = sample_from(&mut rng, raw.verify.samples, cfg.dim, &region)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let ranks = run_ranks(cfg, &sampled.states)?;
    let passed = ranks.iter().all(|g| g.passed);
    let mut report = IndependenceReport {
        schema_version: SCHEMA_VERSION,
        command: "independence",
        f: cfg.f.to_string(),
        dim: cfg.dim,
        seed: raw.seed,
        samples: sampled.states.len(),
        rejected: sampled.rejected,
        ranks,
        passed,
        exit_code: 0,
    };
    report.exit_code = report.compute_exit_code();
    std::fs::create_dir_all(&cfg.out)?;
    write_json(&cfg.out.join("independence_report.json"), &report)?;
    Ok(report)
}
