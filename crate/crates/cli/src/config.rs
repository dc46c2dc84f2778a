//! Run configuration.
//!
//! One JSON document drives `simulate`, `verify` and `independence`. Unknown
//! keys are rejected at every level and semantic checks run before any
//! computation starts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use superint::dynamics::IntegratorConfig;
use superint::integrals::IntegralSpec;
use superint::phase::{plane_pairs, StateConfig};
use superint::sampling::SamplingBox;
use superint::verify::{DEFAULT_FD_STEP, DEFAULT_RANK_TOL};
use superint::{CartesianState, FSpec, FSpecConfig};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// The versioned JSON schema for [`RunConfig`].
pub const SCHEMA: &str = include_str!("../schema/run_config.v1.json");

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// `F` as a bare expression string or a typed object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FConfig {
    Text(String),
    Typed(FSpecConfig),
}

impl FConfig {
    pub fn to_fspec(&self) -> Result<FSpec, CliError> {
        let parsed = match self {
            FConfig::Text(text) => FSpec::parse(text),
            FConfig::Typed(cfg) => FSpec::try_from(cfg),
        };
        parsed.map_err(|e| CliError::Config(format!("f: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStates {
    pub count: usize,
    /// Sampling region; the default for trajectories is `[−0.5, 0.5]^{2n}`.
    #[serde(default, rename = "box")]
    pub region: Option<SamplingBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Relative drift bound for `simulate`.
    pub drift: f64,
    /// Bound on `|{C, H}|` from finite differences.
    pub bracket: f64,
    /// Bound on the two-path residual of the `K` identity.
    pub identity8: f64,
    /// Bound on the relative analytic/finite-difference discrepancy.
    pub oracle: f64,
    /// Minimum fraction of samples at the expected rank.
    pub rank_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            drift: 1e-6,
            bracket: 1e-6,
            identity8: 1e-10,
            oracle: 1e-6,
            rank_fraction: 0.95,
        }
    }
}

impl Thresholds {
    /// Replaces every residual tolerance; the rank fraction is kept.
    pub fn override_residuals(&mut self, t: f64) {
        self.drift = t;
        self.bracket = t;
        self.identity8 = t;
        self.oracle = t;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    pub samples: usize,
    pub fd_step: f64,
    pub rank_tol: f64,
    /// Bracket-suite integrals; the default set depends on `F` and `n`.
    pub integrals: Option<Vec<IntegralSpec>>,
    #[serde(rename = "box")]
    pub region: Option<SamplingBox>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            samples: 1000,
            fd_step: DEFAULT_FD_STEP,
            rank_tol: DEFAULT_RANK_TOL,
            integrals: None,
            region: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub f: FConfig,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub initial_states: Vec<StateConfig>,
    #[serde(default)]
    pub random_initial_states: Option<RandomStates>,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub observables: Option<Vec<IntegralSpec>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub threshold: Option<f64>,
}

/// A parsed and checked configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub f: FSpec,
    pub dim: usize,
    pub initial_states: Vec<CartesianState>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies overrides and runs the semantic checks.
    pub fn resolve(mut self, o: &Overrides) -> Result<Resolved, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(dim) = o.dim {
            self.dim = Some(dim);
        }
        if let Some(t) = o.threshold {
            if !(t >= 0.0) {
                return bad(format!("--threshold must be non-negative, got {t}"));
            }
            self.thresholds.override_residuals(t);
        }
        let f = self.f.to_fspec()?;
        let initial_states = self
            .initial_states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                CartesianState::try_from(s)
                    .map_err(|e| CliError::Config(format!("initial_states[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let dim = match (self.dim, initial_states.first()) {
            (Some(d), _) => d,
            (None, Some(s)) => s.dim(),
            (None, None) => 2,
        };
        if dim < 2 {
            return bad(format!("dim must be at least 2, got {dim}"));
        }
        if let Some(i) = initial_states.iter().position(|s| s.dim() != dim) {
            return bad(format!(
                "initial_states[{i}] has dimension {}, expected {dim}",
                initial_states[i].dim()
            ));
        }
        if let Some(integ) = &self.integrator {
            integ
                .validate()
                .map_err(|e| CliError::Config(format!("integrator: {e}")))?;
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("drift", t.drift),
            ("bracket", t.bracket),
            ("identity8", t.identity8),
            ("oracle", t.oracle),
        ] {
            if !(v >= 0.0) {
                return bad(format!("thresholds.{name} must be non-negative, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&t.rank_fraction) {
            return bad(format!(
                "thresholds.rank_fraction must lie in [0, 1], got {}",
                t.rank_fraction
            ));
        }
        let v = &self.verify;
        if v.samples == 0 {
            return bad("verify.samples must be at least 1".into());
        }
        if !(v.fd_step > 0.0) || !(v.rank_tol > 0.0) {
            return bad("verify.fd_step and verify.rank_tol must be positive".into());
        }
        let out = o
            .out
            .clone()
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Resolved {
            raw: self,
            f,
            dim,
            initial_states,
            out,
        })
    }
}

/// `E` and the angular momenta, then `C₁` in the plane or the anchored
/// plane `C₁` together with `L²` in higher dimension.
pub fn default_observables(dim: usize) -> Vec<IntegralSpec> {
    let mut obs = vec![IntegralSpec::Energy];
    obs.extend(
        plane_pairs(dim)
            .into_iter()
            .map(|(i, j)| IntegralSpec::AngularMomentum { i: i + 1, j: j + 1 }),
    );
    if dim == 2 {
        obs.push(IntegralSpec::Cn { n: 1 });
    } else {
        obs.push(IntegralSpec::AngularMomentumTotal);
        obs.push(IntegralSpec::PlaneC1);
    }
    obs
}
