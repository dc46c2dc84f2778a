//! `simulate`: integrate a batch of initial states and record drifts.

use std::fs;
use std::io::{BufWriter, Write};

use serde::Serialize;
use superint::dynamics::{integrate_batch, DynamicsError, IntegratorConfig, Trajectory};
use superint::integrals::{IntegralSpec, Observable};
use superint::sampling::{sample_states, SamplingBox};

use crate::config::{default_observables, Resolved, SCHEMA_VERSION};
use crate::error::{exit, CliError};
use crate::write_json;

/// Half-width of the default box for random initial states. Orbits grow
/// like `exp(F'(q·p)·t)`, so wide boxes overflow `q²` over long runs.
pub const TRAJECTORY_HALF_WIDTH: f64 = 0.5;

pub fn trajectory_box(dim: usize) -> SamplingBox {
    let region = SamplingBox::default().with_half_width(TRAJECTORY_HALF_WIDTH);
    if dim > 2 {
        region.with_min_l2(1e-2)
    } else {
        region
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    NewtonDivergence { t: f64, iterations: u32 },
    OriginCrossing { t: f64, r: f64 },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftEntry {
    pub name: String,
    pub drift: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub index: usize,
    pub initial_state: Vec<f64>,
    #[serde(flatten)]
    pub status: RunStatus,
    pub csv: Option<String>,
    pub samples: usize,
    pub max_newton_iterations: u32,
    pub drift: Vec<DriftEntry>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSummary {
    pub schema_version: u32,
    pub command: &'static str,
    pub f: String,
    pub dim: usize,
    pub seed: u64,
    pub integrator: IntegratorConfig,
    pub observables: Vec<String>,
    pub drift_threshold: f64,
    pub trajectories: Vec<TrajectorySummary>,
    pub passed: bool,
    pub exit_code: i32,
}

impl DriftSummary {
    /// Divergence wins over other failures, which win over drift.
    pub fn compute_exit_code(&self) -> i32 {
        let status =
            |pred: fn(&RunStatus) -> bool| self.trajectories.iter().any(|t| pred(&t.status));
        if status(|s| matches!(s, RunStatus::NewtonDivergence { .. })) {
            exit::NEWTON_DIVERGENCE
        } else if status(|s| !matches!(s, RunStatus::Ok)) {
            exit::RUNTIME
        } else if self.trajectories.iter().any(|t| !t.passed) {
            exit::THRESHOLD
        } else {
            exit::OK
        }
    }
}

fn status_of(e: &DynamicsError) -> RunStatus {
    match e {
        DynamicsError::NewtonDivergence { t, iterations } => RunStatus::NewtonDivergence {
            t: *t,
            iterations: *iterations,
        },
        DynamicsError::OriginCrossing { t, r } => RunStatus::OriginCrossing { t: *t, r: *r },
        e => RunStatus::Failed {
            message: e.to_string(),
        },
    }
}

/// Runs the batch and writes `trajectory_NNN.csv` files plus
/// `drift_summary.json` into the output directory.
pub fn cmd_simulate(cfg: &Resolved) -> Result<DriftSummary, CliError> {
    let raw = &cfg.raw;
    let integrator = raw
        .integrator
        .clone()
        .ok_or_else(|| CliError::Config("simulate needs an `integrator` section".into()))?;
    let specs: Vec<IntegralSpec> = raw
        .observables
        .clone()
        .unwrap_or_else(|| default_observables(cfg.dim));
    for spec in &specs {
        Observable::new(spec, &cfg.f, cfg.dim)
            .map_err(|e| CliError::Config(format!("observable {spec}: {e}")))?;
    }
    let mut states = cfg.initial_states.clone();
    if let Some(random) = &raw.random_initial_states {
        let region = random.region.unwrap_or_else(|| trajectory_box(cfg.dim));
        let set = sample_states(raw.seed, random.count, cfg.dim, &region)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        states.extend(set.states);
    }
    if states.is_empty() {
        return Err(CliError::Config(
            "no initial states: give `initial_states` or `random_initial_states`".into(),
        ));
    }

    let results = integrate_batch(&states, &cfg.f, &integrator, &specs);

    fs::create_dir_all(&cfg.out)?;
    let threshold = raw.thresholds.drift;
    let names: Vec<String> = specs.iter().map(|s| s.column_name(cfg.dim)).collect();
    let mut trajectories = Vec::with_capacity(states.len());
    for (index, (s0, result)) in states.iter().zip(&results).enumerate() {
        let summary = match result {
            Ok(traj) => {
                let file = format!("trajectory_{index:03}.csv");
                write_trajectory(traj, &cfg.out.join(&file))?;
                let drift: Vec<DriftEntry> = traj
                    .names
                    .iter()
                    .zip(&traj.drift)
                    .map(|(name, &d)| DriftEntry {
                        name: name.clone(),
                        drift: d,
                        passed: d <= threshold,
                    })
                    .collect();
                TrajectorySummary {
                    index,
                    initial_state: s0.to_flat(),
                    status: RunStatus::Ok,
                    csv: Some(file),
                    samples: traj.times.len(),
                    max_newton_iterations: traj.max_newton_iterations,
                    passed: drift.iter().all(|d| d.passed),
                    drift,
                }
            }
            Err(e) => {
                eprintln!("trajectory {index}: {e}");
                TrajectorySummary {
                    index,
                    initial_state: s0.to_flat(),
                    status: status_of(e),
                    csv: None,
                    samples: 0,
                    max_newton_iterations: 0,
                    drift: Vec::new(),
                    passed: false,
                }
            }
        };
        trajectories.push(summary);
    }
    let mut report = DriftSummary {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        f: cfg.f.to_string(),
        dim: cfg.dim,
        seed: raw.seed,
        integrator,
        observables: names,
        drift_threshold: threshold,
        passed: trajectories.iter().all(|t| t.passed),
        trajectories,
        exit_code: 0,
    };
    report.exit_code = report.compute_exit_code();
    write_json(&cfg.out.join("drift_summary.json"), &report)?;
    Ok(report)
}

fn write_trajectory(traj: &Trajectory, path: &std::path::Path) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    traj.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}
