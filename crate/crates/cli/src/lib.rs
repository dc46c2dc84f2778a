//! Command-line front end for `superint`.
//!
//! Each command returns a report struct; the process exit code is a pure
//! function of that report (see [`error::exit`]). Reports are written as
//! pretty JSON with a `schema_version` field.

// `!(x > t)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod construct;
pub mod error;
pub mod simulate;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{Overrides, Resolved, RunConfig};
pub use construct::{cmd_construct, ConstructReport, ConstructTarget};
pub use error::{exit, CliError};
pub use simulate::{cmd_simulate, DriftSummary};
pub use verify::{cmd_independence, cmd_verify, IndependenceReport, VerifyReport};

#[derive(Debug, Parser)]
#[command(
    name = "superint",
    version,
    about = "Integrals of motion for H = p^2 + F(q.p)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate initial states and report drift of the observables.
    Simulate(RunArgs),
    /// Build an integral symbolically and check {C, H} = 0 exactly.
    Construct(ConstructArgs),
    /// Sampled bracket, identity, oracle and rank checks.
    Verify(RunArgs),
    /// Rank tests only.
    Independence(RunArgs),
    /// Print the JSON schema of the run configuration.
    Schema,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub dim: Option<usize>,
    /// Overrides every residual tolerance.
    #[arg(long, value_name = "FLOAT", allow_negative_numbers = true)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group = clap::ArgGroup::new("family").required(true).args(["n", "zernike"]))]
pub struct ConstructArgs {
    /// Degree N of F = gamma s^N.
    #[arg(long, short = 'n')]
    pub n: Option<u32>,
    /// Rational coefficient for the monomial family.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub gamma: String,
    /// F = g1 s + g2 s^2.
    #[arg(long, num_args = 2, value_names = ["G1", "G2"], allow_hyphen_values = true)]
    pub zernike: Option<Vec<String>>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        RunConfig::load(&self.config)?.resolve(&Overrides {
            out: self.out.clone(),
            seed: self.seed,
            dim: self.dim,
            threshold: self.threshold,
        })
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn report_line(what: &str, code: i32, out: &Path) {
    let verdict = if code == exit::OK { "passed" } else { "FAILED" };
    eprintln!(
        "{what} {verdict} (exit {code}); reports in {}",
        out.display()
    );
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.resolve()?;
            let report = cmd_simulate(&cfg)?;
            for t in &report.trajectories {
                let worst = t.drift.iter().map(|d| d.drift).fold(0.0, f64::max);
                eprintln!("trajectory {:03}: max drift {worst:.3e}", t.index);
            }
            report_line("simulate", report.exit_code, &cfg.out);
            Ok(report.exit_code)
        }
        Command::Construct(args) => {
            let target = match &args.zernike {
                Some(g) => ConstructTarget::zernike(&g[0], &g[1])?,
                None => ConstructTarget::monomial(args.n.unwrap_or(0), &args.gamma)?,
            };
            let report = cmd_construct(&target, args.out.as_deref())?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let verdict = if report.bracket_with_h_is_zero {
                "exact zero"
            } else {
                "NOT zero"
            };
            emit(&format!(
                "F = {}\nC = {}\nmomentum degree: {}\n{{C, H}} = {} ({verdict})\n{json}\n",
                report.f, report.integral_pretty, report.momentum_degree, report.bracket_with_h
            ))?;
            Ok(report.exit_code)
        }
        Command::Verify(args) => {
            let cfg = args.resolve()?;
            let report = cmd_verify(&cfg)?;
            for g in &report.brackets {
                eprintln!(
                    "bracket {{{}, H}}: max {:.3e} (bound {:.1e}), relative {:.3e}",
                    g.report.integral,
                    g.report.max_abs_residual,
                    g.threshold,
                    g.report.max_relative_residual
                );
            }
            if let Some(g) = &report.identity8 {
                eprintln!(
                    "identity8: max {:.3e} (bound {:.1e})",
                    g.report.max_abs_residual, g.threshold
                );
            }
            eprintln!(
                "oracle: max {:.3e} (bound {:.1e})",
                report.oracle.report.max_relative_discrepancy, report.oracle.threshold
            );
            for g in &report.ranks {
                eprintln!(
                    "rank {:?}: {:.4} at rank {}",
                    g.report.integrals, g.report.fraction_at_expected, g.report.expected_rank
                );
            }
            report_line("verify", report.exit_code, &cfg.out);
            Ok(report.exit_code)
        }
        Command::Independence(args) => {
            let cfg = args.resolve()?;
            let report = cmd_independence(&cfg)?;
            for g in &report.ranks {
                eprintln!(
                    "rank {:?}: {:.4} at rank {}",
                    g.report.integrals, g.report.fraction_at_expected, g.report.expected_rank
                );
            }
            report_line("independence", report.exit_code, &cfg.out);
            Ok(report.exit_code)
        }
        Command::Schema => {
            emit(config::SCHEMA)?;
            Ok(exit::OK)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::CONFIG
            } else {
                exit::OK
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
