//! Independent numerical oracles: finite-difference Poisson brackets,
//! the two-path residual for `K`, and Jacobian-rank independence tests.
//!
//! Sample loops run in parallel with an order-preserving collect; every
//! reduction afterwards is sequential, so reports do not depend on the
//! thread count.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fexpr::FSpec;
use crate::integrals::{eval_k, eval_k_lhs, IntegralError, IntegralSpec, Observable};
use crate::phase::CartesianState;

/// Default finite-difference step, multiplied by `max(1, |x_i|)` per coordinate.
pub const DEFAULT_FD_STEP: f64 = 3e-4;
/// Default relative singular-value threshold for [`independence_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// `identity8_residual` needs `p²` above this.
pub const IDENTITY8_MIN_P2: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error("domain error: {0}")]
    Domain(String),
}

fn shifted(s: &CartesianState, i: usize, delta: f64) -> CartesianState {
    let mut out = s.clone();
    let n = s.dim();
    if i < n {
        out.q[i] += delta;
    } else {
        out.p[i - n] += delta;
    }
    out
}

fn flat_value(s: &CartesianState, i: usize) -> f64 {
    let n = s.dim();
    if i < n {
        s.q[i]
    } else {
        s.p[i - n]
    }
}

/// Five-point central-difference gradient (fourth order) with
/// per-coordinate step `h·max(1, |x_i|)`.
pub fn fd_gradient<F>(f: F, s: &CartesianState, h: f64) -> Result<Vec<f64>, IntegralError>
where
    F: Fn(&CartesianState) -> Result<f64, IntegralError>,
{
    (0..2 * s.dim())
        .map(|i| {
            let step = h * flat_value(s, i).abs().max(1.0);
            let p1 = f(&shifted(s, i, step))?;
            let m1 = f(&shifted(s, i, -step))?;
            let p2 = f(&shifted(s, i, 2.0 * step))?;
            let m2 = f(&shifted(s, i, -2.0 * step))?;
            Ok((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * step))
        })
        .collect()
}

/// `Σ (∂f/∂q_i ∂g/∂p_i − ∂f/∂p_i ∂g/∂q_i)` and the sum of the absolute
/// values of its terms (a natural scale for relative comparisons).
pub fn symplectic_pairing(gf: &[f64], gg: &[f64]) -> (f64, f64) {
    let n = gf.len() / 2;
    let mut value = 0.0;
    let mut scale = 0.0;
    for i in 0..n {
        let a = gf[i] * gg[n + i];
        let b = gf[n + i] * gg[i];
        value += a - b;
        scale += a.abs() + b.abs();
    }
    (value, scale)
}

/// Finite-difference Poisson bracket `{f, g}` at `s`.
pub fn fd_bracket<F, G>(f: F, g: G, s: &CartesianState, h: f64) -> Result<f64, IntegralError>
where
    F: Fn(&CartesianState) -> Result<f64, IntegralError>,
    G: Fn(&CartesianState) -> Result<f64, IntegralError>,
{
    let gf = fd_gradient(f, s, h)?;
    let gg = fd_gradient(g, s, h)?;
    Ok(symplectic_pairing(&gf, &gg).0)
}

/// Poisson bracket from forward-mode gradients; also returns the term scale.
pub fn analytic_bracket(
    f: &Observable,
    g: &Observable,
    s: &CartesianState,
) -> Result<(f64, f64), IntegralError> {
    Ok(symplectic_pairing(&f.gradient(s)?, &g.gradient(s)?))
}

/// `|LHS − K|` for the axis-2 two-path identity; the literal side divides
/// by `p²`.
pub fn identity8_residual(s: &CartesianState, f: &FSpec) -> Result<f64, VerifyError> {
    let p2 = s.p2();
    if !(p2 > IDENTITY8_MIN_P2) {
        return Err(VerifyError::Domain(format!(
            "p^2 = {p2:e} is not above {IDENTITY8_MIN_P2:e}"
        )));
    }
    Ok((eval_k_lhs(s, f, 2)? - eval_k(s, f, 2)?).abs())
}

/// Singular values of a dense row-major matrix, descending.
pub fn singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values at least `tol·σ_max`, after scaling every
/// nonzero row to unit length (so the count ignores row rescaling).
pub fn rank_of(rows: &[Vec<f64>], tol: f64) -> usize {
    let unit: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                r.iter().map(|x| x / norm).collect()
            } else {
                r.clone()
            }
        })
        .collect();
    let sv = singular_values(&unit);
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&x| x >= tol * top).count(),
        _ => 0,
    }
}

/// Numerical rank of the Jacobian whose rows are the gradients of `integrals` at `s`.
pub fn independence_rank(
    s: &CartesianState,
    integrals: &[Observable],
    tol: f64,
) -> Result<usize, IntegralError> {
    let rows = integrals
        .iter()
        .map(|o| o.gradient(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rank_of(&rows, tol))
}

/// Worst case found by a sample sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketReport {
    pub integral: IntegralSpec,
    pub samples: usize,
    pub excluded: usize,
    pub max_abs_residual: f64,
    /// `max |{C, H}| / max(1, Σ|terms|)`; separates roundoff in large
    /// integrals from a genuinely nonzero bracket.
    pub max_relative_residual: f64,
    /// Flat `[q…, p…]`; absent when every sample was excluded.
    pub worst_state: Option<Vec<f64>>,
}

// (index, value) of the largest finite value, first one on ties.
fn arg_max(values: impl Iterator<Item = Option<f64>>) -> (usize, usize, Option<(usize, f64)>) {
    let mut used = 0;
    let mut excluded = 0;
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in values.enumerate() {
        match v {
            Some(v) => {
                let v = if v.is_nan() { f64::INFINITY } else { v };
                used += 1;
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            None => excluded += 1,
        }
    }
    (used, excluded, best)
}

/// `{C, H}` by finite differences over `states`. Samples where either
/// evaluator fails are excluded and counted.
pub fn bracket_suite(
    f: &FSpec,
    integral: &IntegralSpec,
    states: &[CartesianState],
    h: f64,
) -> Result<BracketReport, IntegralError> {
    let dim = states.first().map_or(2, CartesianState::dim);
    let c = Observable::new(integral, f, dim)?;
    let energy = Observable::new(&IntegralSpec::Energy, f, dim)?;
    let residuals: Vec<Option<(f64, f64)>> = states
        .par_iter()
        .map(|s| {
            let c = c.anchored_at(s).ok()?;
            let gc = fd_gradient(|x| c.eval(x), s, h).ok()?;
            let gh = fd_gradient(|x| energy.eval(x), s, h).ok()?;
            let (value, scale) = symplectic_pairing(&gc, &gh);
            Some((value.abs(), value.abs() / scale.max(1.0)))
        })
        .collect();
    let (_, _, worst_rel) = arg_max(residuals.iter().map(|r| r.map(|v| v.1)));
    let (samples, excluded, best) = arg_max(residuals.into_iter().map(|r| r.map(|v| v.0)));
    Ok(BracketReport {
        integral: integral.clone(),
        samples,
        excluded,
        max_abs_residual: best.map_or(0.0, |b| b.1),
        max_relative_residual: worst_rel.map_or(0.0, |b| b.1),
        worst_state: best.map(|(j, _)| states[j].to_flat()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identity8Report {
    pub f: String,
    pub samples: usize,
    pub excluded: usize,
    pub max_abs_residual: f64,
    pub worst_state: Option<Vec<f64>>,
}

pub fn identity8_suite(f: &FSpec, states: &[CartesianState]) -> Identity8Report {
    let residuals: Vec<Option<f64>> = states
        .par_iter()
        .map(|s| identity8_residual(s, f).ok())
        .collect();
    let (samples, excluded, best) = arg_max(residuals.into_iter());
    Identity8Report {
        f: f.to_string(),
        samples,
        excluded,
        max_abs_residual: best.map_or(0.0, |b| b.1),
        worst_state: best.map(|(j, _)| states[j].to_flat()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub integrals: Vec<String>,
    pub pairs: usize,
    pub excluded: usize,
    /// `max |fd − ad| / max(1, Σ|terms|)` over the pairs.
    pub max_relative_discrepancy: f64,
    pub worst_pair: Option<(String, String)>,
    pub worst_state: Option<Vec<f64>>,
}

/// Compares finite-difference and dual-number brackets on one random pair
/// of `integrals` per state; the pair indices come from `rng`.
pub fn oracle_suite(
    integrals: &[Observable],
    states: &[CartesianState],
    rng: &mut ChaCha8Rng,
    h: f64,
) -> OracleReport {
    let m = integrals.len();
    let picks: Vec<(usize, usize)> = states
        .iter()
        .map(|_| (rng.gen_range(0..m), rng.gen_range(0..m)))
        .collect();
    let discrepancies: Vec<Option<f64>> = states
        .par_iter()
        .zip(picks.par_iter())
        .map(|(s, &(a, b))| {
            let (fa, fb) = (
                integrals[a].anchored_at(s).ok()?,
                integrals[b].anchored_at(s).ok()?,
            );
            let (ad, scale) = analytic_bracket(&fa, &fb, s).ok()?;
            let fd = fd_bracket(|x| fa.eval(x), |x| fb.eval(x), s, h).ok()?;
            Some((fd - ad).abs() / scale.max(1.0))
        })
        .collect();
    let (pairs, excluded, best) = arg_max(discrepancies.into_iter());
    OracleReport {
        integrals: integrals.iter().map(Observable::name).collect(),
        pairs,
        excluded,
        max_relative_discrepancy: best.map_or(0.0, |b| b.1),
        worst_pair: best.map(|(j, _)| {
            let (a, b) = picks[j];
            (integrals[a].name(), integrals[b].name())
        }),
        worst_state: best.map(|(j, _)| states[j].to_flat()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub integrals: Vec<String>,
    pub samples: usize,
    pub excluded: usize,
    pub tol: f64,
    pub expected_rank: usize,
    /// rank → number of states
    pub histogram: BTreeMap<usize, usize>,
    pub fraction_at_expected: f64,
}

/// Rank histogram of the Jacobian of `integrals` over `states`.
/// `plane_c1` entries are anchored at each sample.
pub fn rank_suite(
    integrals: &[Observable],
    states: &[CartesianState],
    tol: f64,
    expected_rank: usize,
) -> RankReport {
    let ranks: Vec<Option<usize>> = states
        .par_iter()
        .map(|s| {
            let anchored = integrals
                .iter()
                .map(|o| o.anchored_at(s))
                .collect::<Result<Vec<_>, _>>()
                .ok()?;
            independence_rank(s, &anchored, tol).ok()
        })
        .collect();
    let mut histogram = BTreeMap::new();
    let mut excluded = 0;
    for r in &ranks {
        match r {
            Some(r) => *histogram.entry(*r).or_insert(0) += 1,
            None => excluded += 1,
        }
    }
    let samples = states.len() - excluded;
    let hits = histogram.get(&expected_rank).copied().unwrap_or(0);
    RankReport {
        integrals: integrals.iter().map(Observable::name).collect(),
        samples,
        excluded,
        tol,
        expected_rank,
        histogram,
        fraction_at_expected: if samples == 0 {
            0.0
        } else {
            hits as f64 / samples as f64
        },
    }
}
