//! Hamiltonian, equations of motion and time stepping.
//!
//! The flow is integrated in Cartesian coordinates. `H = p² + F(q·p)` is not
//! separable, so the symplectic scheme is the implicit midpoint rule, solved
//! per step by damped Newton iteration; classical RK4 is kept as a
//! non-symplectic reference.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fexpr::{FSpec, Scalar};
use crate::integrals::{IntegralError, IntegralSpec, Observable};
use crate::phase::{dot, CartesianState, PolarState, ORIGIN_RADIUS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("Newton iteration did not converge within {iterations} iterations at t = {t}")]
    NewtonDivergence { t: f64, iterations: u32 },
    #[error("trajectory reached |q| = {r:e} < {ORIGIN_RADIUS:e} at t = {t} while a polar observable is requested")]
    OriginCrossing { t: f64, r: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("observable {name} failed at t = {t}: {source}")]
    Observable {
        t: f64,
        name: String,
        source: IntegralError,
    },
    #[error(transparent)]
    Integral(#[from] IntegralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    ImplicitMidpoint,
    Rk4,
}

fn default_newton_tol() -> f64 {
    1e-12
}

fn default_newton_max_iter() -> u32 {
    50
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub method: Method,
    pub h: f64,
    pub t_end: f64,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: u32,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn new(method: Method, h: f64, t_end: f64) -> Self {
        IntegratorConfig {
            method,
            h,
            t_end,
            newton_tol: default_newton_tol(),
            newton_max_iter: default_newton_max_iter(),
            record_every: default_record_every(),
        }
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: String| Err(DynamicsError::InvalidConfig(m));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.h >= self.t_end {
            return bad(format!(
                "h = {} must be smaller than t_end = {}",
                self.h, self.t_end
            ));
        }
        if !(self.newton_tol > 0.0) {
            return bad(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            ));
        }
        if self.newton_max_iter == 0 {
            return bad("newton_max_iter must be at least 1".into());
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        Ok(())
    }

    /// Number of steps; the last sample sits at `steps·h ≥ t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.h - 1e-9).ceil() as usize
    }
}

/// `p² + F(q·p)` in any scalar type.
pub fn hamiltonian_of<S: Scalar>(q: &[S], p: &[S], f: &FSpec) -> S {
    let mut p2 = S::zero();
    let mut s = S::zero();
    for (&qi, &pi) in q.iter().zip(p) {
        p2 = p2 + pi * pi;
        s = s + qi * pi;
    }
    p2 + f.eval(s)
}

pub fn hamiltonian(s: &CartesianState, f: &FSpec) -> f64 {
    s.p2() + f.derivs2(s.q_dot_p()).0
}

/// `p_r² + p_φ²/r² + F(r·p_r)`.
pub fn hamiltonian_polar(s: &PolarState, f: &FSpec) -> f64 {
    s.p_r * s.p_r + (s.p_phi / s.r).powi(2) + f.derivs2(s.r * s.p_r).0
}

/// `[q̇, ṗ]` with `q̇ = 2p + F'(q·p)q`, `ṗ = −F'(q·p)p`.
pub fn eom_rhs(s: &CartesianState, f: &FSpec) -> Vec<f64> {
    let mut out = vec![0.0; 2 * s.dim()];
    rhs(&s.to_flat(), f, &mut out);
    out
}

/// Time derivatives in the polar chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRates {
    pub r: f64,
    pub phi: f64,
    pub p_r: f64,
    pub p_phi: f64,
}

pub fn eom_polar(s: &PolarState, f: &FSpec) -> PolarRates {
    let fp = f.derivs2(s.r * s.p_r).1;
    PolarRates {
        r: 2.0 * s.p_r + s.r * fp,
        phi: 2.0 * s.p_phi / (s.r * s.r),
        p_r: 2.0 * s.p_phi * s.p_phi / s.r.powi(3) - s.p_r * fp,
        p_phi: 0.0,
    }
}

fn rhs(y: &[f64], f: &FSpec, out: &mut [f64]) {
    let n = y.len() / 2;
    let (q, p) = y.split_at(n);
    let fp = f.derivs2(dot(q, p)).1;
    for i in 0..n {
        out[i] = 2.0 * p[i] + fp * q[i];
        out[n + i] = -fp * p[i];
    }
}

/// Jacobian of [`eom_rhs`] with respect to `[q, p]`.
pub fn eom_jacobian(y: &[f64], f: &FSpec) -> DMatrix<f64> {
    let n = y.len() / 2;
    let (q, p) = y.split_at(n);
    let (_, d1, d2) = f.derivs2(dot(q, p));
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let delta = if r % n == c % n { 1.0 } else { 0.0 };
        match (r < n, c < n) {
            (true, true) => d1 * delta + d2 * q[r] * p[c],
            (true, false) => 2.0 * delta + d2 * q[r] * q[c - n],
            (false, true) => -d2 * p[r - n] * p[c],
            (false, false) => -d1 * delta - d2 * p[r - n] * q[c - n],
        }
    })
}

fn block_norms(v: &[f64]) -> (f64, f64) {
    let n = v.len() / 2;
    (dot(&v[..n], &v[..n]).sqrt(), dot(&v[n..], &v[n..]).sqrt())
}

/// One implicit-midpoint or RK4 step.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    f: &'a FSpec,
    cfg: &'a IntegratorConfig,
    work: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFailure {
    pub iterations: u32,
}

impl<'a> Stepper<'a> {
    pub fn new(f: &'a FSpec, cfg: &'a IntegratorConfig) -> Self {
        Stepper {
            f,
            cfg,
            work: Vec::new(),
        }
    }

    /// Advances `y` by `h` (which may be negative); returns Newton iterations used.
    pub fn step(&mut self, y: &mut [f64], h: f64) -> Result<u32, StepFailure> {
        match self.cfg.method {
            Method::ImplicitMidpoint => self.midpoint(y, h),
            Method::Rk4 => {
                self.rk4(y, h);
                Ok(0)
            }
        }
    }

    fn rk4(&mut self, y: &mut [f64], h: f64) {
        let m = y.len();
        self.work.resize(5 * m, 0.0);
        let (k, tmp) = self.work.split_at_mut(4 * m);
        let (k1, rest) = k.split_at_mut(m);
        let (k2, rest) = rest.split_at_mut(m);
        let (k3, k4) = rest.split_at_mut(m);
        rhs(y, self.f, k1);
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(tmp, self.f, k2);
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(tmp, self.f, k3);
        for i in 0..m {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(tmp, self.f, k4);
        for i in 0..m {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    // Residual of the midpoint equation m − y − (h/2)·f(m), written into `g`.
    fn residual(&self, y: &[f64], mid: &[f64], h: f64, g: &mut [f64]) {
        rhs(mid, self.f, g);
        for i in 0..y.len() {
            g[i] = mid[i] - y[i] - 0.5 * h * g[i];
        }
    }

    // Blockwise relative residual size, comparable across the q and p scales.
    fn merit(g: &[f64], scale: (f64, f64)) -> f64 {
        let (gq, gp) = block_norms(g);
        (gq / scale.0).max(gp / scale.1)
    }

    fn midpoint(&mut self, y: &mut [f64], h: f64) -> Result<u32, StepFailure> {
        let m = y.len();
        let n = m / 2;
        let tol = self.cfg.newton_tol;
        let mut f0 = vec![0.0; m];
        rhs(y, self.f, &mut f0);
        let mut mid: Vec<f64> = y.iter().zip(&f0).map(|(a, b)| a + 0.5 * h * b).collect();
        let mut g = vec![0.0; m];
        let mut trial = vec![0.0; m];
        let mut g_trial = vec![0.0; m];
        self.residual(y, &mid, h, &mut g);
        for it in 1..=self.cfg.newton_max_iter {
            let (sq, sp) = block_norms(&mid);
            let scale = (
                if sq > 0.0 { sq } else { 1.0 },
                if sp > 0.0 { sp } else { 1.0 },
            );
            let d = |i: usize| if i < n { scale.0 } else { scale.1 };
            let current = Self::merit(&g, scale);
            if current == 0.0 {
                break;
            }
            // Solve (I − h/2 J) Δ = −g with row/column equilibration.
            let jac = eom_jacobian(&mid, self.f);
            let a = DMatrix::from_fn(m, m, |r, c| {
                let ident = if r == c { 1.0 } else { 0.0 };
                (ident - 0.5 * h * jac[(r, c)]) * d(c) / d(r)
            });
            let b = DVector::from_fn(m, |r, _| -g[r] / d(r));
            let Some(x) = a.lu().solve(&b) else {
                return Err(StepFailure { iterations: it });
            };
            let delta: Vec<f64> = (0..m).map(|i| x[i] * d(i)).collect();
            if delta.iter().any(|v| !v.is_finite()) {
                return Err(StepFailure { iterations: it });
            }
            let mut alpha = 1.0;
            for halving in 0..=8 {
                for i in 0..m {
                    trial[i] = mid[i] + alpha * delta[i];
                }
                self.residual(y, &trial, h, &mut g_trial);
                let next = Self::merit(&g_trial, scale);
                if next.is_finite() && (next <= current || halving == 8) {
                    break;
                }
                alpha *= 0.5;
            }
            std::mem::swap(&mut mid, &mut trial);
            std::mem::swap(&mut g, &mut g_trial);
            if mid.iter().any(|v| !v.is_finite()) {
                return Err(StepFailure { iterations: it });
            }
            let (dq, dp) = block_norms(&delta);
            let (mq, mp) = block_norms(&mid);
            if dq <= tol * mq && dp <= tol * mp.max(f64::MIN_POSITIVE) {
                for i in 0..m {
                    y[i] = 2.0 * mid[i] - y[i];
                }
                return Ok(it);
            }
        }
        if Self::merit(&g, (1.0, 1.0)) == 0.0 {
            for i in 0..m {
                y[i] = 2.0 * mid[i] - y[i];
            }
            return Ok(1);
        }
        Err(StepFailure {
            iterations: self.cfg.newton_max_iter,
        })
    }
}

/// Recorded samples with observable values and drift.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CartesianState>,
    pub names: Vec<String>,
    /// `values[k][j]`: observable `k` at sample `j`.
    pub values: Vec<Vec<f64>>,
    /// Per observable: `max |v(t) − v(0)| / max(1, |v(0)|)`.
    pub drift: Vec<f64>,
    pub max_newton_iterations: u32,
}

impl Trajectory {
    pub fn drift_of(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.drift[k])
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, CartesianState::dim)
    }

    pub fn csv_header(&self) -> String {
        let n = self.dim();
        let mut cols = vec!["t".to_string()];
        cols.extend((1..=n).map(|i| format!("q{i}")));
        cols.extend((1..=n).map(|i| format!("p{i}")));
        cols.extend(self.names.iter().cloned());
        cols.join(",")
    }

    /// Header plus one row per sample, 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        let mut line = String::new();
        for (j, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            line.clear();
            let row = std::iter::once(*t)
                .chain(s.q.iter().copied())
                .chain(s.p.iter().copied())
                .chain(self.values.iter().map(|v| v[j]));
            for (c, x) in row.enumerate() {
                if c > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{x:.16e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn relative_drift(values: &[f64]) -> f64 {
    let v0 = values[0];
    let dev = values.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max);
    dev / v0.abs().max(1.0)
}

/// Integrates from `s0`, evaluating `observables` at every recorded sample.
/// A `plane_c1` observable gets its basis fixed at `s0`.
pub fn integrate(
    s0: &CartesianState,
    f: &FSpec,
    cfg: &IntegratorConfig,
    observables: &[IntegralSpec],
) -> Result<Trajectory, DynamicsError> {
    let compiled = observables
        .iter()
        .map(|o| Observable::new(o, f, s0.dim()))
        .collect::<Result<Vec<_>, _>>()?;
    integrate_compiled(s0, f, cfg, &compiled)
}

/// Like [`integrate`] with observables compiled once by the caller.
pub fn integrate_compiled(
    s0: &CartesianState,
    f: &FSpec,
    cfg: &IntegratorConfig,
    observables: &[Observable],
) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    let observables = observables
        .iter()
        .map(|o| o.anchored_at(s0))
        .collect::<Result<Vec<_>, _>>()?;
    let polar = observables.iter().any(|o| o.spec().is_planar());
    let n = s0.dim();
    let steps = cfg.steps();
    let mut y = s0.to_flat();
    let mut stepper = Stepper::new(f, cfg);
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        names: observables.iter().map(Observable::name).collect(),
        values: vec![Vec::new(); observables.len()],
        drift: Vec::new(),
        max_newton_iterations: 0,
    };
    let record = |t: f64, y: &[f64], traj: &mut Trajectory| -> Result<(), DynamicsError> {
        let s = CartesianState {
            q: y[..n].to_vec(),
            p: y[n..].to_vec(),
        };
        for (k, o) in observables.iter().enumerate() {
            let v = o.eval(&s).map_err(|source| match source {
                IntegralError::OriginSingularity(r) => DynamicsError::OriginCrossing { t, r },
                source => DynamicsError::Observable {
                    t,
                    name: o.name(),
                    source,
                },
            })?;
            traj.values[k].push(v);
        }
        traj.times.push(t);
        traj.states.push(s);
        Ok(())
    };
    record(0.0, &y, &mut traj)?;
    for k in 1..=steps {
        let t = k as f64 * cfg.h;
        let iters = stepper
            .step(&mut y, cfg.h)
            .map_err(|e| DynamicsError::NewtonDivergence {
                t,
                iterations: e.iterations,
            })?;
        traj.max_newton_iterations = traj.max_newton_iterations.max(iters);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite { t });
        }
        if polar {
            let r = dot(&y[..n], &y[..n]).sqrt();
            if r < ORIGIN_RADIUS {
                return Err(DynamicsError::OriginCrossing { t, r });
            }
        }
        if k % cfg.record_every == 0 || k == steps {
            record(t, &y, &mut traj)?;
        }
    }
    traj.drift = traj.values.iter().map(|v| relative_drift(v)).collect();
    Ok(traj)
}

/// Integrates several initial states in parallel; results keep input order.
pub fn integrate_batch(
    states: &[CartesianState],
    f: &FSpec,
    cfg: &IntegratorConfig,
    observables: &[IntegralSpec],
) -> Vec<Result<Trajectory, DynamicsError>> {
    states
        .par_iter()
        .map(|s| integrate(s, f, cfg, observables))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fexpr::{gradient, DualScalar, Field};
    use crate::phase::{to_cartesian, to_polar};
    use approx::assert_relative_eq;

    fn st(q: [f64; 2], p: [f64; 2]) -> CartesianState {
        CartesianState::planar(q, p)
    }

    #[test]
    fn hamiltonian_examples() {
        let s = st([1.0, 0.0], [1.0, 1.0]);
        assert_eq!(hamiltonian(&s, &FSpec::parse("s + s^2").unwrap()), 4.0);
        assert_eq!(hamiltonian(&s, &FSpec::parse("s^3").unwrap()), 3.0);
        let s2 = st([0.3, -2.0], [1.5, 0.25]);
        assert_eq!(hamiltonian(&s2, &FSpec::zero()), s2.p2());
        let f = FSpec::parse("exp(s) - sin(s)").unwrap();
        let pol = to_polar(&s2).unwrap();
        assert_relative_eq!(
            hamiltonian(&s2, &f),
            hamiltonian_polar(&pol, &f),
            max_relative = 1e-12
        );
    }

    #[test]
    fn eom_examples() {
        let s = st([1.0, 0.0], [0.0, 1.0]);
        assert_eq!(eom_rhs(&s, &FSpec::zero()), vec![0.0, 2.0, 0.0, 0.0]);
        assert_eq!(
            eom_rhs(&s, &FSpec::parse("s").unwrap()),
            vec![1.0, 2.0, 0.0, -1.0]
        );
        let r = eom_polar(
            &PolarState {
                r: 1.0,
                phi: 0.0,
                p_r: 0.0,
                p_phi: 1.0,
            },
            &FSpec::zero(),
        );
        assert_eq!((r.r, r.p_r, r.phi, r.p_phi), (0.0, 2.0, 2.0, 0.0));
    }

    #[test]
    fn cartesian_rates_match_polar_rates() {
        let f = FSpec::parse("cosh(s) + s^3/3").unwrap();
        let pol = PolarState {
            r: 1.3,
            phi: 0.7,
            p_r: -0.4,
            p_phi: 0.9,
        };
        let c = to_cartesian(&pol).unwrap();
        let d = eom_rhs(&c, &f);
        let rates = eom_polar(&pol, &f);
        // differentiate the chart map along the Cartesian velocity
        let (x, y, px, py) = (c.q[0], c.q[1], c.p[0], c.p[1]);
        let (dx, dy, dpx, dpy) = (d[0], d[1], d[2], d[3]);
        let r = pol.r;
        let r_dot = (x * dx + y * dy) / r;
        let phi_dot = (x * dy - y * dx) / (r * r);
        let s_dot = dx * px + x * dpx + dy * py + y * dpy;
        let p_r_dot = s_dot / r - (x * px + y * py) * r_dot / (r * r);
        let p_phi_dot = dx * py + x * dpy - dy * px - y * dpx;
        assert_relative_eq!(r_dot, rates.r, max_relative = 1e-10);
        assert_relative_eq!(phi_dot, rates.phi, max_relative = 1e-10);
        assert_relative_eq!(p_r_dot, rates.p_r, max_relative = 1e-10);
        assert!(p_phi_dot.abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_dual_gradients() {
        let f = FSpec::parse("sin(s) + s^2 - 0.3*s^4").unwrap();
        let y = [0.4, -1.1, 0.8, 0.25];
        let jac = eom_jacobian(&y, &f);
        for row in 0..4 {
            let g = gradient(&y, |x: &[DualScalar]| {
                let (q, p) = x.split_at(2);
                let s = q[0] * p[0] + q[1] * p[1];
                let fp = f.derivative(s);
                Ok::<_, ()>(if row < 2 {
                    p[row].scale(2.0) + fp * q[row]
                } else {
                    -(fp * p[row - 2])
                })
            })
            .unwrap();
            for c in 0..4 {
                assert_relative_eq!(jac[(row, c)], g[c], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn free_flow_conserves_e_and_l() {
        let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, 1e-3, 1.0);
        let traj = integrate(
            &st([1.0, 0.0], [0.0, 1.0]),
            &FSpec::zero(),
            &cfg,
            &[
                IntegralSpec::Energy,
                IntegralSpec::AngularMomentum { i: 1, j: 2 },
            ],
        )
        .unwrap();
        assert!(
            traj.drift[0] <= 1e-10 && traj.drift[1] <= 1e-10,
            "{:?}",
            traj.drift
        );
        assert_eq!(traj.times.len(), 1001);
        let last = traj.states.last().unwrap();
        assert_relative_eq!(last.q[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zernike_trajectory_conserves_integrals() {
        let f = FSpec::parse("s + s^2").unwrap();
        let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, 1e-3, 50.0).with_record_every(50);
        let traj = integrate(
            &st([0.3, -0.4], [0.2, 0.35]),
            &f,
            &cfg,
            &[
                IntegralSpec::Energy,
                IntegralSpec::AngularMomentum { i: 1, j: 2 },
                IntegralSpec::Cn { n: 1 },
            ],
        )
        .unwrap();
        for (name, d) in traj.names.iter().zip(&traj.drift) {
            assert!(*d <= 1e-6, "{name}: {d}");
        }
        let rk4 = integrate(
            &st([0.3, -0.4], [0.2, 0.35]),
            &f,
            &IntegratorConfig::new(Method::Rk4, 1e-3, 50.0).with_record_every(50),
            &[IntegralSpec::Energy],
        )
        .unwrap();
        assert!(rk4.drift[0].is_finite());
    }

    #[test]
    fn midpoint_is_time_symmetric() {
        let f = FSpec::parse("exp(s) + s^3").unwrap();
        let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, 1e-2, 1.0);
        let mut stepper = Stepper::new(&f, &cfg);
        let y0 = [0.7, -0.2, 0.5, 1.1];
        let mut y = y0;
        stepper.step(&mut y, 0.05).unwrap();
        stepper.step(&mut y, -0.05).unwrap();
        for i in 0..4 {
            assert!(
                (y[i] - y0[i]).abs() <= 10.0 * cfg.newton_tol,
                "{i}: {}",
                y[i] - y0[i]
            );
        }
    }

    fn energy_error(h: f64, method: Method) -> f64 {
        let f = FSpec::parse("sin(s) + s^2").unwrap();
        let cfg = IntegratorConfig::new(method, h, 2.0);
        integrate(
            &st([0.5, 0.2], [-0.3, 0.6]),
            &f,
            &cfg,
            &[IntegralSpec::Energy],
        )
        .unwrap()
        .drift[0]
    }

    #[test]
    fn midpoint_energy_error_is_second_order() {
        let ratio = energy_error(2e-2, Method::ImplicitMidpoint)
            / energy_error(1e-2, Method::ImplicitMidpoint);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        let rk = energy_error(4e-2, Method::Rk4) / energy_error(2e-2, Method::Rk4);
        assert!(rk > 12.0, "rk4 ratio {rk}");
    }

    #[test]
    fn dilatation_rate_matches_samples() {
        // d/dt(q·p) = 2p², checked by central differences of the samples
        let f = FSpec::parse("s + s^2").unwrap();
        let h = 1e-3;
        let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, h, 0.5);
        let traj = integrate(&st([0.8, 0.1], [0.3, -0.5]), &f, &cfg, &[]).unwrap();
        let mut worst: f64 = 0.0;
        for j in 1..traj.states.len() - 1 {
            let ds = (traj.states[j + 1].q_dot_p() - traj.states[j - 1].q_dot_p()) / (2.0 * h);
            let pol = to_polar(&traj.states[j]).unwrap();
            let expected = 2.0 * pol.p_r * pol.p_r + 2.0 * (pol.p_phi / pol.r).powi(2);
            worst = worst.max((ds - expected).abs());
        }
        assert!(worst < 1e-5, "{worst}");
    }

    fn theta_rate_residual(h: f64) -> f64 {
        // d/dt[atan2(r p_r, p_φ)] − φ̇, from sample differences
        let f = FSpec::parse("s^3").unwrap();
        let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, h, 0.4);
        let traj = integrate(&st([0.9, 0.3], [0.2, 0.7]), &f, &cfg, &[]).unwrap();
        let angle = |s: &CartesianState| {
            let pol = to_polar(s).unwrap();
            ((pol.r * pol.p_r).atan2(pol.p_phi), pol.phi)
        };
        let mut worst: f64 = 0.0;
        for j in 1..traj.states.len() - 1 {
            let (ta, pa) = angle(&traj.states[j - 1]);
            let (tb, pb) = angle(&traj.states[j + 1]);
            let rate = ((tb - ta) - (pb - pa)) / (2.0 * h);
            worst = worst.max(rate.abs());
        }
        worst
    }

    #[test]
    fn phase_rate_identity_converges() {
        let coarse = theta_rate_residual(4e-3);
        let fine = theta_rate_residual(2e-3);
        // the midpoint flow keeps the phase to rounding level at both steps
        assert!(coarse < 1e-9 && fine < 1e-9, "{coarse} -> {fine}");
    }

    #[test]
    fn newton_divergence_is_reported() {
        let f = FSpec::parse("10*s^3").unwrap();
        let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, 0.5, 50.0);
        let err = integrate(&st([1.5, 0.5], [1.2, -0.8]), &f, &cfg, &[]).unwrap_err();
        assert!(
            matches!(
                err,
                DynamicsError::NewtonDivergence { .. } | DynamicsError::NonFinite { .. }
            ),
            "{err}"
        );
    }

    #[test]
    fn origin_crossing_is_reported() {
        // free flow through the origin at t = 0.5
        let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, 0.25, 1.0);
        let err = integrate(
            &st([-1.0, 0.0], [1.0, 0.0]),
            &FSpec::zero(),
            &cfg,
            &[IntegralSpec::Cn { n: 1 }],
        );
        assert!(matches!(err, Err(DynamicsError::OriginCrossing { t, .. }) if t == 0.5));
        let traj = integrate(
            &st([-1.0, 0.0], [1.0, 0.0]),
            &FSpec::zero(),
            &cfg,
            &[IntegralSpec::KAnalytic { axis: 1 }],
        );
        assert!(matches!(traj, Err(DynamicsError::OriginCrossing { t, .. }) if t == 0.5));
    }

    #[test]
    fn csv_layout() {
        let cfg = IntegratorConfig::new(Method::Rk4, 0.5, 1.0);
        let traj = integrate(
            &st([1.0, 0.0], [0.0, 1.0]),
            &FSpec::zero(),
            &cfg,
            &[
                IntegralSpec::Energy,
                IntegralSpec::AngularMomentum { i: 1, j: 2 },
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,q1,q2,p1,p2,E,L");
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(row, vec![0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(Method::Rk4, 1.0, 0.5)
            .validate()
            .is_err());
        assert!(IntegratorConfig::new(Method::Rk4, -1.0, 5.0)
            .validate()
            .is_err());
        let cfg: IntegratorConfig =
            serde_json::from_str(r#"{"method":"implicit_midpoint","h":0.001,"t_end":50}"#).unwrap();
        assert_eq!(cfg.newton_max_iter, 50);
        assert_eq!(cfg.steps(), 50_000);
        assert!(serde_json::from_str::<IntegratorConfig>(r#"{"h":0.1,"t_end":1,"x":0}"#).is_err());
    }
}
