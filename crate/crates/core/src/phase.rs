//! Phase-space points: Cartesian states in `ℝ²ⁿ`, the planar polar chart
//! and the complex variable `z = p_φ + i·r·p_r`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this radius the polar chart is treated as singular.
pub const ORIGIN_RADIUS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("polar chart is singular at |q| = {0:e} (threshold {ORIGIN_RADIUS:e})")]
    OriginSingularity(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartesianState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl CartesianState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self, PhaseError> {
        if q.len() != p.len() {
            return Err(PhaseError::Dimension(format!(
                "q has {} components, p has {}",
                q.len(),
                p.len()
            )));
        }
        if q.len() < 2 {
            return Err(PhaseError::Dimension(format!(
                "configuration space must have n >= 2, got {}",
                q.len()
            )));
        }
        Ok(CartesianState { q, p })
    }

    /// From `[q₁, …, q_n, p₁, …, p_n]`.
    pub fn from_flat(flat: &[f64]) -> Result<Self, PhaseError> {
        if !flat.len().is_multiple_of(2) {
            return Err(PhaseError::Dimension(format!(
                "flat state needs an even length, got {}",
                flat.len()
            )));
        }
        let n = flat.len() / 2;
        Self::new(flat[..n].to_vec(), flat[n..].to_vec())
    }

    pub fn planar(q: [f64; 2], p: [f64; 2]) -> Self {
        CartesianState {
            q: q.to_vec(),
            p: p.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.q.iter().chain(self.p.iter()).copied().collect()
    }

    pub fn q_dot_p(&self) -> f64 {
        dot(&self.q, &self.p)
    }

    pub fn q2(&self) -> f64 {
        dot(&self.q, &self.q)
    }

    pub fn p2(&self) -> f64 {
        dot(&self.p, &self.p)
    }

    /// `q₁p₂ − q₂p₁` (the planar angular momentum, also `L₁₂` in any n).
    pub fn l12(&self) -> f64 {
        self.q[0] * self.p[1] - self.q[1] * self.p[0]
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.p.iter()).all(|x| x.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Angular momentum components `L_ij = q_i p_j − q_j p_i` for `i < j` in
/// lexicographic order, and `L² = Σ L_ij²`.
pub fn angular_momentum(s: &CartesianState) -> (Vec<f64>, f64) {
    let n = s.dim();
    let mut comps = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            comps.push(s.q[i] * s.p[j] - s.q[j] * s.p[i]);
        }
    }
    let l2 = comps.iter().map(|l| l * l).sum();
    (comps, l2)
}

/// Index pairs `(i, j)` (0-based) in the order used by [`angular_momentum`].
pub fn plane_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarState {
    pub r: f64,
    pub phi: f64,
    #[serde(rename = "pr")]
    pub p_r: f64,
    #[serde(rename = "pphi")]
    pub p_phi: f64,
}

/// `z = p_φ + i·r·p_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZVar {
    pub re: f64,
    pub im: f64,
}

impl ZVar {
    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

fn require_planar(s: &CartesianState) -> Result<(), PhaseError> {
    if s.dim() != 2 {
        return Err(PhaseError::Dimension(format!(
            "planar operation on an n = {} state",
            s.dim()
        )));
    }
    Ok(())
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(phi: f64) -> f64 {
    let mut a = phi.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

pub fn to_polar(s: &CartesianState) -> Result<PolarState, PhaseError> {
    require_planar(s)?;
    let r = s.q[0].hypot(s.q[1]);
    if r <= ORIGIN_RADIUS {
        return Err(PhaseError::OriginSingularity(r));
    }
    let phi = s.q[1].atan2(s.q[0]);
    // atan2 returns -π for (−x, −0.0); keep the half-open interval
    let phi = if phi == -PI { PI } else { phi };
    Ok(PolarState {
        r,
        phi,
        p_r: s.q_dot_p() / r,
        p_phi: s.l12(),
    })
}

pub fn to_cartesian(s: &PolarState) -> Result<CartesianState, PhaseError> {
    if !(s.r > 0.0) {
        return Err(PhaseError::Domain(format!(
            "r must be positive, got {}",
            s.r
        )));
    }
    let (sin, cos) = s.phi.sin_cos();
    let tangential = s.p_phi / s.r;
    Ok(CartesianState::planar(
        [s.r * cos, s.r * sin],
        [
            s.p_r * cos - tangential * sin,
            s.p_r * sin + tangential * cos,
        ],
    ))
}

pub fn z_of(s: &PolarState) -> ZVar {
    ZVar {
        re: s.p_phi,
        im: s.r * s.p_r,
    }
}

/// One initial state in a config: a flat Cartesian array or a polar object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateConfig {
    Flat(Vec<f64>),
    Polar(PolarState),
}

impl TryFrom<&StateConfig> for CartesianState {
    type Error = PhaseError;

    fn try_from(cfg: &StateConfig) -> Result<Self, PhaseError> {
        match cfg {
            StateConfig::Flat(v) => CartesianState::from_flat(v),
            StateConfig::Polar(p) => to_cartesian(p),
        }
    }
}
