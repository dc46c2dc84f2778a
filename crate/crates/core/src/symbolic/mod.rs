//! Exact symbolic layer.
//!
//! The working ring is `ℚ[r, r⁻¹, p_r, p_φ] ⊗ span{1, cos 2φ, sin 2φ}`
//! ([`TrigPoly`]); the constructions run in `ℚ(i)[z, z̄, r, r⁻¹]`
//! ([`ZPoly`]) and are converted back by substituting `z = p_φ + i r p_r`.
//! A constructed integral `C` is certified by checking that `{C, H}` is the
//! zero element.

mod construct;
mod gaussian;
mod poly;
mod trig;

use thiserror::Error;

pub use construct::{
    construct_even, construct_monomial, construct_odd, construct_with, construct_zernike,
    h_symbolic, h_zpoly, ConstructionChoice, EnergyPoly,
};
pub use gaussian::GaussianRational;
pub use poly::{Coeff, ComplexLaurent, LaurentPoly, Monomial, PolarMono, SparsePoly, ZMono, ZPoly};
pub use trig::{poisson_bracket, pretty_laurent, TrigPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("F is not a polynomial with rational coefficients")]
    NotPolynomial,
    #[error("both operands carry cos 2φ / sin 2φ parts; the result leaves the ring")]
    SpanViolation,
    #[error("exact division failed: {0}")]
    DivisibilityFailure(String),
    #[error("γ₁ = γ₂ = 0 makes the Zernike choice degenerate")]
    DegenerateChoice,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub fn is_zero(a: &TrigPoly) -> bool {
    a.is_zero()
}

pub fn momentum_degree(a: &TrigPoly) -> i64 {
    a.momentum_degree()
}
