//! Integrals of motion for the superintegrable family `H = p² + F(q·p)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`fexpr`]: the analytic function `F`, its even/odd split and divided
//!   differences, evaluable at complex and dual-number arguments;
//! * [`phase`]: Cartesian/polar phase-space states and the `z` variable;
//! * [`dynamics`]: the Hamiltonian, equations of motion and an implicit
//!   midpoint integrator (plus RK4 as a non-symplectic reference);
//! * [`integrals`]: numeric evaluators for every conserved quantity;
//! * [`symbolic`]: exact construction of the polynomial integrals and
//!   exact Poisson-bracket checks;
//! * [`verify`]: finite-difference bracket oracles, the two-path identity
//!   residual and Jacobian rank tests.

// `!(x > t)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod fexpr;
pub mod integrals;
pub mod phase;
pub mod rational;
pub mod sampling;
pub mod symbolic;
pub mod verify;

pub use fexpr::{FSpec, FSpecConfig};
pub use phase::{CartesianState, PolarState};
