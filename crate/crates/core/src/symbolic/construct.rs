//! Exact construction of the polynomial integrals.
//!
//! Every construction is a choice of the pair `(G cos χ, G sin χ)` as a
//! polynomial in `(E, p_φ)`. With `P = G cos χ + i G sin χ` expressed in
//! `z, z̄, r`, the integral is
//!
//! ```text
//! C̃ = A cos 2φ − B sin 2φ,   A + iB = i z̄ · (P / z)
//! ```
//!
//! and polynomiality is exactly the statement that `z` divides `P`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::gaussian::GaussianRational;
use super::poly::{LaurentPoly, ZPoly};
use super::trig::TrigPoly;
use super::SymbolicError;
use crate::fexpr::FSpec;

/// Polynomial in the energy `E` and `p_φ`: map `(e_E, e_pφ) → coefficient`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyPoly(pub BTreeMap<(u32, u32), BigRational>);

impl EnergyPoly {
    pub fn term(e: u32, pphi: u32, c: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert((e, pphi), c);
        }
        EnergyPoly(m)
    }

    pub fn plus(mut self, e: u32, pphi: u32, c: BigRational) -> Self {
        let entry = self.0.entry((e, pphi)).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&(e, pphi));
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Substitutes `E ↦ energy`, `p_φ ↦ (z + z̄)/2`.
    fn to_zpoly(&self, energy: &ZPoly) -> ZPoly {
        let half = BigRational::new(1.into(), 2.into());
        let pphi = (&ZPoly::z() + &ZPoly::zbar()).scale(&GaussianRational::real(half));
        let mut out = ZPoly::zero();
        for (&(e, b), c) in &self.0 {
            let term = &energy.pow(e) * &pphi.pow(b);
            out = &out + &term.scale(&GaussianRational::real(c.clone()));
        }
        out
    }
}

/// The pair `(G cos χ, G sin χ)` as functions of `(E, p_φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionChoice {
    pub g_cos_chi: EnergyPoly,
    pub g_sin_chi: EnergyPoly,
}

fn sign_pow(k: u32) -> BigRational {
    if k.is_multiple_of(2) {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

impl ConstructionChoice {
    /// `G = E − (−1)^k γ p_φ^{2k}`, `χ = 0`.
    pub fn even(k: u32, gamma: &BigRational) -> Self {
        ConstructionChoice {
            g_cos_chi: EnergyPoly::term(1, 0, BigRational::one()).plus(
                0,
                2 * k,
                -(sign_pow(k) * gamma),
            ),
            g_sin_chi: EnergyPoly::default(),
        }
    }

    /// `G cos χ = (−1)^k γ p_φ^{2k+1}`, `G sin χ = E`.
    pub fn odd(k: u32, gamma: &BigRational) -> Self {
        ConstructionChoice {
            g_cos_chi: EnergyPoly::term(0, 2 * k + 1, sign_pow(k) * gamma),
            g_sin_chi: EnergyPoly::term(1, 0, BigRational::one()),
        }
    }

    /// `G cos χ = γ₁ p_φ`, `G sin χ = E + γ₂ p_φ²`.
    pub fn zernike(gamma1: &BigRational, gamma2: &BigRational) -> Self {
        ConstructionChoice {
            g_cos_chi: EnergyPoly::term(0, 1, gamma1.clone()),
            g_sin_chi: EnergyPoly::term(1, 0, BigRational::one()).plus(0, 2, gamma2.clone()),
        }
    }
}

/// `H` in `(z, z̄, r)`: `z z̄ r⁻² + c + Σ γ_n ((z − z̄)/2i)^n`.
pub fn h_zpoly(f: &FSpec) -> Result<ZPoly, SymbolicError> {
    let poly = f.as_poly().ok_or(SymbolicError::NotPolynomial)?;
    // (z − z̄)/(2i) = −(i/2)(z − z̄)
    let minus_half_i =
        GaussianRational::new(BigRational::zero(), -BigRational::new(1.into(), 2.into()));
    let rp = (&ZPoly::z() - &ZPoly::zbar()).scale(&minus_half_i);
    let mut h = (&ZPoly::z() * &ZPoly::zbar()).mul_monomial(super::poly::ZMono::new(0, 0, -2));
    h = &h + &ZPoly::rational(poly.constant().clone());
    let mut rp_pow = ZPoly::rational(BigRational::one());
    for gamma in poly.coeffs() {
        rp_pow = &rp_pow * &rp;
        h = &h + &rp_pow.scale(&GaussianRational::real(gamma.clone()));
    }
    Ok(h)
}

/// `H = p_r² + p_φ² r⁻² + F(r p_r)` in the trigonometric ring.
pub fn h_symbolic(f: &FSpec) -> Result<TrigPoly, SymbolicError> {
    let poly = f.as_poly().ok_or(SymbolicError::NotPolynomial)?;
    let mut u0 = &LaurentPoly::mono(0, 2, 0, BigRational::one())
        + &LaurentPoly::mono(-2, 0, 2, BigRational::one());
    u0 = &u0 + &LaurentPoly::mono(0, 0, 0, poly.constant().clone());
    for (i, gamma) in poly.coeffs().iter().enumerate() {
        let n = i as u32 + 1;
        u0 = &u0 + &LaurentPoly::mono(n as i32, n, 0, gamma.clone());
    }
    Ok(TrigPoly::scalar(u0))
}

/// Runs the `A + iB = i z̄ (P/z)` pipeline for an arbitrary choice.
pub fn construct_with(choice: &ConstructionChoice, f: &FSpec) -> Result<TrigPoly, SymbolicError> {
    let energy = h_zpoly(f)?;
    let p = &choice.g_cos_chi.to_zpoly(&energy)
        + &choice
            .g_sin_chi
            .to_zpoly(&energy)
            .scale(&GaussianRational::i());
    let quotient = p.div_z().ok_or_else(|| {
        SymbolicError::DivisibilityFailure("G cos χ + i G sin χ is not divisible by z".into())
    })?;
    let w = &(&ZPoly::zbar() * &quotient).scale(&GaussianRational::i());
    let polar = w.to_polar();
    Ok(TrigPoly::new(LaurentPoly::zero(), polar.re(), -&polar.im()))
}

/// Even monomial `F = γ s^{2k}`: `C̃ = G·C₁` with `G = H − (−1)^k γ p_φ^{2k}`.
pub fn construct_even(k: u32, gamma: &BigRational) -> Result<TrigPoly, SymbolicError> {
    if k == 0 {
        return Err(SymbolicError::InvalidParameter(
            "even construction needs k >= 1".into(),
        ));
    }
    let f = FSpec::monomial(2 * k as usize, gamma.clone());
    let choice = ConstructionChoice::even(k, gamma);
    let g = choice.g_cos_chi.to_zpoly(&h_zpoly(&f)?);
    // G = z z̄ · G̃
    let reduced = g
        .div_z()
        .and_then(|x| x.div_zbar())
        .ok_or_else(|| SymbolicError::DivisibilityFailure("G is not divisible by z z̄".into()))?;
    // C₁·|z|² = Im(z²) cos 2φ − Re(z²) sin 2φ
    let polar = (&reduced * &ZPoly::z().pow(2)).to_polar();
    Ok(TrigPoly::new(LaurentPoly::zero(), polar.im(), -&polar.re()))
}

/// Odd monomial `F = γ s^{2k+1}` with `G cos χ = (−1)^k γ p_φ^{2k+1}`, `G sin χ = E`.
pub fn construct_odd(k: u32, gamma: &BigRational) -> Result<TrigPoly, SymbolicError> {
    let f = FSpec::monomial(2 * k as usize + 1, gamma.clone());
    construct_with(&ConstructionChoice::odd(k, gamma), &f)
}

/// Zernike system `F = γ₁ s + γ₂ s²`.
pub fn construct_zernike(
    gamma1: &BigRational,
    gamma2: &BigRational,
) -> Result<TrigPoly, SymbolicError> {
    if gamma1.is_zero() && gamma2.is_zero() {
        return Err(SymbolicError::DegenerateChoice);
    }
    let f = FSpec::poly(BigRational::zero(), vec![gamma1.clone(), gamma2.clone()]);
    construct_with(&ConstructionChoice::zernike(gamma1, gamma2), &f)
}

/// Dispatches on the parity of `N` for `F = γ s^N`.
pub fn construct_monomial(degree: u32, gamma: &BigRational) -> Result<TrigPoly, SymbolicError> {
    match degree {
        0 => Err(SymbolicError::InvalidParameter("N must be >= 1".into())),
        n if n % 2 == 0 => construct_even(n / 2, gamma),
        n => construct_odd((n - 1) / 2, gamma),
    }
}
