//! Sparse polynomials over an exact coefficient ring.
//!
//! Two instantiations are used: [`LaurentPoly`] in `(r, r⁻¹, p_r, p_φ)`
//! with rational coefficients, and [`ZPoly`] in `(z, z̄, r, r⁻¹)` with
//! Gaussian-rational coefficients.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::gaussian::GaussianRational;
use crate::fexpr::Field;
use crate::rational::to_f64;

pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Coeff for T where
    T: Clone
        + PartialEq
        + Debug
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

pub trait Monomial: Copy + Ord + Debug {
    fn one() -> Self;
    fn mul(self, other: Self) -> Self;
}

/// `r^r · p_r^pr · p_φ^pphi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolarMono {
    pub r: i32,
    pub pr: u32,
    pub pphi: u32,
}

impl PolarMono {
    pub fn new(r: i32, pr: u32, pphi: u32) -> Self {
        PolarMono { r, pr, pphi }
    }

    pub fn momentum_degree(self) -> u32 {
        self.pr + self.pphi
    }
}

impl Monomial for PolarMono {
    fn one() -> Self {
        PolarMono::new(0, 0, 0)
    }
    fn mul(self, o: Self) -> Self {
        PolarMono::new(self.r + o.r, self.pr + o.pr, self.pphi + o.pphi)
    }
}

/// `z^z · z̄^zbar · r^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZMono {
    pub z: u32,
    pub zbar: u32,
    pub r: i32,
}

impl ZMono {
    pub fn new(z: u32, zbar: u32, r: i32) -> Self {
        ZMono { z, zbar, r }
    }
}

impl Monomial for ZMono {
    fn one() -> Self {
        ZMono::new(0, 0, 0)
    }
    fn mul(self, o: Self) -> Self {
        ZMono::new(self.z + o.z, self.zbar + o.zbar, self.r + o.r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoly<M: Monomial, C: Coeff> {
    terms: BTreeMap<M, C>,
}

pub type LaurentPoly = SparsePoly<PolarMono, BigRational>;
pub type ZPoly = SparsePoly<ZMono, GaussianRational>;
/// Laurent polynomial with Gaussian coefficients; intermediate when
/// substituting `z = p_φ + i r p_r`.
pub type ComplexLaurent = SparsePoly<PolarMono, GaussianRational>;

impl<M: Monomial, C: Coeff> Default for SparsePoly<M, C> {
    fn default() -> Self {
        SparsePoly {
            terms: BTreeMap::new(),
        }
    }
}

impl<M: Monomial, C: Coeff> SparsePoly<M, C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C) -> Self {
        Self::term(M::one(), c)
    }

    pub fn term(m: M, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        SparsePoly { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (M, C)>) -> Self {
        let mut out = Self::zero();
        for (m, c) in iter {
            out.add_term(m, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&M, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &M) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, m: M, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(m, sum);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        SparsePoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, c.clone() * k.clone()))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: M) -> Self {
        SparsePoly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(C::one());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Applies `f` to every term; zero results are dropped and equal
    /// images are merged.
    pub fn map_terms<M2: Monomial, C2: Coeff>(
        &self,
        mut f: impl FnMut(M, &C) -> Option<(M2, C2)>,
    ) -> SparsePoly<M2, C2> {
        let mut out = SparsePoly::zero();
        for (m, c) in &self.terms {
            if let Some((m2, c2)) = f(*m, c) {
                out.add_term(m2, c2);
            }
        }
        out
    }
}

impl<M: Monomial, C: Coeff> Add for &SparsePoly<M, C> {
    type Output = SparsePoly<M, C>;
    fn add(self, rhs: Self) -> SparsePoly<M, C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<M: Monomial, C: Coeff> Sub for &SparsePoly<M, C> {
    type Output = SparsePoly<M, C>;
    fn sub(self, rhs: Self) -> SparsePoly<M, C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl<M: Monomial, C: Coeff> Mul for &SparsePoly<M, C> {
    type Output = SparsePoly<M, C>;
    fn mul(self, rhs: Self) -> SparsePoly<M, C> {
        let mut out = SparsePoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(*mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<M: Monomial, C: Coeff> Neg for &SparsePoly<M, C> {
    type Output = SparsePoly<M, C>;
    fn neg(self) -> SparsePoly<M, C> {
        SparsePoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl<M: Monomial, C: Coeff> $tr for SparsePoly<M, C> {
            type Output = SparsePoly<M, C>;
            fn $method(self, rhs: Self) -> SparsePoly<M, C> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<M: Monomial, C: Coeff> Neg for SparsePoly<M, C> {
    type Output = SparsePoly<M, C>;
    fn neg(self) -> SparsePoly<M, C> {
        -&self
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

impl LaurentPoly {
    pub fn r_pow(e: i32) -> Self {
        Self::term(PolarMono::new(e, 0, 0), BigRational::one())
    }

    pub fn p_r() -> Self {
        Self::term(PolarMono::new(0, 1, 0), BigRational::one())
    }

    pub fn p_phi() -> Self {
        Self::term(PolarMono::new(0, 0, 1), BigRational::one())
    }

    pub fn mono(r: i32, pr: u32, pphi: u32, c: BigRational) -> Self {
        Self::term(PolarMono::new(r, pr, pphi), c)
    }

    pub fn d_r(&self) -> Self {
        self.map_terms(|m, c| {
            (m.r != 0).then(|| (PolarMono::new(m.r - 1, m.pr, m.pphi), c * rat(m.r.into())))
        })
    }

    pub fn d_pr(&self) -> Self {
        self.map_terms(|m, c| {
            (m.pr != 0).then(|| (PolarMono::new(m.r, m.pr - 1, m.pphi), c * rat(m.pr.into())))
        })
    }

    pub fn d_pphi(&self) -> Self {
        self.map_terms(|m, c| {
            (m.pphi != 0).then(|| {
                (
                    PolarMono::new(m.r, m.pr, m.pphi - 1),
                    c * rat(m.pphi.into()),
                )
            })
        })
    }

    /// Maximum of `e_pr + e_pφ`, or −1 for the zero polynomial.
    pub fn momentum_degree(&self) -> i64 {
        self.terms()
            .map(|(m, _)| i64::from(m.momentum_degree()))
            .max()
            .unwrap_or(-1)
    }

    /// Evaluates with `r·p_r` supplied as a single quantity `s`:
    /// `r^e p_r^a p_φ^b = r^(e−a) s^a p_φ^b`. This keeps the evaluation
    /// finite when `r` is very large and `p_r` very small.
    pub fn eval_rs<S: Field>(&self, r: S, s: S, p_phi: S) -> S {
        let mut acc = S::zero();
        for (m, c) in self.terms() {
            let v = r.powi(m.r - m.pr as i32) * s.powi(m.pr as i32) * p_phi.powi(m.pphi as i32);
            acc = acc + v.scale(to_f64(c));
        }
        acc
    }

    pub fn eval(&self, r: f64, p_r: f64, p_phi: f64) -> f64 {
        self.eval_rs(
            Complex64::new(r, 0.0),
            Complex64::new(r * p_r, 0.0),
            Complex64::new(p_phi, 0.0),
        )
        .re
    }

    pub fn to_complex(&self) -> ComplexLaurent {
        self.map_terms(|m, c| Some((m, GaussianRational::real(c.clone()))))
    }
}

impl ComplexLaurent {
    pub fn re(&self) -> LaurentPoly {
        self.map_terms(|m, c| Some((m, c.re.clone())))
    }

    pub fn im(&self) -> LaurentPoly {
        self.map_terms(|m, c| Some((m, c.im.clone())))
    }
}

impl ZPoly {
    pub fn z() -> Self {
        Self::term(ZMono::new(1, 0, 0), GaussianRational::one())
    }

    pub fn zbar() -> Self {
        Self::term(ZMono::new(0, 1, 0), GaussianRational::one())
    }

    pub fn r_pow(e: i32) -> Self {
        Self::term(ZMono::new(0, 0, e), GaussianRational::one())
    }

    pub fn rational(q: BigRational) -> Self {
        Self::constant(GaussianRational::real(q))
    }

    /// Complex conjugate as a function: `z ↔ z̄`, coefficients conjugated.
    pub fn conj(&self) -> Self {
        self.map_terms(|m, c| Some((ZMono::new(m.zbar, m.z, m.r), c.conj())))
    }

    /// Exact quotient by `z`, or `None` when some term has no factor `z`.
    pub fn div_z(&self) -> Option<Self> {
        if self.terms().any(|(m, _)| m.z == 0) {
            return None;
        }
        Some(self.map_terms(|m, c| Some((ZMono::new(m.z - 1, m.zbar, m.r), c.clone()))))
    }

    /// Exact quotient by `z̄`.
    pub fn div_zbar(&self) -> Option<Self> {
        Some(self.conj().div_z()?.conj())
    }

    pub fn is_real(&self) -> bool {
        &self.conj() == self
    }

    /// Substitutes `z = p_φ + i r p_r`, `z̄ = p_φ − i r p_r`.
    pub fn to_polar(&self) -> ComplexLaurent {
        let rp = ComplexLaurent::term(PolarMono::new(1, 1, 0), GaussianRational::i());
        let pphi = ComplexLaurent::term(PolarMono::new(0, 0, 1), GaussianRational::one());
        let z = &pphi + &rp;
        let zbar = &pphi - &rp;
        let mut out = ComplexLaurent::zero();
        for (m, c) in self.terms() {
            let term = &(&z.pow(m.z) * &zbar.pow(m.zbar)).mul_monomial(PolarMono::new(m.r, 0, 0))
                * &ComplexLaurent::constant(c.clone());
            out = &out + &term;
        }
        out
    }
}
