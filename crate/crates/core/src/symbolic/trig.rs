//! `TrigPoly = u₀ + u_c·cos 2φ + u_s·sin 2φ` with Laurent coefficients, and
//! the canonical Poisson bracket on it.

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::poly::{LaurentPoly, PolarMono};
use super::SymbolicError;
use crate::fexpr::Scalar;
use crate::phase::PolarState;
use crate::rational::format_rational;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    pub u0: LaurentPoly,
    pub uc: LaurentPoly,
    pub us: LaurentPoly,
}

impl TrigPoly {
    pub fn new(u0: LaurentPoly, uc: LaurentPoly, us: LaurentPoly) -> Self {
        TrigPoly { u0, uc, us }
    }

    /// A φ-independent element.
    pub fn scalar(u0: LaurentPoly) -> Self {
        TrigPoly {
            u0,
            ..Default::default()
        }
    }

    /// `p_φ` as a ring element.
    pub fn p_phi() -> Self {
        Self::scalar(LaurentPoly::p_phi())
    }

    pub fn is_zero(&self) -> bool {
        self.u0.is_zero() && self.uc.is_zero() && self.us.is_zero()
    }

    pub fn is_trig_free(&self) -> bool {
        self.uc.is_zero() && self.us.is_zero()
    }

    /// Max of `e_pr + e_pφ` over all monomials; −1 for zero.
    pub fn momentum_degree(&self) -> i64 {
        [&self.u0, &self.uc, &self.us]
            .iter()
            .map(|p| p.momentum_degree())
            .max()
            .unwrap_or(-1)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        TrigPoly::new(self.u0.scale(k), self.uc.scale(k), self.us.scale(k))
    }

    pub fn add(&self, o: &Self) -> Self {
        TrigPoly::new(&self.u0 + &o.u0, &self.uc + &o.uc, &self.us + &o.us)
    }

    pub fn sub(&self, o: &Self) -> Self {
        TrigPoly::new(&self.u0 - &o.u0, &self.uc - &o.uc, &self.us - &o.us)
    }

    /// Product, defined when at least one factor is φ-free.
    pub fn mul(&self, o: &Self) -> Result<Self, SymbolicError> {
        let (plain, other) = if self.is_trig_free() {
            (&self.u0, o)
        } else if o.is_trig_free() {
            (&o.u0, self)
        } else {
            return Err(SymbolicError::SpanViolation);
        };
        Ok(TrigPoly::new(
            plain * &other.u0,
            plain * &other.uc,
            plain * &other.us,
        ))
    }

    fn map(&self, f: impl Fn(&LaurentPoly) -> LaurentPoly) -> Self {
        TrigPoly::new(f(&self.u0), f(&self.uc), f(&self.us))
    }

    pub fn d_r(&self) -> Self {
        self.map(LaurentPoly::d_r)
    }

    pub fn d_pr(&self) -> Self {
        self.map(LaurentPoly::d_pr)
    }

    pub fn d_pphi(&self) -> Self {
        self.map(LaurentPoly::d_pphi)
    }

    /// `∂_φ`: `(u₀, u_c, u_s) ↦ (0, 2u_s, −2u_c)`.
    pub fn d_phi(&self) -> Self {
        let two = BigRational::from_integer(2.into());
        TrigPoly::new(
            LaurentPoly::zero(),
            self.us.scale(&two),
            self.uc.scale(&-two),
        )
    }

    /// Evaluates at a polar state.
    pub fn eval(&self, s: &PolarState) -> f64 {
        let (sin2, cos2) = (2.0 * s.phi).sin_cos();
        self.u0.eval(s.r, s.p_r, s.p_phi)
            + self.uc.eval(s.r, s.p_r, s.p_phi) * cos2
            + self.us.eval(s.r, s.p_r, s.p_phi) * sin2
    }

    /// Evaluates from polar ingredients given in any scalar type:
    /// `r`, `s = r·p_r`, `p_φ`, `cos 2φ`, `sin 2φ`.
    pub fn eval_parts<S: Scalar>(&self, r: S, s: S, p_phi: S, cos2: S, sin2: S) -> S {
        self.u0.eval_rs(r, s, p_phi)
            + self.uc.eval_rs(r, s, p_phi) * cos2
            + self.us.eval_rs(r, s, p_phi) * sin2
    }

    pub fn eval_complex(&self, s: &PolarState) -> Complex64 {
        let (sin2, cos2) = (2.0 * s.phi).sin_cos();
        self.eval_parts(
            Complex64::new(s.r, 0.0),
            Complex64::new(s.r * s.p_r, 0.0),
            Complex64::new(s.p_phi, 0.0),
            Complex64::new(cos2, 0.0),
            Complex64::new(sin2, 0.0),
        )
    }
}

/// `{a, b} = a_r b_pr − a_pr b_r + a_φ b_pφ − a_pφ b_φ`, exact.
pub fn poisson_bracket(a: &TrigPoly, b: &TrigPoly) -> Result<TrigPoly, SymbolicError> {
    if !a.is_trig_free() && !b.is_trig_free() {
        return Err(SymbolicError::SpanViolation);
    }
    let radial = a.d_r().mul(&b.d_pr())?.sub(&a.d_pr().mul(&b.d_r())?);
    let angular = a
        .d_phi()
        .mul(&b.d_pphi())?
        .sub(&a.d_pphi().mul(&b.d_phi())?);
    Ok(radial.add(&angular))
}

fn fmt_monomial(m: &PolarMono) -> String {
    let mut parts = Vec::new();
    match m.r {
        0 => {}
        1 => parts.push("r".to_string()),
        e => parts.push(format!("r^{e}")),
    }
    for (name, e) in [("p_r", m.pr), ("p_phi", m.pphi)] {
        match e {
            0 => {}
            1 => parts.push(name.to_string()),
            e => parts.push(format!("{name}^{e}")),
        }
    }
    parts.join("*")
}

/// Human-readable form, highest momentum degree first.
pub fn pretty_laurent(p: &LaurentPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by(|(a, _), (b, _)| {
        b.momentum_degree()
            .cmp(&a.momentum_degree())
            .then(b.pr.cmp(&a.pr))
            .then(b.r.cmp(&a.r))
    });
    let mut out = String::new();
    for (i, (m, c)) in terms.into_iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        let mono = fmt_monomial(m);
        let body = match (mono.is_empty(), mag.is_one()) {
            (true, _) => format_rational(&mag),
            (false, true) => mono,
            (false, false) => format!("{}*{mono}", format_rational(&mag)),
        };
        match (i, neg) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push('-');
                out.push_str(&body);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&body);
            }
        }
    }
    out
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.u0.is_zero() {
            parts.push(pretty_laurent(&self.u0));
        }
        if !self.uc.is_zero() {
            parts.push(format!("({})*cos(2phi)", pretty_laurent(&self.uc)));
        }
        if !self.us.is_zero() {
            parts.push(format!("({})*sin(2phi)", pretty_laurent(&self.us)));
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Serialized as `(e_r, e_pr, e_pφ, "num", "den")` tuples; numerator and
/// denominator are decimal strings so arbitrary precision survives JSON.
fn laurent_tuples(p: &LaurentPoly) -> Vec<(i32, u32, u32, String, String)> {
    p.terms()
        .map(|(m, c)| {
            (
                m.r,
                m.pr,
                m.pphi,
                c.numer().to_string(),
                c.denom().to_string(),
            )
        })
        .collect()
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("u0", &laurent_tuples(&self.u0))?;
        map.serialize_entry("uc", &laurent_tuples(&self.uc))?;
        map.serialize_entry("us", &laurent_tuples(&self.us))?;
        map.end()
    }
}
