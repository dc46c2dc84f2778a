//! The analytic function `F` in `H = p² + F(q·p)`.
//!
//! An [`FSpec`] is either an exact polynomial `c + γ₁s + … + γ_N s^N` or a
//! parsed expression over the entire functions `exp, sin, cos, sinh, cosh`.
//! Both evaluate at real, complex, and dual arguments through the same
//! generic [`Field`]/[`Scalar`] code path.
//!
//! The even/odd split `F(x) = A(x²) + x·B(x²)` is exposed through
//! [`FSpec::even_odd`], which accepts any complex `w` (in particular the
//! negative reals `w = -L²`) and stays free of branch cuts because the
//! whitelisted functions are entire.

pub mod dual;
mod parse;
pub mod series;

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dual::{gradient, lift, Dual, DualScalar, Field, Scalar};
pub use parse::{Ast, Func};
use series::{Series, SERIES_LEN};

use crate::rational::{format_rational, serde_rational, serde_rational_vec, to_f64};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FexprError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported function `{name}` at byte {offset} (allowed: exp, sin, cos, sinh, cosh)")]
    UnsupportedFunction { name: String, offset: usize },
    #[error("empty expression")]
    Empty,
    #[error("expression is not finite at s = 0")]
    NonFiniteAtOrigin,
}

/// Polynomial `F(s) = constant + Σ coeffs[i]·s^(i+1)` with exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyF {
    constant: BigRational,
    coeffs: Vec<BigRational>,
    // dense f64 copy, constant first
    approx: Vec<f64>,
}

impl PolyF {
    pub fn constant(&self) -> &BigRational {
        &self.constant
    }

    /// `γ₁, …, γ_N`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `γ_n` (zero beyond the degree; `n = 0` is the constant term).
    pub fn coeff(&self, n: usize) -> BigRational {
        match n {
            0 => self.constant.clone(),
            _ => self
                .coeffs
                .get(n - 1)
                .cloned()
                .unwrap_or_else(BigRational::zero),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExprF {
    text: String,
    ast: Ast,
    taylor: Box<Series>,
}

impl ExprF {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn ast(&self) -> &Ast {
        &self.ast
    }

    /// Taylor coefficients `F^(m)(0)/m!`.
    pub fn taylor(&self) -> &[f64; SERIES_LEN] {
        self.taylor.coeffs()
    }
}

impl PartialEq for ExprF {
    fn eq(&self, other: &Self) -> bool {
        self.ast == other.ast
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FSpec {
    Poly(PolyF),
    Expr(ExprF),
}

// Below this modulus A and B are summed from Taylor coefficients instead of
// the square-root route.
const SERIES_RADIUS: f64 = 0.25;

// Relative coincidence threshold for divided differences.
const COINCIDENCE: f64 = 1e-8;

impl FSpec {
    /// `F ≡ 0`.
    pub fn zero() -> FSpec {
        FSpec::poly(BigRational::zero(), Vec::new())
    }

    /// Canonical polynomial; trailing zero coefficients are dropped.
    pub fn poly(constant: BigRational, mut coeffs: Vec<BigRational>) -> FSpec {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        let approx = std::iter::once(&constant)
            .chain(coeffs.iter())
            .map(to_f64)
            .collect();
        FSpec::Poly(PolyF {
            constant,
            coeffs,
            approx,
        })
    }

    /// `γ s^N`.
    pub fn monomial(degree: usize, gamma: BigRational) -> FSpec {
        assert!(degree >= 1, "monomial degree must be positive");
        let mut coeffs = vec![BigRational::zero(); degree];
        coeffs[degree - 1] = gamma;
        FSpec::poly(BigRational::zero(), coeffs)
    }

    /// Parses an expression in `s`; polynomial expressions become [`FSpec::Poly`].
    pub fn parse(text: &str) -> Result<FSpec, FexprError> {
        let ast = parse::parse(text)?;
        if let Some(mut dense) = ast.to_polynomial() {
            if dense.is_empty() {
                return Ok(FSpec::zero());
            }
            let constant = dense.remove(0);
            return Ok(FSpec::poly(constant, dense));
        }
        let at_zero = ast.eval(Complex64::new(0.0, 0.0));
        if !(at_zero.re.is_finite() && at_zero.im.is_finite()) {
            return Err(FexprError::NonFiniteAtOrigin);
        }
        let taylor = ast.eval(Series::variable());
        if taylor.coeffs().iter().any(|c| !c.is_finite()) {
            return Err(FexprError::NonFiniteAtOrigin);
        }
        Ok(FSpec::Expr(ExprF {
            text: text.trim().to_string(),
            ast,
            taylor: Box::new(taylor),
        }))
    }

    pub fn as_poly(&self) -> Option<&PolyF> {
        match self {
            FSpec::Poly(p) => Some(p),
            FSpec::Expr(_) => None,
        }
    }

    /// `F(x)` in any field.
    pub fn eval<S: Field>(&self, x: S) -> S {
        match self {
            FSpec::Poly(p) => {
                let mut acc = S::zero();
                for &c in p.approx.iter().rev() {
                    acc = acc * x + S::from_f64(c);
                }
                acc
            }
            FSpec::Expr(e) => e.ast.eval(x),
        }
    }

    /// `F` and `F'` at `x`.
    pub fn eval_f(&self, x: DualScalar) -> DualScalar {
        self.eval(x)
    }

    /// `F'(x)` for any scalar.
    pub fn derivative<S: Scalar>(&self, x: S) -> S {
        self.eval(Dual::variable(x)).deriv
    }

    /// `(F, F', F'')` at a real point, via a nested dual.
    pub fn derivs2(&self, x: f64) -> (f64, f64, f64) {
        if let FSpec::Poly(p) = self {
            let (mut f, mut d1, mut d2) = (0.0, 0.0, 0.0);
            for &c in p.approx.iter().rev() {
                d2 = d2 * x + 2.0 * d1;
                d1 = d1 * x + f;
                f = f * x + c;
            }
            return (f, d1, d2);
        }
        let one = Complex64::new(1.0, 0.0);
        let seed = Dual::new(Dual::variable(Complex64::new(x, 0.0)), Dual::constant(one));
        let out = self.eval(seed);
        (out.value.value.re, out.value.deriv.re, out.deriv.deriv.re)
    }

    /// `(A(w), B(w))` with `F(x) = A(x²) + x·B(x²)`.
    pub fn even_odd<S: Scalar>(&self, w: S) -> (S, S) {
        match self {
            FSpec::Poly(p) => {
                let (mut a, mut b) = (S::zero(), S::zero());
                for &c in p.approx.iter().step_by(2).rev() {
                    a = a * w + S::from_f64(c);
                }
                for &c in p.approx.iter().skip(1).step_by(2).rev() {
                    b = b * w + S::from_f64(c);
                }
                (a, b)
            }
            FSpec::Expr(e) => {
                if w.value().norm() <= SERIES_RADIUS {
                    let t = e.taylor.coeffs();
                    let (mut a, mut b) = (S::zero(), S::zero());
                    for j in (0..SERIES_LEN / 2).rev() {
                        a = a * w + S::from_f64(t[2 * j]);
                        b = b * w + S::from_f64(t[2 * j + 1]);
                    }
                    (a, b)
                } else {
                    let x = w.sqrt();
                    let fp = e.ast.eval(x);
                    let fm = e.ast.eval(-x);
                    let half = S::from_f64(0.5);
                    ((fp + fm) * half, (fp - fm) / (x + x))
                }
            }
        }
    }

    /// Complex-valued `(A(w), B(w))`.
    pub fn eval_ab(&self, w: Complex64) -> (Complex64, Complex64) {
        self.even_odd(w)
    }

    /// Divided differences `((A(u)-A(v))/(u-v), (B(u)-B(v))/(u-v))`.
    ///
    /// Polynomial `F` uses the exact complete-homogeneous expansion; other
    /// `F` switch to the midpoint derivative when `u` and `v` nearly coincide.
    pub fn divided_diff<S: Scalar>(&self, u: S, v: S) -> (S, S) {
        let (u, v) = if (u.re(), u.value().im) <= (v.re(), v.value().im) {
            (u, v)
        } else {
            (v, u)
        };
        match self {
            FSpec::Poly(p) => {
                // A(w) = Σ a_j w^j ⇒ DA = Σ_{j≥1} a_j h_{j-1}(u, v)
                let mut da = S::zero();
                let mut db = S::zero();
                let mut h = S::one(); // h_0
                let mut v_pow = S::one();
                for (j, (a_j, b_j)) in even_odd_coeffs(&p.approx).into_iter().enumerate().skip(1) {
                    if j > 1 {
                        v_pow = v_pow * v;
                        h = u * h + v_pow;
                    }
                    da = da + h * S::from_f64(a_j);
                    db = db + h * S::from_f64(b_j);
                }
                (da, db)
            }
            FSpec::Expr(_) => {
                let diff = u - v;
                let scale = 1f64.max(u.value().norm()).max(v.value().norm());
                if diff.value().norm() <= COINCIDENCE * scale {
                    let mid = (u + v) * S::from_f64(0.5);
                    let (a, b) = self.even_odd(Dual::variable(mid));
                    (a.deriv, b.deriv)
                } else {
                    let (au, bu) = self.even_odd(u);
                    let (av, bv) = self.even_odd(v);
                    ((au - av) / diff, (bu - bv) / diff)
                }
            }
        }
    }

    /// Real divided differences of `A` and `B` between `u` and `v`.
    pub fn divided_diff_ab(&self, u: f64, v: f64) -> (f64, f64) {
        let (da, db) = self.divided_diff(Complex64::new(u, 0.0), Complex64::new(v, 0.0));
        (da.re, db.re)
    }
}

/// Pairs `(a_j, b_j)` of `A(w) = Σ a_j w^j`, `B(w) = Σ b_j w^j` from dense
/// coefficients of `F`.
fn even_odd_coeffs(dense: &[f64]) -> Vec<(f64, f64)> {
    let n = dense.len().div_ceil(2);
    (0..n)
        .map(|j| {
            (
                dense.get(2 * j).copied().unwrap_or(0.0),
                dense.get(2 * j + 1).copied().unwrap_or(0.0),
            )
        })
        .collect()
}

impl DualScalar {
    pub fn is_finite(&self) -> bool {
        [self.value, self.deriv]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl fmt::Display for FSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FSpec::Expr(e) => f.write_str(&e.text),
            FSpec::Poly(p) => {
                let mut terms = Vec::new();
                if !p.constant.is_zero() {
                    terms.push(format_rational(&p.constant));
                }
                for (i, c) in p.coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let mono = match i + 1 {
                        1 => "s".to_string(),
                        n => format!("s^{n}"),
                    };
                    terms.push(if c == &BigRational::from_integer(1.into()) {
                        mono
                    } else if c.is_negative() {
                        format!("({})*{mono}", format_rational(c))
                    } else {
                        format!("{}*{mono}", format_rational(c))
                    });
                }
                if terms.is_empty() {
                    f.write_str("0")
                } else {
                    f.write_str(&terms.join(" + "))
                }
            }
        }
    }
}

/// JSON form: `{"type":"poly","coeffs":[...]}` (index `i` is `γ_{i+1}`,
/// optional `"constant"`) or `{"type":"expr","text":"..."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FSpecConfig {
    Poly {
        #[serde(with = "serde_rational_vec")]
        coeffs: Vec<BigRational>,
        #[serde(
            default = "BigRational::zero",
            with = "serde_rational",
            skip_serializing_if = "Zero::is_zero"
        )]
        constant: BigRational,
    },
    Expr {
        text: String,
    },
}

impl TryFrom<&FSpecConfig> for FSpec {
    type Error = FexprError;

    fn try_from(cfg: &FSpecConfig) -> Result<FSpec, FexprError> {
        match cfg {
            FSpecConfig::Poly { coeffs, constant } => {
                Ok(FSpec::poly(constant.clone(), coeffs.clone()))
            }
            FSpecConfig::Expr { text } => FSpec::parse(text),
        }
    }
}

impl From<&FSpec> for FSpecConfig {
    fn from(f: &FSpec) -> FSpecConfig {
        match f {
            FSpec::Poly(p) => FSpecConfig::Poly {
                coeffs: p.coeffs.clone(),
                constant: p.constant.clone(),
            },
            FSpec::Expr(e) => FSpecConfig::Expr {
                text: e.text.clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parse_poly_reads_off_coefficients() {
        let f = FSpec::parse("s + s^2").unwrap();
        let p = f.as_poly().unwrap();
        assert_eq!(p.coeffs(), &[q(1), q(1)]);
        assert!(p.constant().is_zero());
    }

    #[test]
    fn parse_zero_is_empty_poly() {
        let f = FSpec::parse("0").unwrap();
        assert_eq!(f.as_poly().unwrap().coeffs().len(), 0);
        assert_eq!(f, FSpec::zero());
    }

    #[test]
    fn parse_non_polynomial_keeps_ast() {
        let f = FSpec::parse("sin(s) + 2*s^3").unwrap();
        match &f {
            FSpec::Expr(e) => assert!(matches!(e.ast(), Ast::Add(..))),
            _ => panic!("expected an expression"),
        }
    }

    #[test]
    fn singular_at_origin_is_rejected() {
        assert_eq!(FSpec::parse("1/s"), Err(FexprError::NonFiniteAtOrigin));
        assert_eq!(FSpec::parse("s^-1"), Err(FexprError::NonFiniteAtOrigin));
        assert_eq!(FSpec::parse("sin(s)/s"), Err(FexprError::NonFiniteAtOrigin));
    }

    #[test]
    fn eval_f_examples() {
        let f = FSpec::parse("s^2").unwrap();
        let y = f.eval_f(Dual::variable(c(3.0, 0.0)));
        assert_eq!(y.value, c(9.0, 0.0));
        assert_eq!(y.deriv, c(6.0, 0.0));

        let f = FSpec::parse("exp(s)").unwrap();
        let y = f.eval_f(Dual::variable(c(0.0, 1.0)));
        assert_relative_eq!(y.value.re, 1f64.cos(), epsilon = 1e-15);
        assert_relative_eq!(y.value.im, 1f64.sin(), epsilon = 1e-15);

        let f = FSpec::parse("s + s^2").unwrap();
        let y = f.eval_f(Dual::variable(c(1.0, 0.0)));
        assert_eq!(y.value, c(2.0, 0.0));
        assert_eq!(y.deriv, c(3.0, 0.0));
        assert!(y.is_finite());

        let f = FSpec::parse("exp(exp(s))").unwrap();
        assert!(!f.eval_f(Dual::variable(c(800.0, 0.0))).is_finite());
    }

    #[test]
    fn eval_ab_examples() {
        let (a, b) = FSpec::parse("s^2").unwrap().eval_ab(c(5.0, 0.0));
        assert_eq!((a, b), (c(5.0, 0.0), c(0.0, 0.0)));
        let (a, b) = FSpec::parse("s^3").unwrap().eval_ab(c(5.0, 0.0));
        assert_eq!((a, b), (c(0.0, 0.0), c(5.0, 0.0)));

        // oracle: A = (F(i)+F(-i))/2, B = (F(i)-F(-i))/(2i) in complex arithmetic
        let i = c(0.0, 1.0);
        let oracle_a = (i.exp() + (-i).exp()) / 2.0;
        let oracle_b = (i.exp() - (-i).exp()) / (2.0 * i);
        let (a, b) = FSpec::parse("exp(s)").unwrap().eval_ab(c(-1.0, 0.0));
        assert_relative_eq!(a.re, oracle_a.re, epsilon = 1e-14);
        assert_relative_eq!(b.re, oracle_b.re, epsilon = 1e-14);
        assert_relative_eq!(a.re, 0.5403023058681398, epsilon = 1e-14);
        assert_relative_eq!(b.re, 0.8414709848078965, epsilon = 1e-14);
        assert!(a.im.abs() < 1e-15 && b.im.abs() < 1e-15);
    }

    #[test]
    fn b_at_zero_is_derivative() {
        let f = FSpec::parse("sinh(2*s) + cos(s)").unwrap();
        let (a, b) = f.eval_ab(c(0.0, 0.0));
        assert_relative_eq!(a.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(b.re, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn series_and_sqrt_routes_agree_near_switch() {
        let f = FSpec::parse("exp(s) + sin(3*s)").unwrap();
        for &w in &[0.2499, -0.2499, 0.2501, -0.2501] {
            let (a, b) = f.eval_ab(c(w, 0.0));
            let x = c(w, 0.0).sqrt();
            let fp = f.eval(x);
            let fm = f.eval(-x);
            assert_relative_eq!(a.re, ((fp + fm) / 2.0).re, max_relative = 1e-13);
            assert_relative_eq!(b.re, ((fp - fm) / (2.0 * x)).re, max_relative = 1e-12);
        }
    }

    #[test]
    fn divided_diff_examples() {
        let f = FSpec::parse("s^2").unwrap();
        assert_eq!(f.divided_diff_ab(3.0, -1.0), (1.0, 0.0));
        let f = FSpec::parse("s^4").unwrap();
        assert_eq!(f.divided_diff_ab(1.0, -1.0).0, 0.0);

        // oracle: eval_ab at both endpoints
        let f = FSpec::parse("exp(s)").unwrap();
        let (au, _) = f.eval_ab(c(1.0, 0.0));
        let (av, _) = f.eval_ab(c(-1.0, 0.0));
        let oracle = (au.re - av.re) / 2.0;
        let (da, _) = f.divided_diff_ab(1.0, -1.0);
        assert_relative_eq!(da, oracle, epsilon = 1e-14);
        assert_relative_eq!(da, (1f64.cosh() - 1f64.cos()) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(da, 0.501_389_164_5, epsilon = 1e-10);
    }

    #[test]
    fn divided_diff_coincident_points_use_midpoint_derivative() {
        let f = FSpec::parse("cosh(s)").unwrap();
        // A(w) = cosh(sqrt w), A'(w) = sinh(sqrt w)/(2 sqrt w)
        let w: f64 = 2.0;
        let (da, _) = f.divided_diff_ab(w, w);
        assert_relative_eq!(da, w.sqrt().sinh() / (2.0 * w.sqrt()), max_relative = 1e-12);
        let (da2, _) = f.divided_diff_ab(w, w + 1e-12);
        assert_relative_eq!(da, da2, max_relative = 1e-10);
    }

    #[test]
    fn derivs2_matches_closed_form() {
        let f = FSpec::parse("sin(s) + s^3").unwrap();
        let x: f64 = 0.7;
        let (v, d1, d2) = f.derivs2(x);
        assert_relative_eq!(v, x.sin() + x.powi(3), epsilon = 1e-15);
        assert_relative_eq!(d1, x.cos() + 3.0 * x * x, epsilon = 1e-15);
        assert_relative_eq!(d2, -x.sin() + 6.0 * x, epsilon = 1e-14);
        let g = FSpec::parse("2 - s + 3*s^2 - s^4/2").unwrap();
        let (v, d1, d2) = g.derivs2(x);
        assert_relative_eq!(v, 2.0 - x + 3.0 * x * x - x.powi(4) / 2.0, epsilon = 1e-15);
        assert_relative_eq!(d1, -1.0 + 6.0 * x - 2.0 * x.powi(3), epsilon = 1e-15);
        assert_relative_eq!(d2, 6.0 - 6.0 * x * x, epsilon = 1e-14);
    }

    #[test]
    fn config_round_trip() {
        let cfg: FSpecConfig =
            serde_json::from_str(r#"{"type":"poly","coeffs":["1", 0.5, 0]}"#).unwrap();
        let f = FSpec::try_from(&cfg).unwrap();
        let p = f.as_poly().unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.coeff(2), BigRational::new(1.into(), 2.into()));
        let cfg: FSpecConfig = serde_json::from_str(r#"{"type":"expr","text":"exp(s)"}"#).unwrap();
        assert!(matches!(FSpec::try_from(&cfg).unwrap(), FSpec::Expr(_)));
        assert!(
            serde_json::from_str::<FSpecConfig>(r#"{"type":"poly","coeffs":[],"x":1}"#).is_err()
        );
    }
}
