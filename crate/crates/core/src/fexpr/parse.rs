//! Recursive-descent parser for expressions in the single variable `s`.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := atom ('^' integer)?
//! integer := ('+' | '-')? digits
//! atom    := number | 's' | func '(' expr ')' | '(' expr ')'
//! func    := 'exp' | 'sin' | 'cos' | 'sinh' | 'cosh'
//! ```
//!
//! `^` binds tighter than unary minus, so `-s^2` is `-(s^2)`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::dual::Field;
use super::FexprError;
use crate::rational::{parse_decimal, to_f64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn apply<S: Field>(self, x: S) -> S {
        match self {
            Func::Exp => x.exp(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Num(BigRational),
    Var,
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, i32),
    Call(Func, Box<Ast>),
}

impl Ast {
    pub fn eval<S: Field>(&self, x: S) -> S {
        match self {
            Ast::Num(q) => S::from_f64(to_f64(q)),
            Ast::Var => x,
            Ast::Neg(a) => -a.eval(x),
            Ast::Add(a, b) => a.eval(x) + b.eval(x),
            Ast::Sub(a, b) => a.eval(x) - b.eval(x),
            Ast::Mul(a, b) => a.eval(x) * b.eval(x),
            Ast::Div(a, b) => a.eval(x) / b.eval(x),
            Ast::Pow(a, n) => a.eval(x).powi(*n),
            Ast::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    /// Dense coefficients (constant first) when the expression is a
    /// polynomial in `s` with rational coefficients.
    pub fn to_polynomial(&self) -> Option<Vec<BigRational>> {
        fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
            while v.last().is_some_and(Zero::is_zero) {
                v.pop();
            }
            v
        }
        fn add(a: &[BigRational], b: &[BigRational], sign: i32) -> Vec<BigRational> {
            let mut out = vec![BigRational::zero(); a.len().max(b.len())];
            for (i, c) in a.iter().enumerate() {
                out[i] += c;
            }
            for (i, c) in b.iter().enumerate() {
                if sign > 0 {
                    out[i] += c;
                } else {
                    out[i] -= c;
                }
            }
            trim(out)
        }
        fn mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
            if a.is_empty() || b.is_empty() {
                return Vec::new();
            }
            let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            trim(out)
        }
        Some(match self {
            Ast::Num(q) => trim(vec![q.clone()]),
            Ast::Var => vec![BigRational::zero(), BigRational::one()],
            Ast::Neg(a) => a.to_polynomial()?.into_iter().map(|c| -c).collect(),
            Ast::Add(a, b) => add(&a.to_polynomial()?, &b.to_polynomial()?, 1),
            Ast::Sub(a, b) => add(&a.to_polynomial()?, &b.to_polynomial()?, -1),
            Ast::Mul(a, b) => mul(&a.to_polynomial()?, &b.to_polynomial()?),
            Ast::Div(a, b) => {
                let den = b.to_polynomial()?;
                if den.len() != 1 {
                    return None;
                }
                let inv = den[0].recip();
                a.to_polynomial()?.into_iter().map(|c| c * &inv).collect()
            }
            Ast::Pow(a, n) => {
                let base = a.to_polynomial()?;
                if *n < 0 {
                    // constant bases only
                    if base.len() != 1 {
                        return None;
                    }
                    return Some(vec![base[0].recip().pow(n.abs())]);
                }
                let mut acc = vec![BigRational::one()];
                for _ in 0..*n {
                    acc = mul(&acc, &base);
                }
                acc
            }
            Ast::Call(..) => return None,
        })
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Num(q) => {
                if q.is_negative() {
                    write!(f, "({})", crate::rational::format_rational(q))
                } else {
                    write!(f, "{}", crate::rational::format_rational(q))
                }
            }
            Ast::Var => f.write_str("s"),
            Ast::Neg(a) => write!(f, "(-{a})"),
            Ast::Add(a, b) => write!(f, "({a} + {b})"),
            Ast::Sub(a, b) => write!(f, "({a} - {b})"),
            Ast::Mul(a, b) => write!(f, "({a} * {b})"),
            Ast::Div(a, b) => write!(f, "({a} / {b})"),
            Ast::Pow(a, n) => write!(f, "{a}^{n}"),
            Ast::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

pub fn parse(text: &str) -> Result<Ast, FexprError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(FexprError::Empty);
    }
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(ast)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> FexprError {
        FexprError::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ast, FexprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, FexprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, FexprError> {
        if self.eat(b'-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, FexprError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let n = self.integer()?;
        if self.peek() == Some(b'^') {
            return Err(self.error("chained exponents are ambiguous; use parentheses"));
        }
        Ok(Ast::Pow(Box::new(base), n))
    }

    fn integer(&mut self) -> Result<i32, FexprError> {
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("exponent must be an integer literal"));
        }
        if self.src.get(self.pos) == Some(&b'.') {
            return Err(self.error("exponent must be an integer literal"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let v: i32 = digits.parse().map_err(|_| FexprError::Parse {
            offset: start,
            message: "exponent out of range".to_string(),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn atom(&mut self) -> Result<Ast, FexprError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
            if self.peek() == Some(b'(') {
                let func =
                    Func::from_name(name).ok_or_else(|| FexprError::UnsupportedFunction {
                        name: name.to_string(),
                        offset: start,
                    })?;
                self.pos += 1;
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                return Ok(Ast::Call(func, Box::new(arg)));
            }
            if name == "s" {
                return Ok(Ast::Var);
            }
            return Err(FexprError::Parse {
                offset: start,
                message: format!("unknown variable `{name}`; the only variable is `s`"),
            });
        }
        Err(self.error("unexpected character"))
    }

    fn number(&mut self) -> Result<Ast, FexprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        parse_decimal(text).map(Ast::Num).ok_or(FexprError::Parse {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }
}
