//! Truncated real Taylor series, used to expand `F` around zero so that the
//! even/odd parts `A(w)` and `B(w)` can be evaluated near `w = 0` without
//! a square root or a cancelling difference quotient.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::dual::Field;

/// Number of retained Taylor coefficients.
pub const SERIES_LEN: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Series(pub [f64; SERIES_LEN]);

impl Series {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; SERIES_LEN];
        a[0] = c;
        Series(a)
    }

    /// The expansion variable `t` itself.
    pub fn variable() -> Self {
        let mut a = [0.0; SERIES_LEN];
        a[1] = 1.0;
        Series(a)
    }

    pub fn coeffs(&self) -> &[f64; SERIES_LEN] {
        &self.0
    }

    /// Solves `n x_n = Σ_{k=1..n} k u_k y_{n-k}` style recurrences for the
    /// pair (sin, cos) or (sinh, cosh) of `self`; `sign` is -1 for the
    /// circular pair and +1 for the hyperbolic one.
    fn trig_pair(self, s0: f64, c0: f64, sign: f64) -> (Series, Series) {
        let u = &self.0;
        let mut s = [0.0; SERIES_LEN];
        let mut c = [0.0; SERIES_LEN];
        s[0] = s0;
        c[0] = c0;
        for n in 1..SERIES_LEN {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for k in 1..=n {
                let ku = k as f64 * u[k];
                ds += ku * c[n - k];
                dc += ku * s[n - k];
            }
            s[n] = ds / n as f64;
            c[n] = sign * dc / n as f64;
        }
        (Series(s), Series(c))
    }
}

impl Add for Series {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0.iter()) {
            *o += r;
        }
        Series(out)
    }
}

impl Sub for Series {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Series {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self.0;
        for o in out.iter_mut() {
            *o = -*o;
        }
        Series(out)
    }
}

impl Mul for Series {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [0.0; SERIES_LEN];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.0[..SERIES_LEN - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Series(out)
    }
}

impl Div for Series {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // A zero leading coefficient yields non-finite output, which the
        // parser rejects as a singularity at s = 0.
        let b0 = rhs.0[0];
        let mut out = [0.0; SERIES_LEN];
        for n in 0..SERIES_LEN {
            let mut acc = self.0[n];
            for k in 1..=n {
                acc -= rhs.0[k] * out[n - k];
            }
            out[n] = acc / b0;
        }
        Series(out)
    }
}

impl Field for Series {
    fn from_f64(x: f64) -> Self {
        Series::constant(x)
    }

    fn exp(self) -> Self {
        let u = &self.0;
        let mut e = [0.0; SERIES_LEN];
        e[0] = u[0].exp();
        for n in 1..SERIES_LEN {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += k as f64 * u[k] * e[n - k];
            }
            e[n] = acc / n as f64;
        }
        Series(e)
    }

    fn sin(self) -> Self {
        let a = self.0[0];
        self.trig_pair(a.sin(), a.cos(), -1.0).0
    }

    fn cos(self) -> Self {
        let a = self.0[0];
        self.trig_pair(a.sin(), a.cos(), -1.0).1
    }

    fn sinh(self) -> Self {
        let a = self.0[0];
        self.trig_pair(a.sinh(), a.cosh(), 1.0).0
    }

    fn cosh(self) -> Self {
        let a = self.0[0];
        self.trig_pair(a.sinh(), a.cosh(), 1.0).1
    }
}
