//! Scalar abstraction shared by every evaluator in the crate.
//!
//! All phase-space functions are written once, generic over [`Scalar`], and
//! instantiated with plain complex numbers for values, [`Dual`] for
//! gradients, and `Dual<Dual<_>>` when a second derivative is needed.
//! The base field is complex because `A(-L^2)` and `B(-L^2)` evaluate `F`
//! on the imaginary axis even for real phase-space points.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Field operations plus the whitelisted entire functions.
pub trait Field:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Integer power by repeated squaring; negative powers go through a reciprocal.
    fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        if n < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }
}

/// A [`Field`] with a well-defined leading value, used for branching
/// decisions (thresholds, orderings) inside generic code.
pub trait Scalar: Field {
    fn value(&self) -> Complex64;
    /// Principal square root.
    fn sqrt(self) -> Self;

    fn from_complex(c: Complex64) -> Self;

    /// Real part of the leading value.
    fn re(&self) -> f64 {
        self.value().re
    }
}

impl Field for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn sinh(self) -> Self {
        Complex64::sinh(self)
    }
    fn cosh(self) -> Self {
        Complex64::cosh(self)
    }
}

impl Scalar for Complex64 {
    fn value(&self) -> Complex64 {
        *self
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn from_complex(c: Complex64) -> Self {
        c
    }
}

/// Forward-mode dual number `value + deriv·ε` with `ε² = 0`.
///
/// `Dual<Complex64>` is the crate's `DualScalar`; nesting gives higher
/// derivatives.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Dual<T> {
    pub value: T,
    pub deriv: T,
}

/// First-order dual over the complex numbers.
pub type DualScalar = Dual<Complex64>;

impl<T: Field> Dual<T> {
    pub fn new(value: T, deriv: T) -> Self {
        Dual { value, deriv }
    }

    pub fn constant(value: T) -> Self {
        Dual {
            value,
            deriv: T::zero(),
        }
    }

    /// The seed variable: derivative one.
    pub fn variable(value: T) -> Self {
        Dual {
            value,
            deriv: T::one(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Dual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dual({:?}, {:?}ε)", self.value, self.deriv)
    }
}

impl<T: Field> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl<T: Field> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl<T: Field> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

impl<T: Field> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = T::one() / rhs.value;
        let value = self.value * inv;
        Dual::new(value, (self.deriv - value * rhs.deriv) * inv)
    }
}

impl<T: Field> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.value, -self.deriv)
    }
}

impl<T: Field> Field for Dual<T> {
    fn from_f64(x: f64) -> Self {
        Dual::constant(T::from_f64(x))
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        Dual::new(e, self.deriv * e)
    }
    fn sin(self) -> Self {
        Dual::new(self.value.sin(), self.deriv * self.value.cos())
    }
    fn cos(self) -> Self {
        Dual::new(self.value.cos(), -(self.deriv * self.value.sin()))
    }
    fn sinh(self) -> Self {
        Dual::new(self.value.sinh(), self.deriv * self.value.cosh())
    }
    fn cosh(self) -> Self {
        Dual::new(self.value.cosh(), self.deriv * self.value.sinh())
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => {
                let lower = self.value.powi(n - 1);
                Dual::new(
                    lower * self.value,
                    self.deriv * lower * T::from_f64(f64::from(n)),
                )
            }
        }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn value(&self) -> Complex64 {
        self.value.value()
    }
    fn sqrt(self) -> Self {
        let root = self.value.sqrt();
        Dual::new(root, self.deriv / (root + root))
    }
    fn from_complex(c: Complex64) -> Self {
        Dual::constant(T::from_complex(c))
    }
}

/// Lift a slice of reals into any scalar type.
pub fn lift<S: Scalar>(xs: &[f64]) -> Vec<S> {
    xs.iter().map(|&x| S::from_f64(x)).collect()
}

/// Gradient of a scalar function of `m` real variables, one dual pass per
/// coordinate.
pub fn gradient<E>(
    x: &[f64],
    mut f: impl FnMut(&[DualScalar]) -> Result<DualScalar, E>,
) -> Result<Vec<f64>, E> {
    let mut seeded: Vec<DualScalar> = x
        .iter()
        .map(|&v| Dual::constant(Complex64::new(v, 0.0)))
        .collect();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        seeded[i].deriv = Complex64::new(1.0, 0.0);
        grad.push(f(&seeded)?.deriv.re);
        seeded[i].deriv = Complex64::new(0.0, 0.0);
    }
    Ok(grad)
}
