//! Numeric evaluation of the conserved quantities.
//!
//! Every planar integral is written through `s = q·p`, `L = q₁p₂ − q₂p₁`,
//! `|z|² = q²p² = s² + L²` and `cos 2φ`, `sin 2φ` as rational functions of
//! `q`, so no arctangent (and no branch choice) enters. Evaluators are
//! generic over [`Scalar`]; instantiating with [`DualScalar`] yields exact
//! gradients for bracket and rank checks.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::hamiltonian_of;
use crate::fexpr::{gradient, lift, DualScalar, FSpec, Scalar};
use crate::phase::{dot, to_cartesian, CartesianState, PolarState, ORIGIN_RADIUS};
use crate::rational::{format_rational, serde_rational, to_f64};
use crate::symbolic::{construct_even, construct_odd, construct_zernike, SymbolicError, TrigPoly};

/// Threshold on `q²p² = |z|²` below which `z`-based integrals are undefined.
pub const DEGENERATE_Z: f64 = 1e-18;
/// Threshold on `L²` below which the invariant plane is undefined.
pub const COLLINEAR_L2: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegralError {
    #[error("|z|^2 = q^2 p^2 = {0:e} is below {DEGENERATE_Z:e}")]
    DegenerateZ(f64),
    #[error("|q| = {0:e} is below the origin threshold {ORIGIN_RADIUS:e}")]
    OriginSingularity(f64),
    #[error("L^2 = {0:e} is below {COLLINEAR_L2:e}: q and p are collinear")]
    CollinearState(f64),
    #[error("F does not match the construction: {0}")]
    SpecMismatch(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Construction(#[from] SymbolicError),
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

/// A conserved quantity, as named in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegralSpec {
    Energy,
    /// `L_ij = q_i p_j − q_j p_i`, 1-based, `i < j`.
    AngularMomentum {
        #[serde(default = "one")]
        i: usize,
        #[serde(default = "two")]
        j: usize,
    },
    AngularMomentumTotal,
    #[serde(rename = "c_n")]
    Cn {
        n: u32,
    },
    KAnalytic {
        axis: u8,
    },
    CtildeEven {
        k: u32,
        #[serde(with = "serde_rational")]
        gamma: BigRational,
    },
    CtildeOdd {
        k: u32,
        #[serde(with = "serde_rational")]
        gamma: BigRational,
    },
    Zernike {
        #[serde(with = "serde_rational")]
        gamma1: BigRational,
        #[serde(with = "serde_rational")]
        gamma2: BigRational,
    },
    C3Explicit {
        #[serde(with = "serde_rational")]
        gamma: BigRational,
    },
    PlaneC1,
}

impl IntegralSpec {
    /// Column label used in trajectory files and reports.
    pub fn column_name(&self, dim: usize) -> String {
        match self {
            IntegralSpec::Energy => "E".into(),
            IntegralSpec::AngularMomentum { i, j } => {
                if dim == 2 && (*i, *j) == (1, 2) {
                    "L".into()
                } else {
                    format!("L{i}{j}")
                }
            }
            IntegralSpec::AngularMomentumTotal => "L2".into(),
            IntegralSpec::Cn { n } => format!("C{n}"),
            IntegralSpec::KAnalytic { axis } => format!("K{axis}"),
            IntegralSpec::CtildeEven { k, .. } => format!("Ctilde_even_k{k}"),
            IntegralSpec::CtildeOdd { k, .. } => format!("Ctilde_odd_k{k}"),
            IntegralSpec::Zernike { .. } => "Zernike".into(),
            IntegralSpec::C3Explicit { .. } => "C3_explicit".into(),
            IntegralSpec::PlaneC1 => "PlaneC1".into(),
        }
    }

    /// True for quantities that live on the planar chart only.
    pub fn is_planar(&self) -> bool {
        !matches!(
            self,
            IntegralSpec::Energy
                | IntegralSpec::AngularMomentum { .. }
                | IntegralSpec::AngularMomentumTotal
                | IntegralSpec::PlaneC1
        )
    }
}

/// Orthonormal basis `(e₁, e₂)` of a 2-plane in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneBasis {
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

impl PlaneBasis {
    /// Gram–Schmidt on `(q, p)`.
    pub fn from_state(s: &CartesianState) -> Result<PlaneBasis, IntegralError> {
        let (_, l2) = crate::phase::angular_momentum(s);
        if !(l2 > COLLINEAR_L2) {
            return Err(IntegralError::CollinearState(l2));
        }
        let qn = dot(&s.q, &s.q).sqrt();
        let e1: Vec<f64> = s.q.iter().map(|x| x / qn).collect();
        let along = dot(&s.p, &e1);
        let perp: Vec<f64> = s.p.iter().zip(&e1).map(|(p, e)| p - along * e).collect();
        let pn = dot(&perp, &perp).sqrt();
        let e2 = perp.iter().map(|x| x / pn).collect();
        Ok(PlaneBasis { e1, e2 })
    }
}

// Planar invariants shared by the 2-D evaluators.
struct Planar<S> {
    q: [S; 2],
    p: [S; 2],
    s: S,
    l: S,
}

impl<S: Scalar> Planar<S> {
    fn new(q: &[S], p: &[S]) -> Result<Self, IntegralError> {
        if q.len() != 2 || p.len() != 2 {
            return Err(IntegralError::Dimension(format!(
                "planar integral evaluated on an n = {} state",
                q.len()
            )));
        }
        let (q, p) = ([q[0], q[1]], [p[0], p[1]]);
        Ok(Planar {
            q,
            p,
            s: q[0] * p[0] + q[1] * p[1],
            l: q[0] * p[1] - q[1] * p[0],
        })
    }

    fn q2(&self) -> S {
        self.q[0] * self.q[0] + self.q[1] * self.q[1]
    }

    fn require_radius(&self) -> Result<(), IntegralError> {
        let r = self.q2().re().sqrt();
        if !(r > ORIGIN_RADIUS) {
            return Err(IntegralError::OriginSingularity(r));
        }
        Ok(())
    }

    fn require_z(&self) -> Result<(), IntegralError> {
        let q2 = self.q2().re();
        let p2 = self.p[0].re().powi(2) + self.p[1].re().powi(2);
        if !(q2 * p2 > DEGENERATE_Z) {
            return Err(IntegralError::DegenerateZ(q2 * p2));
        }
        Ok(())
    }

    /// Copy with `q` and `p` divided by the real magnitudes of their values.
    /// Degree-zero integrals are unchanged and large states stay finite.
    fn normalized(&self) -> Self {
        let qn = self.q2().re().sqrt();
        let pn = (self.p[0].re().powi(2) + self.p[1].re().powi(2)).sqrt();
        let q = self.q.map(|x| x.scale(1.0 / qn));
        let p = self.p.map(|x| x.scale(1.0 / pn));
        Planar {
            q,
            p,
            s: q[0] * p[0] + q[1] * p[1],
            l: q[0] * p[1] - q[1] * p[0],
        }
    }

    /// `(cos 2φ, sin 2φ)` from `q`.
    fn double_angle(&self) -> (S, S) {
        let q2 = self.q2();
        (
            (self.q[0] * self.q[0] - self.q[1] * self.q[1]) / q2,
            (self.q[0] * self.q[1]).scale(2.0) / q2,
        )
    }
}

fn c1_planar<S: Scalar>(pl: &Planar<S>) -> Result<S, IntegralError> {
    pl.require_z()?;
    pl.require_radius()?;
    let pl = pl.normalized();
    let (cos2, sin2) = pl.double_angle();
    let (s, l) = (pl.s, pl.l);
    let z2 = s * s + l * l;
    Ok(((l * s).scale(2.0) * cos2 - (l * l - s * s) * sin2) / z2)
}

// Im[(z·w̄)^{2n}] / (|z|·|q|)^{2n} with z = L + i s and w = q₁ + i q₂.
fn cn_planar<S: Scalar>(pl: &Planar<S>, n: u32) -> Result<S, IntegralError> {
    if n == 0 {
        return Err(IntegralError::Domain("C_n needs n >= 1".into()));
    }
    pl.require_z()?;
    pl.require_radius()?;
    let pl = pl.normalized();
    let norm = (pl.s * pl.s + pl.l * pl.l).sqrt() * pl.q2().sqrt();
    let re = (pl.l * pl.q[0] + pl.s * pl.q[1]) / norm;
    let im = (pl.s * pl.q[0] - pl.l * pl.q[1]) / norm;
    let (mut acc_re, mut acc_im) = (S::one(), S::zero());
    let (mut base_re, mut base_im) = (re, im);
    let mut e = 2 * n;
    while e > 0 {
        if e & 1 == 1 {
            (acc_re, acc_im) = (
                acc_re * base_re - acc_im * base_im,
                acc_re * base_im + acc_im * base_re,
            );
        }
        e >>= 1;
        if e > 0 {
            (base_re, base_im) = (
                base_re * base_re - base_im * base_im,
                (base_re * base_im).scale(2.0),
            );
        }
    }
    Ok(acc_im)
}

// Divided-difference form of the analytic side of the two-path identity.
fn k_planar<S: Scalar>(pl: &Planar<S>, f: &FSpec, axis: u8) -> Result<S, IntegralError> {
    let (pa, qa) = match axis {
        1 => (pl.p[0], pl.q[0]),
        2 => (pl.p[1], pl.q[1]),
        _ => {
            return Err(IntegralError::Domain(format!(
                "K axis must be 1 or 2, got {axis}"
            )))
        }
    };
    let v = -(pl.l * pl.l);
    let u = pl.s * pl.s;
    let (da, db) = f.divided_diff(u, v);
    let (_, b) = f.even_odd(v);
    let pa2 = pa * pa;
    Ok(pa2 + pl.q2() * pa2 * (da + pl.s * db) + qa * pa * b)
}

// Literal left side; divides by p².
fn k_lhs_planar<S: Scalar>(pl: &Planar<S>, f: &FSpec, axis: u8) -> Result<S, IntegralError> {
    let p2 = pl.p[0] * pl.p[0] + pl.p[1] * pl.p[1];
    let (pa, sign) = match axis {
        1 => (pl.p[0], 1.0),
        2 => (pl.p[1], -1.0),
        _ => {
            return Err(IntegralError::Domain(format!(
                "K axis must be 1 or 2, got {axis}"
            )))
        }
    };
    let h = p2 + f.eval(pl.s);
    let (a, b) = f.even_odd(-(pl.l * pl.l));
    let w = pa * pa / p2;
    Ok(w * h - w * a + (pl.p[0] * pl.p[1] * pl.l / p2 * b).scale(sign))
}

// A TrigPoly with f64 coefficients and exponents of (r, s = r·p_r, p_φ).
#[derive(Debug, Clone)]
struct NumericTrig([Vec<(i32, i32, i32, f64)>; 3]);

impl NumericTrig {
    fn new(t: &TrigPoly) -> Self {
        let conv = |p: &crate::symbolic::LaurentPoly| {
            p.terms()
                .map(|(m, c)| (m.r - m.pr as i32, m.pr as i32, m.pphi as i32, to_f64(c)))
                .collect()
        };
        NumericTrig([conv(&t.u0), conv(&t.uc), conv(&t.us)])
    }
}

fn trig_planar<S: Scalar>(pl: &Planar<S>, t: &NumericTrig) -> Result<S, IntegralError> {
    pl.require_radius()?;
    let (cos2, sin2) = pl.double_angle();
    let r = pl.q2().sqrt();
    let part = |terms: &[(i32, i32, i32, f64)]| {
        terms.iter().fold(S::zero(), |acc, &(er, es, el, c)| {
            acc + (r.powi(er) * pl.s.powi(es) * pl.l.powi(el)).scale(c)
        })
    };
    Ok(part(&t.0[0]) + part(&t.0[1]) * cos2 + part(&t.0[2]) * sin2)
}

// The cubic integral typed in directly, independent of the symbolic layer.
fn c3_planar<S: Scalar>(pl: &Planar<S>, gamma: f64) -> Result<S, IntegralError> {
    pl.require_radius()?;
    let (cos2, sin2) = pl.double_angle();
    let (s, l, r2) = (pl.s, pl.l, pl.q2());
    let g = S::from_f64(gamma);
    let uc = (s * s - l * l) / r2 + g * (s * s * s - (s * l * l).scale(2.0));
    let us = -((s * l).scale(2.0) / r2 + g * ((s * s * l).scale(2.0) - l * l * l));
    Ok(uc * cos2 + us * sin2)
}

#[derive(Debug, Clone)]
enum Compiled {
    Energy(FSpec),
    L(usize, usize),
    L2,
    Cn(u32),
    K(FSpec, u8),
    Trig(Box<NumericTrig>),
    C3(f64),
    PlaneC1(Option<PlaneBasis>),
}

/// An [`IntegralSpec`] bound to a concrete `F` and dimension, ready to
/// evaluate in any scalar type.
#[derive(Debug, Clone)]
pub struct Observable {
    spec: IntegralSpec,
    dim: usize,
    compiled: Compiled,
}

fn require_f(f: &FSpec, expected: &FSpec, what: &str) -> Result<(), IntegralError> {
    if f == expected {
        Ok(())
    } else {
        Err(IntegralError::SpecMismatch(format!(
            "{what} requires F = {expected}, got F = {f}"
        )))
    }
}

fn zernike_f(g1: &BigRational, g2: &BigRational) -> FSpec {
    FSpec::poly(BigRational::zero(), vec![g1.clone(), g2.clone()])
}

impl Observable {
    pub fn new(spec: &IntegralSpec, f: &FSpec, dim: usize) -> Result<Observable, IntegralError> {
        if dim < 2 {
            return Err(IntegralError::Dimension(format!(
                "n must be >= 2, got {dim}"
            )));
        }
        if spec.is_planar() && dim != 2 {
            return Err(IntegralError::Dimension(format!(
                "{} is defined for n = 2 only (got n = {dim}); use plane_c1",
                spec.column_name(2)
            )));
        }
        let compiled = match spec {
            IntegralSpec::Energy => Compiled::Energy(f.clone()),
            IntegralSpec::AngularMomentum { i, j } => {
                if !(1 <= *i && i < j && *j <= dim) {
                    return Err(IntegralError::Domain(format!(
                        "angular momentum indices need 1 <= i < j <= {dim}, got ({i}, {j})"
                    )));
                }
                Compiled::L(i - 1, j - 1)
            }
            IntegralSpec::AngularMomentumTotal => Compiled::L2,
            IntegralSpec::Cn { n } => {
                if *n == 0 {
                    return Err(IntegralError::Domain("C_n needs n >= 1".into()));
                }
                Compiled::Cn(*n)
            }
            IntegralSpec::KAnalytic { axis } => {
                if !matches!(axis, 1 | 2) {
                    return Err(IntegralError::Domain(format!(
                        "K axis must be 1 or 2, got {axis}"
                    )));
                }
                Compiled::K(f.clone(), *axis)
            }
            IntegralSpec::CtildeEven { k, gamma } => {
                if *k == 0 {
                    return Err(IntegralError::Domain("ctilde_even needs k >= 1".into()));
                }
                require_f(
                    f,
                    &FSpec::monomial(2 * *k as usize, gamma.clone()),
                    "ctilde_even",
                )?;
                Compiled::Trig(Box::new(NumericTrig::new(&construct_even(*k, gamma)?)))
            }
            IntegralSpec::CtildeOdd { k, gamma } => {
                require_f(
                    f,
                    &FSpec::monomial(2 * *k as usize + 1, gamma.clone()),
                    "ctilde_odd",
                )?;
                Compiled::Trig(Box::new(NumericTrig::new(&construct_odd(*k, gamma)?)))
            }
            IntegralSpec::Zernike { gamma1, gamma2 } => {
                if gamma1.is_zero() && gamma2.is_zero() {
                    return Err(IntegralError::SpecMismatch(
                        "zernike with gamma1 = gamma2 = 0 is the free case; the construction is undefined"
                            .into(),
                    ));
                }
                require_f(f, &zernike_f(gamma1, gamma2), "zernike")?;
                Compiled::Trig(Box::new(NumericTrig::new(&construct_zernike(
                    gamma1, gamma2,
                )?)))
            }
            IntegralSpec::C3Explicit { gamma } => {
                require_f(f, &FSpec::monomial(3, gamma.clone()), "c3_explicit")?;
                Compiled::C3(to_f64(gamma))
            }
            IntegralSpec::PlaneC1 => Compiled::PlaneC1(None),
        };
        Ok(Observable {
            spec: spec.clone(),
            dim,
            compiled,
        })
    }

    pub fn spec(&self) -> &IntegralSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> String {
        self.spec.column_name(self.dim)
    }

    /// Fixes the invariant-plane basis of a `plane_c1` observable at `s`;
    /// other observables are returned unchanged.
    pub fn anchored_at(&self, s: &CartesianState) -> Result<Observable, IntegralError> {
        let mut out = self.clone();
        if let Compiled::PlaneC1(_) = out.compiled {
            out.compiled = Compiled::PlaneC1(Some(PlaneBasis::from_state(s)?));
        }
        Ok(out)
    }

    /// Generic evaluation at `(q, p)`.
    pub fn eval_with<S: Scalar>(&self, q: &[S], p: &[S]) -> Result<S, IntegralError> {
        if q.len() != self.dim || p.len() != self.dim {
            return Err(IntegralError::Dimension(format!(
                "observable {} built for n = {}, state has n = {}",
                self.name(),
                self.dim,
                q.len()
            )));
        }
        match &self.compiled {
            Compiled::Energy(f) => Ok(hamiltonian_of(q, p, f)),
            Compiled::L(i, j) => Ok(q[*i] * p[*j] - q[*j] * p[*i]),
            Compiled::L2 => {
                let mut acc = S::zero();
                for i in 0..q.len() {
                    for j in i + 1..q.len() {
                        let l = q[i] * p[j] - q[j] * p[i];
                        acc = acc + l * l;
                    }
                }
                Ok(acc)
            }
            Compiled::Cn(n) => cn_planar(&Planar::new(q, p)?, *n),
            Compiled::K(f, axis) => k_planar(&Planar::new(q, p)?, f, *axis),
            Compiled::Trig(t) => trig_planar(&Planar::new(q, p)?, t),
            Compiled::C3(g) => c3_planar(&Planar::new(q, p)?, *g),
            Compiled::PlaneC1(basis) => plane_c1_with(q, p, basis.as_ref()),
        }
    }

    pub fn eval(&self, s: &CartesianState) -> Result<f64, IntegralError> {
        let q: Vec<Complex64> = lift(&s.q);
        let p: Vec<Complex64> = lift(&s.p);
        Ok(self.eval_with(&q, &p)?.re)
    }

    /// Gradient with respect to `(q₁…q_n, p₁…p_n)` by forward-mode AD.
    pub fn gradient(&self, s: &CartesianState) -> Result<Vec<f64>, IntegralError> {
        let n = self.dim;
        gradient(&s.to_flat(), |x: &[DualScalar]| {
            self.eval_with(&x[..n], &x[n..])
        })
    }
}

fn plane_c1_with<S: Scalar>(
    q: &[S],
    p: &[S],
    basis: Option<&PlaneBasis>,
) -> Result<S, IntegralError> {
    let owned;
    let basis = match basis {
        Some(b) => b,
        None => {
            let values = CartesianState {
                q: q.iter().map(Scalar::re).collect(),
                p: p.iter().map(Scalar::re).collect(),
            };
            owned = PlaneBasis::from_state(&values)?;
            &owned
        }
    };
    if basis.e1.len() != q.len() {
        return Err(IntegralError::Dimension(format!(
            "plane basis lives in n = {}, state has n = {}",
            basis.e1.len(),
            q.len()
        )));
    }
    let project = |v: &[S], e: &[f64]| {
        v.iter()
            .zip(e)
            .fold(S::zero(), |acc, (&x, &c)| acc + x.scale(c))
    };
    let q2 = [project(q, &basis.e1), project(q, &basis.e2)];
    let p2 = [project(p, &basis.e1), project(p, &basis.e2)];
    c1_planar(&Planar::new(&q2, &p2)?)
}

fn complex_state(s: &CartesianState) -> (Vec<Complex64>, Vec<Complex64>) {
    (lift(&s.q), lift(&s.p))
}

/// `C₁` in branch-free Cartesian form; `|C₁| ≤ 1`.
pub fn eval_c1(s: &CartesianState) -> Result<f64, IntegralError> {
    let (q, p) = complex_state(s);
    Ok(c1_planar(&Planar::new(&q, &p)?)?.re)
}

/// `C_n = sin(2n(arg z − φ))` evaluated through powers of `z`.
pub fn eval_cn(s: &PolarState, n: u32) -> Result<f64, IntegralError> {
    if n == 0 {
        return Err(IntegralError::Domain("C_n needs n >= 1".into()));
    }
    let z = Complex64::new(s.p_phi, s.r * s.p_r);
    let norm = z.norm();
    if !(norm > 1e-9) {
        return Err(IntegralError::DegenerateZ(norm * norm));
    }
    let unit = z / norm;
    let rot = Complex64::from_polar(1.0, -2.0 * f64::from(n) * s.phi);
    Ok((unit.powu(2 * n) * rot).im)
}

/// Analytic (divided-difference) form of `K`, valid at `p = 0`.
pub fn eval_k(s: &CartesianState, f: &FSpec, axis: u8) -> Result<f64, IntegralError> {
    let (q, p) = complex_state(s);
    Ok(k_planar(&Planar::new(&q, &p)?, f, axis)?.re)
}

/// The literal form of `K` that divides by `p²`.
pub fn eval_k_lhs(s: &CartesianState, f: &FSpec, axis: u8) -> Result<f64, IntegralError> {
    let p2 = s.p2();
    if !(p2 > 0.0) {
        return Err(IntegralError::Domain(format!(
            "p^2 = {p2:e} must be positive"
        )));
    }
    let (q, p) = complex_state(s);
    Ok(k_lhs_planar(&Planar::new(&q, &p)?, f, axis)?.re)
}

/// Evaluates a constructed integral (`ctilde_even`, `ctilde_odd`,
/// `zernike`, `c3_explicit`) at a polar state.
pub fn eval_construction(
    s: &PolarState,
    spec: &IntegralSpec,
    f: &FSpec,
) -> Result<f64, IntegralError> {
    match spec {
        IntegralSpec::CtildeEven { .. }
        | IntegralSpec::CtildeOdd { .. }
        | IntegralSpec::Zernike { .. }
        | IntegralSpec::C3Explicit { .. } => {}
        other => {
            return Err(IntegralError::Domain(format!(
                "{} is not a constructed integral",
                other.column_name(2)
            )))
        }
    }
    let obs = Observable::new(spec, f, 2)?;
    let cart = to_cartesian(s).map_err(|e| IntegralError::Domain(e.to_string()))?;
    obs.eval(&cart)
}

/// `C₁` of the state projected onto a 2-plane; with `basis = None` the plane
/// is `span{q, p}` of the state itself.
pub fn eval_plane_c1(s: &CartesianState, basis: Option<&PlaneBasis>) -> Result<f64, IntegralError> {
    let (q, p) = complex_state(s);
    Ok(plane_c1_with(&q, &p, basis)?.re)
}

/// `Im[(G cos χ − i G sin χ)·(z/z̄)·e^{−2iφ}]`: the constructed integral
/// written through the pair `(G cos χ, G sin χ)` evaluated numerically.
pub fn chi_form(g_cos: f64, g_sin: f64, s: &PolarState) -> f64 {
    let z = Complex64::new(s.p_phi, s.r * s.p_r);
    let ratio = z / z.conj();
    let rot = Complex64::from_polar(1.0, -2.0 * s.phi);
    (Complex64::new(g_cos, -g_sin) * ratio * rot).im
}

/// `(G cos χ, G sin χ)` of the monomial constructions at a state with
/// energy `e`, for real `γ`. Even `N = 2k`: `(E − (−1)^k γ p_φ^{2k}, 0)`;
/// odd `N = 2k+1`: `((−1)^k γ p_φ^{2k+1}, E)`.
pub fn monomial_chi_pair(degree: u32, gamma: f64, e: f64, p_phi: f64) -> (f64, f64) {
    let k = degree / 2;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    if degree.is_multiple_of(2) {
        (e - sign * gamma * p_phi.powi(degree as i32), 0.0)
    } else {
        (sign * gamma * p_phi.powi(degree as i32), e)
    }
}

impl std::fmt::Display for IntegralSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let g = |q: &BigRational| {
            if q.is_negative() {
                format!("({})", format_rational(q))
            } else {
                format_rational(q)
            }
        };
        match self {
            IntegralSpec::CtildeEven { k, gamma } => {
                write!(f, "ctilde_even(k={k}, gamma={})", g(gamma))
            }
            IntegralSpec::CtildeOdd { k, gamma } => {
                write!(f, "ctilde_odd(k={k}, gamma={})", g(gamma))
            }
            IntegralSpec::Zernike { gamma1, gamma2 } => {
                write!(f, "zernike(gamma1={}, gamma2={})", g(gamma1), g(gamma2))
            }
            IntegralSpec::C3Explicit { gamma } => write!(f, "c3_explicit(gamma={})", g(gamma)),
            other => f.write_str(&other.column_name(0)),
        }
    }
}
