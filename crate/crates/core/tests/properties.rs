use num_rational::BigRational;
use proptest::prelude::*;
use superint::integrals::{IntegralSpec, Observable};
use superint::rational::to_f64;
use superint::symbolic::{poisson_bracket, LaurentPoly, TrigPoly};
use superint::verify::{analytic_bracket, fd_bracket, rank_of, DEFAULT_FD_STEP, DEFAULT_RANK_TOL};
use superint::{CartesianState, FSpec};

const ANALYTIC: [&str; 5] = [
    "exp(s)",
    "sin(s)",
    "cos(s)*exp(s/3)",
    "1/(2 + s^2)",
    "s + s^2",
];

fn analytic_f() -> impl Strategy<Value = FSpec> {
    prop::sample::select(ANALYTIC.to_vec()).prop_map(|t| FSpec::parse(t).unwrap())
}

fn at(f: &FSpec, x: f64) -> f64 {
    f.eval(num_complex::Complex64::new(x, 0.0)).re
}

fn poly_f() -> impl Strategy<Value = FSpec> {
    prop::collection::vec(-6i64..=6, 1..7).prop_map(|cs| {
        let coeffs = cs
            .into_iter()
            .map(|c| BigRational::new(c.into(), 4.into()))
            .collect();
        FSpec::poly(BigRational::new(1.into(), 3.into()), coeffs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn even_odd_reconstruction(f in analytic_f(), x in -3.0f64..3.0) {
        let (a, b) = f.even_odd(num_complex::Complex64::new(x * x, 0.0));
        let direct = at(&f, x);
        let rebuilt = a.re + x * b.re;
        let scale = direct.abs().max(a.re.abs() + (x * b.re).abs()).max(1e-300);
        prop_assert!((direct - rebuilt).abs() <= 1e-12 * scale, "{direct} vs {rebuilt}");
    }

    #[test]
    fn dual_derivative_matches_differences(f in analytic_f(), x in -3.0f64..3.0) {
        let d = f.derivative(num_complex::Complex64::new(x, 0.0)).re;
        let h = 1e-6;
        let fd = (at(&f, x + h) - at(&f, x - h)) / (2.0 * h);
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{d} vs {fd}");
    }
}

proptest! {
    #[test]
    fn divided_differences_are_symmetric(
        p in poly_f(), f in analytic_f(), u in -4.0f64..4.0, v in -4.0f64..4.0,
    ) {
        prop_assert_eq!(p.divided_diff_ab(u, v), p.divided_diff_ab(v, u));
        let (a1, b1) = f.divided_diff_ab(u, v);
        let (a2, b2) = f.divided_diff_ab(v, u);
        prop_assert!((a1 - a2).abs() <= 1e-12 * a1.abs().max(1.0));
        prop_assert!((b1 - b2).abs() <= 1e-12 * b1.abs().max(1.0));
    }

    #[test]
    fn poly_split_matches_coefficients(p in poly_f(), w in 0.0f64..4.0) {
        let (a, b) = p.eval_ab(num_complex::Complex64::new(w, 0.0));
        let poly = p.as_poly().unwrap();
        let mut dense = vec![to_f64(poly.constant())];
        dense.extend(poly.coeffs().iter().map(to_f64));
        let (mut ea, mut eb) = (0.0, 0.0);
        for (n, c) in dense.iter().enumerate() {
            let term = c * w.powi((n / 2) as i32);
            if n % 2 == 0 { ea += term } else { eb += term }
        }
        prop_assert!((a.re - ea).abs() <= 1e-13 * ea.abs().max(1.0));
        prop_assert!((b.re - eb).abs() <= 1e-13 * eb.abs().max(1.0));
        prop_assert_eq!((a.im, b.im), (0.0, 0.0));
    }
}

fn laurent() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-2i32..=2, 0u32..=2, 0u32..=2, -3i64..=3), 0..4).prop_map(|terms| {
        terms
            .into_iter()
            .fold(LaurentPoly::zero(), |acc, (r, pr, pphi, c)| {
                &acc + &LaurentPoly::mono(r, pr, pphi, BigRational::from_integer(c.into()))
            })
    })
}

fn scalar_elem() -> impl Strategy<Value = TrigPoly> {
    laurent().prop_map(TrigPoly::scalar)
}

fn trig_elem() -> impl Strategy<Value = TrigPoly> {
    (laurent(), laurent(), laurent()).prop_map(|(a, b, c)| TrigPoly::new(a, b, c))
}

fn br(a: &TrigPoly, b: &TrigPoly) -> TrigPoly {
    poisson_bracket(a, b).unwrap()
}

fn times(a: &TrigPoly, b: &TrigPoly) -> TrigPoly {
    a.mul(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_bilinear_and_antisymmetric(
        a in trig_elem(), b in scalar_elem(), c in scalar_elem(), k in -4i64..=4,
    ) {
        let k = BigRational::from_integer(k.into());
        prop_assert_eq!(br(&a, &b), br(&b, &a).scale(&-BigRational::from_integer(1.into())));
        prop_assert_eq!(br(&a, &b.add(&c.scale(&k))), br(&a, &b).add(&br(&a, &c).scale(&k)));
    }

    #[test]
    fn bracket_obeys_leibniz(a in trig_elem(), b in scalar_elem(), c in scalar_elem()) {
        let lhs = br(&a, &times(&b, &c));
        let rhs = times(&br(&a, &b), &c).add(&times(&b, &br(&a, &c)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_obeys_jacobi(a in scalar_elem(), b in scalar_elem(), c in scalar_elem()) {
        let total = br(&a, &br(&b, &c)).add(&br(&b, &br(&c, &a))).add(&br(&c, &br(&a, &b)));
        prop_assert!(total.is_zero());
    }
}

fn planar_state() -> impl Strategy<Value = CartesianState> {
    prop::array::uniform4(-2.0f64..2.0)
        .prop_map(|[a, b, c, d]| CartesianState::planar([a, b], [c, d]))
        .prop_filter("nondegenerate", |s| {
            s.q2() > 1e-2 && s.p2() > 1e-2 && s.q2() * s.p2() > 1e-2
        })
}

fn observables(f: &FSpec) -> Vec<Observable> {
    [
        IntegralSpec::Energy,
        IntegralSpec::AngularMomentum { i: 1, j: 2 },
        IntegralSpec::Cn { n: 1 },
        IntegralSpec::KAnalytic { axis: 1 },
        IntegralSpec::Cn { n: 3 },
    ]
    .iter()
    .map(|s| Observable::new(s, f, 2).unwrap())
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fd_bracket_is_antisymmetric_and_matches_duals(
        f in analytic_f(), s in planar_state(), i in 0usize..5, j in 0usize..5,
    ) {
        let obs = observables(&f);
        let (a, b) = (&obs[i], &obs[j]);
        let ab = fd_bracket(|x| a.eval(x), |x| b.eval(x), &s, DEFAULT_FD_STEP).unwrap();
        let ba = fd_bracket(|x| b.eval(x), |x| a.eval(x), &s, DEFAULT_FD_STEP).unwrap();
        prop_assert!((ab + ba).abs() <= 1e-8, "{ab} vs {ba}");
        let (ad, scale) = analytic_bracket(a, b, &s).unwrap();
        prop_assert!((ab - ad).abs() <= 1e-6 * scale.max(1.0), "{ab} vs {ad}");
    }

    #[test]
    fn rank_ignores_scaling_and_dependent_rows(
        s in planar_state(), k in prop::array::uniform3(prop_oneof![-1e4f64..-1e-4, 1e-4f64..1e4]),
    ) {
        let f = FSpec::parse("s + s^2").unwrap();
        let obs = observables(&f);
        let (e, l, c1) = (&obs[0], &obs[1], &obs[2]);
        let grads: Vec<Vec<f64>> = [e, l, c1].iter().map(|o| o.gradient(&s).unwrap()).collect();
        let base = rank_of(&grads, DEFAULT_RANK_TOL);
        let scaled: Vec<Vec<f64>> = grads
            .iter()
            .zip(k)
            .map(|(g, k)| g.iter().map(|x| x * k).collect())
            .collect();
        prop_assert_eq!(rank_of(&scaled, DEFAULT_RANK_TOL), base);
        // ∇(E·L + C₁²) = L∇E + E∇L + 2C₁∇C₁
        let (ve, vl, vc) = (e.eval(&s).unwrap(), l.eval(&s).unwrap(), c1.eval(&s).unwrap());
        let combo: Vec<f64> = (0..4)
            .map(|m| vl * grads[0][m] + ve * grads[1][m] + 2.0 * vc * grads[2][m])
            .collect();
        let mut extended = grads.clone();
        extended.push(combo);
        prop_assert!(rank_of(&extended, DEFAULT_RANK_TOL) <= base);
    }
}
