//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use num_rational::BigRational;
use superint::dynamics::{integrate, IntegratorConfig, Method, Trajectory};
use superint::integrals::{IntegralSpec, Observable};
use superint::phase::plane_pairs;
use superint::sampling::rng_from_seed;
use superint::sampling::{sample_states, SamplingBox};
use superint::symbolic::{
    construct_monomial, construct_odd, construct_zernike, h_symbolic, poisson_bracket, LaurentPoly,
    TrigPoly,
};
use superint::verify::{
    identity8_suite, independence_rank, oracle_suite, rank_suite, DEFAULT_FD_STEP,
    DEFAULT_RANK_TOL, IDENTITY8_MIN_P2,
};
use superint::{CartesianState, FSpec};
use superint_cli::simulate::trajectory_box;
use superint_cli::verify::verify_box;
use superint_cli::{cmd_verify, Overrides, RunConfig};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn qq(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn energy_of(f: &FSpec) -> TrigPoly {
    h_symbolic(f).expect("polynomial F")
}

fn bracket_zero(c: &TrigPoly, f: &FSpec) -> bool {
    poisson_bracket(c, &energy_of(f))
        .map(|b| b.is_zero())
        .unwrap_or(false)
}

fn gammas() -> [BigRational; 2] {
    [q(1), qq(-3, 2)]
}

fn exact_brackets() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for n in 1..=8u32 {
        for gamma in gammas() {
            let f = FSpec::monomial(n as usize, gamma.clone());
            let ok = construct_monomial(n, &gamma)
                .map(|c| bracket_zero(&c, &f))
                .unwrap_or(false);
            if !ok {
                failures.push(format!("N={n} gamma={gamma}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 5.0,
        format!("16 constructions, failures {failures:?}, {secs:.2} s (limit 5 s)"),
    )
}

fn cubic_golden() -> Outcome {
    // (p_r² − p_φ²/r² + γ(r³p_r³ − 2 r p_r p_φ²)) cos 2φ
    //   − (2 p_r p_φ / r + γ(2 r² p_r² p_φ − p_φ³)) sin 2φ
    let mut mismatches = Vec::new();
    for gamma in [q(1), qq(-3, 2), qq(7, 5), q(0), qq(-22, 9)] {
        let term = |r, pr, pphi, c: BigRational| LaurentPoly::mono(r, pr, pphi, c);
        let uc = [
            term(0, 2, 0, q(1)),
            term(-2, 0, 2, q(-1)),
            term(3, 3, 0, gamma.clone()),
            term(1, 1, 2, &gamma * q(-2)),
        ];
        let us = [
            term(-1, 1, 1, q(-2)),
            term(2, 2, 1, &gamma * q(-2)),
            term(0, 0, 3, gamma.clone()),
        ];
        let sum = |ts: &[LaurentPoly]| ts.iter().fold(LaurentPoly::zero(), |a, b| &a + b);
        let expected = TrigPoly::new(LaurentPoly::zero(), sum(&uc), sum(&us));
        match construct_odd(1, &gamma) {
            Ok(c) if c == expected => {}
            Ok(c) => mismatches.push(format!("gamma={gamma}: got {c}")),
            Err(e) => mismatches.push(format!("gamma={gamma}: {e}")),
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("5 values of gamma, exact term-by-term equality, mismatches {mismatches:?}"),
    )
}

fn zernike_family() -> Outcome {
    let pairs = [
        (q(1), q(1)),
        (qq(1, 2), qq(-3, 4)),
        (q(0), q(2)),
        (q(-5), q(0)),
        (qq(7, 3), qq(2, 9)),
    ];
    let mut failures = Vec::new();
    for (g1, g2) in &pairs {
        let f = FSpec::poly(q(0), vec![g1.clone(), g2.clone()]);
        let ok = construct_zernike(g1, g2)
            .map(|c| bracket_zero(&c, &f) && c.momentum_degree() == 2 && c.u0.is_zero())
            .unwrap_or(false);
        if !ok {
            failures.push(format!("({g1}, {g2})"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("5 pairs: bracket zero, degree 2, u0 = 0; failures {failures:?}"),
    )
}

fn degree_law() -> Outcome {
    let mut failures = Vec::new();
    for n in 1..=8u32 {
        for gamma in gammas() {
            let degree = construct_monomial(n, &gamma).map(|c| c.momentum_degree());
            if degree != Ok(n.max(2) as i64) {
                failures.push(format!("N={n} gamma={gamma}: {degree:?}"));
            }
        }
    }
    // N = 1: the odd choice coincides with the Zernike choice (γ, 0), and
    // the degree-2 term is the energy factor.
    let mut n1 = Vec::new();
    for gamma in gammas() {
        let odd = construct_monomial(1, &gamma).ok();
        let zern = construct_zernike(&gamma, &q(0)).ok();
        let same = odd.is_some() && odd == zern;
        n1.push(same);
        if !same {
            failures.push(format!("N=1 gamma={gamma}: differs from Zernike(gamma, 0)"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("degree max(2, N) for N = 1..8; N = 1 equals Zernike(gamma, 0): {n1:?}; failures {failures:?}"),
    )
}

fn identity8() -> Outcome {
    let start = Instant::now();
    let region = SamplingBox::momentum_only(2.0, IDENTITY8_MIN_P2);
    let states = sample_states(8, 1000, 2, &region).expect("sampling").states;
    let mut worst = Vec::new();
    let mut passed = true;
    for text in ["exp(s)", "sin(s)", "s + s^2", "s^3"] {
        let f = FSpec::parse(text).expect("F parses");
        let r = identity8_suite(&f, &states);
        passed &= r.samples == 1000 && r.max_abs_residual <= 1e-10;
        worst.push(format!("{text}: {:.2e}", r.max_abs_residual));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        passed && secs < 1.0,
        format!(
            "1000 states, max |LHS - RHS| [{}], {secs:.3} s (limit 1 s)",
            worst.join(", ")
        ),
    )
}

fn run_all(
    f: &FSpec,
    states: &[CartesianState],
    cfg: &IntegratorConfig,
    obs: &[IntegralSpec],
) -> Result<Vec<Trajectory>, String> {
    states
        .iter()
        .map(|s| integrate(s, f, cfg, obs).map_err(|e| e.to_string()))
        .collect()
}

fn worst_drift(trajs: &[Trajectory]) -> Vec<(String, f64)> {
    let names = &trajs[0].names;
    names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let d = trajs.iter().map(|t| t.drift[k]).fold(0.0, f64::max);
            (name.clone(), d)
        })
        .collect()
}

fn conservation() -> Outcome {
    let start = Instant::now();
    let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, 1e-3, 50.0);
    let half = IntegratorConfig::new(Method::ImplicitMidpoint, 5e-4, 50.0);
    let states = sample_states(6, 10, 2, &trajectory_box(2))
        .expect("sampling")
        .states;
    let common = [
        IntegralSpec::Energy,
        IntegralSpec::AngularMomentum { i: 1, j: 2 },
        IntegralSpec::Cn { n: 1 },
        IntegralSpec::KAnalytic { axis: 1 },
        IntegralSpec::KAnalytic { axis: 2 },
    ];
    let cases = [
        (
            "s + s^2",
            vec![IntegralSpec::Zernike {
                gamma1: q(1),
                gamma2: q(1),
            }],
        ),
        (
            "s^3",
            vec![
                IntegralSpec::CtildeOdd { k: 1, gamma: q(1) },
                IntegralSpec::C3Explicit { gamma: q(1) },
            ],
        ),
    ];
    let mut passed = true;
    let mut detail = Vec::new();
    for (text, extra) in cases {
        let f = FSpec::parse(text).expect("F parses");
        let obs: Vec<IntegralSpec> = common.iter().cloned().chain(extra).collect();
        let coarse = match run_all(&f, &states, &cfg, &obs) {
            Ok(t) => t,
            Err(e) => return outcome(false, format!("F = {text}: {e}")),
        };
        let fine = match run_all(&f, &states, &half, &[IntegralSpec::Energy]) {
            Ok(t) => t,
            Err(e) => return outcome(false, format!("F = {text}, h/2: {e}")),
        };
        let drifts = worst_drift(&coarse);
        let max_drift = drifts.iter().map(|d| d.1).fold(0.0, f64::max);
        let e_coarse = drifts[0].1;
        let e_fine = worst_drift(&fine)[0].1;
        let ratio = e_coarse / e_fine;
        passed &= max_drift <= 1e-6 && ratio >= 3.0;
        let listed: Vec<String> = drifts.iter().map(|(n, d)| format!("{n} {d:.1e}")).collect();
        detail.push(format!(
            "F = {text}: [{}], E-drift ratio h/(h/2) = {ratio:.2}",
            listed.join(", ")
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    passed &= secs < 30.0;
    outcome(
        passed,
        format!("{}; {secs:.1} s (limit 30 s)", detail.join("; ")),
    )
}

fn oracle_agreement() -> Outcome {
    let specs = [
        IntegralSpec::Energy,
        IntegralSpec::AngularMomentum { i: 1, j: 2 },
        IntegralSpec::Cn { n: 1 },
        IntegralSpec::KAnalytic { axis: 1 },
        IntegralSpec::KAnalytic { axis: 2 },
    ];
    let mut passed = true;
    let mut detail = Vec::new();
    for text in ["exp(s)", "s + s^2"] {
        let f = FSpec::parse(text).expect("F parses");
        let obs: Vec<Observable> = specs
            .iter()
            .map(|s| Observable::new(s, &f, 2).expect("valid integral"))
            .collect();
        let mut rng = rng_from_seed(7);
        let states = superint::sampling::sample_from(&mut rng, 1000, 2, &SamplingBox::default())
            .expect("sampling")
            .states;
        let r = oracle_suite(&obs, &states, &mut rng, DEFAULT_FD_STEP);
        passed &= r.pairs == 1000 && r.max_relative_discrepancy <= 1e-6;
        detail.push(format!(
            "F = {text}: {} pairs, max {:.2e}",
            r.pairs, r.max_relative_discrepancy
        ));
    }
    outcome(passed, detail.join("; "))
}

fn independence() -> Outcome {
    let f = FSpec::parse("s + s^2").expect("F parses");
    let states = sample_states(42, 1000, 2, &SamplingBox::default())
        .expect("sampling")
        .states;
    let compile = |specs: &[IntegralSpec]| -> Vec<Observable> {
        specs
            .iter()
            .map(|s| Observable::new(s, &f, 2).expect("valid integral"))
            .collect()
    };
    let three = compile(&[
        IntegralSpec::Energy,
        IntegralSpec::AngularMomentum { i: 1, j: 2 },
        IntegralSpec::Cn { n: 1 },
    ]);
    let mut four_specs = three.iter().map(|o| o.spec().clone()).collect::<Vec<_>>();
    four_specs.push(IntegralSpec::Cn { n: 2 });
    let four = compile(&four_specs);
    let mut both = 0;
    let mut rank3 = 0;
    let mut over = 0;
    for s in &states {
        let a = independence_rank(s, &three, DEFAULT_RANK_TOL);
        let b = independence_rank(s, &four, DEFAULT_RANK_TOL);
        rank3 += usize::from(a == Ok(3));
        both += usize::from(a == Ok(3) && b == Ok(3));
        over += usize::from(matches!(b, Ok(r) if r > 3));
    }
    let n = states.len() as f64;
    let (f3, fboth) = (rank3 as f64 / n, both as f64 / n);
    outcome(
        f3 >= 0.95 && fboth >= 0.95,
        format!(
            "rank(H, L, C1) = 3 at {f3:.3}; rank(H, L, C1, C2) = 3 at the same states {fboth:.3}; states with rank > 3: {over}"
        ),
    )
}

fn n_dimensional() -> Outcome {
    let f = FSpec::parse("s + s^2").expect("F parses");
    let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, 1e-3, 50.0);
    let mut passed = true;
    let mut detail = Vec::new();
    for n in [3usize, 4] {
        let mut obs = vec![IntegralSpec::Energy];
        obs.extend(
            plane_pairs(n)
                .into_iter()
                .map(|(i, j)| IntegralSpec::AngularMomentum { i: i + 1, j: j + 1 }),
        );
        obs.push(IntegralSpec::AngularMomentumTotal);
        obs.push(IntegralSpec::PlaneC1);
        let states = sample_states(90 + n as u64, 10, n, &trajectory_box(n))
            .expect("sampling")
            .states;
        match run_all(&f, &states, &cfg, &obs) {
            Ok(trajs) => {
                let drifts = worst_drift(&trajs);
                let max = drifts.iter().map(|d| d.1).fold(0.0, f64::max);
                passed &= max <= 1e-6;
                detail.push(format!(
                    "n = {n}: {} quantities, max drift {max:.1e}",
                    drifts.len()
                ));
            }
            Err(e) => {
                passed = false;
                detail.push(format!("n = {n}: {e}"));
            }
        }
    }
    let mut set = vec![IntegralSpec::Energy];
    set.extend(
        plane_pairs(3)
            .into_iter()
            .map(|(i, j)| IntegralSpec::AngularMomentum { i: i + 1, j: j + 1 }),
    );
    set.push(IntegralSpec::PlaneC1);
    let obs: Vec<Observable> = set
        .iter()
        .map(|s| Observable::new(s, &f, 3).expect("valid integral"))
        .collect();
    let states = sample_states(42, 1000, 3, &verify_box(3))
        .expect("sampling")
        .states;
    let r = rank_suite(&obs, &states, DEFAULT_RANK_TOL, 5);
    passed &= r.fraction_at_expected >= 0.95;
    detail.push(format!(
        "n = 3 rank 5 of {} quantities at {:.3} of {} states",
        set.len(),
        r.fraction_at_expected,
        r.samples
    ));
    outcome(passed, detail.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let config = r#"{"schema_version": 1, "f": "exp(s)", "seed": 42, "verify": {"samples": 1000}}"#;
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let cfg = RunConfig::from_json(config)
            .and_then(|c| {
                c.resolve(&Overrides {
                    out: Some(out.clone()),
                    ..Overrides::default()
                })
            })
            .expect("config");
        if let Err(e) = cmd_verify(&cfg) {
            return outcome(false, format!("run {run}: {e}"));
        }
        reports.push(fs::read(out.join("verify_report.json")).expect("report written"));
    }
    let same = reports[0] == reports[1];
    outcome(
        same && !reports[0].is_empty(),
        format!(
            "two verify runs with seed 42: {} bytes, identical = {same}",
            reports[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("exact {C, H} = 0 for N = 1..8", exact_brackets),
        ("cubic integral golden polynomial", cubic_golden),
        ("Zernike constructions", zernike_family),
        ("momentum degree law", degree_law),
        ("K two-path identity", identity8),
        ("conservation under implicit midpoint", conservation),
        (
            "dual-number vs finite-difference brackets",
            oracle_agreement,
        ),
        ("functional independence", independence),
        ("n-dimensional generalization", n_dimensional),
        ("deterministic verify reports", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.passed);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
