//! End-to-end acceptance checks, one test per criterion. Each prints a
//! PASS/FAIL line straight to stderr so it shows up without `--nocapture`.

use std::io::Write;
use std::time::{Duration, Instant};

use fiscids::pipeline::{build, promote};
use fiscids::verify::{cross_compare, grid_compare, snapshot, tt_identity_deviation, GridSpec};
use fiscids_core::catalog::{self, GAUSSIAN_EXPR, LOGPOLY_EXPR};
use fiscids_core::expr::{as_rational, parse};
use fiscids_core::integrate::output_at;
use fiscids_core::polynomialize::r_to_p;
use fiscids_core::quadratize::p_to_q;
use fiscids_core::tt::tt_oracle;
use fiscids_core::{
    Class, Entry, ExponentSet, Expr, FiscidsSystem, IntegrationConfig, Monomial, Output, Poly, Rational, RationalFn,
    VarId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, name: &str, ok: bool, detail: &str) {
    let line = format!(
        "acceptance criterion {} [{}]: {} ({})\n",
        n,
        name,
        if ok { "PASS" } else { "FAIL" },
        detail
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {} failed: {}", n, detail);
}

fn poly(text: &str, names: &[String]) -> Poly {
    let v = VarId::list(names);
    as_rational(&parse(text, &v).unwrap(), &v).unwrap().to_poly().unwrap()
}

fn is_quadratic_shape(sys: &FiscidsSystem) -> bool {
    let states = sys.states();
    let f_ok = sys
        .f()
        .iter()
        .flatten()
        .all(|e| e.to_poly(states).is_some_and(|p| p.total_degree() <= 2));
    let h_ok = sys.h().entries().is_some_and(|h| {
        h.iter()
            .all(|e| e.to_poly(states).is_some_and(|p| p.total_degree() <= 1))
    });
    f_ok && h_ok
}

#[test]
fn criterion_1_gaussian_end_to_end() {
    let start = Instant::now();
    let sys = build(GAUSSIAN_EXPR, &["x1", "x2"], &[], Class::Quadratic, 64).unwrap();
    let names = sys.state_names().to_vec();
    let rows = [["z1*z2", "z1*z3"], ["-1", "-1/2"], ["-1/2", "-1"]];
    let structure = sys.big_n() == 3
        && sys.validate_class(Class::Quadratic).passed()
        && rows.iter().enumerate().all(|(k, row)| {
            row.iter()
                .enumerate()
                .all(|(j, t)| sys.f()[k][j] == Entry::Poly(poly(t, &names)))
        })
        && sys.z0() == [Expr::int(1), Expr::int(1), Expr::rational(1, 2)];

    let points = GridSpec::parse("-2:2:21,-2:2:21").unwrap().points();
    let config = IntegrationConfig::default();
    let reference = |xi: &[f64]| Ok(vec![catalog::gaussian_value(xi)]);
    let rep = grid_compare(&sys, &reference, &points, &config);
    let snap = snapshot(&sys, &points, &[0.0], &config).unwrap();
    let fixed = snap.rows.len() == 441 && snap.rows.iter().all(|r| r.y == Ok(vec![1.0]));
    let elapsed = start.elapsed();

    report(
        1,
        "gaussian",
        structure && rep.passed(1e-8) && rep.points == 441 && fixed && elapsed < Duration::from_secs(5),
        &format!(
            "N = {}, quadratic structure {}, max_abs = {:.3e} over {} points, y(0) == 1 on all rows: {}, {:.2?}",
            sys.big_n(),
            structure,
            rep.max_abs,
            rep.successes(),
            fixed,
            elapsed
        ),
    );
}

#[test]
fn criterion_2_log_polynomial_chain() {
    let start = Instant::now();
    let r = build(LOGPOLY_EXPR, &["xi"], &[], Class::Rational, 64).unwrap();
    let p = r_to_p(&r).unwrap();
    let q = p_to_q(&p).unwrap();
    let has_cubic = p
        .f()
        .iter()
        .flatten()
        .any(|e| e.to_poly(p.states()).is_some_and(|x| x.total_degree() == 3));
    let names = q.state_names().to_vec();
    let q_rows = [
        "2*z3 + 2*z4",
        "1",
        "-2*z5 - 2*z6",
        "z3 - 2*z2*z5 - 2*z2*z6",
        "-4*z3*z5 - 4*z3*z6",
        "z5 - 4*z4*z5 - 4*z4*z6",
    ];
    let q_match = q.big_n() == 6
        && q_rows
            .iter()
            .enumerate()
            .all(|(k, t)| q.f()[k][0] == Entry::Poly(poly(t, &names)));
    let counts = (r.big_n(), p.big_n(), q.big_n()) == (2, 3, 6)
        && r.class() == Class::Rational
        && p.validate_class(Class::Polynomial).passed()
        && q.validate_class(Class::Quadratic).passed();

    let points = GridSpec::parse("-1:1:41").unwrap().points();
    let config = IntegrationConfig::default();
    let mut worst: f64 = 0.0;
    let mut complete = true;
    for (a, b) in [(&r, &p), (&r, &q), (&p, &q)] {
        let rep = cross_compare(a, b, &points, &config).unwrap();
        complete &= rep.failures.is_empty() && rep.points == 41;
        worst = worst.max(rep.max_abs);
    }
    let reference = |xi: &[f64]| Ok(vec![catalog::logpoly_value(xi)]);
    for s in [&r, &p, &q] {
        let rep = grid_compare(s, &reference, &points, &config);
        complete &= rep.failures.is_empty();
        worst = worst.max(rep.max_abs);
    }
    let elapsed = start.elapsed();

    report(
        2,
        "log-polynomial",
        counts && has_cubic && q_match && complete && worst <= 1e-8 && elapsed < Duration::from_secs(5),
        &format!(
            "N = {}/{}/{}, cubic entry {}, Q rows match {}, max_abs = {:.3e}, {:.2?}",
            r.big_n(),
            p.big_n(),
            q.big_n(),
            has_cubic,
            q_match,
            worst,
            elapsed
        ),
    );
}

#[test]
fn criterion_3_two_route_check() {
    let start = Instant::now();
    let sys = catalog::tt();
    let config = IntegrationConfig::default();
    let e = std::f64::consts::E;
    let (mut worst, mut worst_identity, mut count) = (0.0f64, 0.0f64, 0);
    for i in 0..10 {
        let xi2 = 0.3 + 0.6 * i as f64 / 9.0;
        for k in 0..10 {
            let xi1 = 0.1 + (0.9 * e * xi2 - 0.1) * k as f64 / 9.0;
            let y = output_at(&sys, &[xi1, xi2], 1.0, &config).unwrap()[0];
            let want = tt_oracle(xi1, xi2, 1e-12).unwrap();
            worst = worst.max((y - want).abs());
            worst_identity = worst_identity.max(tt_identity_deviation(&sys, &[xi1, xi2], &config).unwrap());
            count += 1;
        }
    }
    let boundary = output_at(&sys, &[0.0, 0.5], 1.0, &config).unwrap()[0];
    let elapsed = start.elapsed();

    report(
        3,
        "quadrature route",
        count == 100 && worst <= 1e-6 && worst_identity <= 1e-7 && boundary == 0.0 && elapsed < Duration::from_secs(10),
        &format!(
            "{} points, max |ode - oracle| = {:.3e}, max identity deviation = {:.3e}, {:.2?}",
            count, worst, worst_identity, elapsed
        ),
    );
}

fn half(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    format!("{}/2", rng.gen_range(lo..=hi)).parse().unwrap()
}

fn monomials(nvars: usize, max_deg: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one(nvars)];
    for _ in 0..max_deg {
        let mut next = out.clone();
        for m in &out {
            for j in 0..nvars {
                let p = m.mul(&Monomial::unit(nvars, j));
                if !next.contains(&p) {
                    next.push(p);
                }
            }
        }
        out = next;
    }
    out
}

fn random_poly(rng: &mut ChaCha8Rng, nvars: usize) -> Poly {
    let terms = monomials(nvars, 2)
        .into_iter()
        .filter_map(|m| {
            if rng.gen_bool(0.5) {
                Some((half(rng, -1, 1), m))
            } else {
                None
            }
        })
        .collect::<Vec<_>>();
    Poly::from_terms(nvars, terms).unwrap()
}

/// Positive on all of R^N and at least 1, so `|num/den| <= |num|`.
fn random_denominator(rng: &mut ChaCha8Rng, nvars: usize) -> Poly {
    let names: Vec<String> = (1..=nvars).map(|i| format!("z{}", i)).collect();
    let (j, k) = (rng.gen_range(0..nvars), rng.gen_range(0..nvars));
    let text = match rng.gen_range(0..3) {
        0 => format!("1 + {}*z{}^2", rng.gen_range(1..=2), j + 1),
        1 => format!("2 + z{0}^2 - z{0}", j + 1),
        _ => format!("1 + z{}^2 + z{}^2/2", j + 1, k + 1),
    };
    poly(&text, &names)
}

fn random_entry(rng: &mut ChaCha8Rng, nvars: usize) -> Entry {
    let num = random_poly(rng, nvars);
    if rng.gen_bool(0.4) {
        Entry::from_rational(RationalFn::new(num, random_denominator(rng, nvars)).unwrap())
    } else {
        Entry::Poly(num)
    }
}

fn random_rational_system(rng: &mut ChaCha8Rng) -> FiscidsSystem {
    let big_n = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=2);
    let f = (0..big_n)
        .map(|_| (0..n).map(|_| random_entry(rng, big_n)).collect())
        .collect();
    let mut h = random_entry(rng, big_n);
    if rng.gen_bool(0.5) {
        let den = random_denominator(rng, big_n);
        h = Entry::from_rational(RationalFn::new(Poly::var(big_n, 0), den).unwrap());
    }
    let z0 = (0..big_n).map(|_| Expr::rational(rng.gen_range(-2..=2), 2)).collect();
    FiscidsSystem::new(
        f,
        Output::Entries(vec![h]),
        z0,
        Vec::new(),
        Class::Rational,
        (1..=big_n).map(|i| format!("z{}", i)).collect(),
        (1..=n).map(|i| format!("x{}", i)).collect(),
    )
    .unwrap()
}

const RANDOM_SEED: u64 = 0x5eed_0004;

fn random_systems() -> Vec<FiscidsSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    (0..100).map(|_| random_rational_system(&mut rng)).collect()
}

#[test]
fn criterion_4_transform_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED ^ 1);
    let config = IntegrationConfig::default();
    let (mut failures, mut worst, mut with_denominators) = (Vec::new(), 0.0f64, 0);
    for (i, r) in random_systems().iter().enumerate() {
        if !r.validate_class(Class::Polynomial).passed() {
            with_denominators += 1;
        }
        let p = match r_to_p(r) {
            Ok(p) if p.validate_class(Class::Polynomial).passed() => p,
            other => {
                failures.push(format!("#{} r_to_p: {:?}", i, other.err()));
                continue;
            }
        };
        let q = match p_to_q(&p) {
            Ok(q) if q.validate_class(Class::Quadratic).passed() && is_quadratic_shape(&q) => q,
            other => {
                failures.push(format!("#{} p_to_q: {:?}", i, other.err()));
                continue;
            }
        };
        for _ in 0..3 {
            let xi: Vec<f64> = (0..r.n()).map(|_| rng.gen_range(-0.05..0.05)).collect();
            let outs: Vec<_> = [r, &p, &q].iter().map(|s| output_at(s, &xi, 1.0, &config)).collect();
            match (&outs[0], &outs[1], &outs[2]) {
                (Ok(a), Ok(b), Ok(c)) => {
                    worst = worst.max((a[0] - b[0]).abs()).max((a[0] - c[0]).abs());
                }
                _ => failures.push(format!("#{} integration at {:?}: {:?}", i, xi, outs)),
            }
        }
    }
    report(
        4,
        "transform equivalence",
        failures.is_empty() && worst <= 1e-6,
        &format!(
            "100 systems ({} with denominators), max output gap = {:.3e}, failures: {:?}",
            with_denominators, worst, failures
        ),
    );
}

#[test]
fn criterion_5_quadratic_structure() {
    let mut systems: Vec<FiscidsSystem> = random_systems()
        .iter()
        .map(|r| p_to_q(&r_to_p(r).unwrap()).unwrap())
        .collect();
    systems.push(catalog::gaussian());
    systems.push(catalog::logpoly(Class::Quadratic));
    systems.push(catalog::tt());
    for text in [
        GAUSSIAN_EXPR,
        "sin(x1)*x2 + cos(x2)",
        "1/(1 + x1^2 + x2^2)",
        "atan(x1*x2)",
    ] {
        systems.push(build(text, &["x1", "x2"], &[], Class::Quadratic, 64).unwrap());
    }
    let bad = systems.iter().filter(|s| !is_quadratic_shape(s)).count();
    report(
        5,
        "quadratic structure",
        bad == 0,
        &format!("{} quadratic systems, {} with an entry over degree", systems.len(), bad),
    );
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => String::from("x1"),
            1 => String::from("x2"),
            _ => format!("({}/2)", rng.gen_range(-4..=4)),
        };
    }
    let a = random_expr(rng, depth - 1);
    let b = random_expr(rng, depth - 1);
    match rng.gen_range(0..12) {
        0 => format!("({} + {})", a, b),
        1 => format!("({} - {})", a, b),
        2 => format!("({} * {})", a, b),
        3 => format!("({} / (2 + ({})^2))", a, b),
        4 => format!("({})^{}", a, rng.gen_range(2..=3)),
        5 => format!("exp(({0})/(1 + ({0})^2))", a),
        6 => format!("log(1 + ({})^2)", a),
        7 => format!("sin({})", a),
        8 => format!("cos({})", a),
        9 => format!("atan({})", a),
        10 => format!("sqrt(1 + ({})^2)", a),
        _ => format!("tan(({0})/(2 + ({0})^2))", a),
    }
}

#[test]
fn criterion_6_symbolic_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let v = VarId::list(&["x1", "x2"]);
    let h = 1e-5;
    let (mut worst, mut bad) = (0.0f64, Vec::new());
    for _ in 0..50 {
        let text = random_expr(&mut rng, 3);
        let e = parse(&text, &v).unwrap();
        let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        for (j, var) in v.iter().enumerate() {
            let exact = e.differentiate(var).unwrap().eval(&x[..]).unwrap();
            let (mut lo, mut hi) = (x, x);
            lo[j] -= h;
            hi[j] += h;
            let fd = (e.eval(&hi[..]).unwrap() - e.eval(&lo[..]).unwrap()) / (2.0 * h);
            let rel = (fd - exact).abs() / exact.abs().max(1.0);
            worst = worst.max(rel);
            if rel > 1e-6 {
                bad.push(format!("d/d{} {} at {:?}: {} vs {}", var.name(), text, x, exact, fd));
            }
        }
    }
    report(
        6,
        "symbolic derivatives",
        bad.is_empty(),
        &format!(
            "50 expressions, 100 partials, max relative error = {:.3e}, failures: {:?}",
            worst, bad
        ),
    );
}

#[test]
fn criterion_7_rk4_order() {
    let sys = catalog::gaussian();
    let xi = [1.5, -1.0];
    let exact = catalog::gaussian_value(&xi);
    let errors: Vec<f64> = [20, 40, 80, 160]
        .iter()
        .map(|&n| (output_at(&sys, &xi, 1.0, &IntegrationConfig::fixed(n)).unwrap()[0] - exact).abs())
        .collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    report(
        7,
        "rk4 order",
        ratios.iter().all(|r| (12.0..=20.0).contains(r)),
        &format!(
            "steps 20/40/80/160, errors {:?}, ratios {:.2?}",
            errors.iter().map(|e| format!("{:.3e}", e)).collect::<Vec<_>>(),
            ratios
        ),
    );
}

fn random_set(rng: &mut ChaCha8Rng, nvars: usize, size: usize) -> ExponentSet {
    let mut set = ExponentSet::new();
    while set.len() < size {
        let e: Vec<u32> = (0..nvars).map(|_| rng.gen_range(0..=5)).collect();
        if e.iter().sum::<u32>() <= 5 {
            set.insert(Monomial::from_exponents(e));
        }
    }
    set
}

#[test]
fn criterion_8_divisor_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut bad = Vec::new();
    for trial in 0..200 {
        let nvars = rng.gen_range(1..=4);
        let size = rng.gen_range(1..=6);
        let s = random_set(&mut rng, nvars, size);
        let mut t: ExponentSet = s.iter().cloned().collect();
        for m in random_set(&mut rng, nvars, 2).iter() {
            t.insert(m.clone());
        }
        let cs = s.divisor_closure();
        let idempotent = cs.divisor_closure() == cs;
        let monotone = cs.is_subset(&t.divisor_closure()) && s.is_subset(&cs);
        let downward = cs
            .iter()
            .all(|m| (0..nvars).all(|j| m.lower(j).is_none_or(|l| cs.contains(&l))));
        let minimal = cs.iter().all(|m| s.iter().any(|g| m.divides(g)));
        if !(idempotent && monotone && downward && minimal) {
            bad.push(trial);
        }
    }
    report(
        8,
        "divisor closure",
        bad.is_empty(),
        &format!("200 sets, failing trials: {:?}", bad),
    );
}

/// `h(z0)` evaluated directly from the entries.
fn h_at_z0(sys: &FiscidsSystem) -> Vec<f64> {
    let empty: [f64; 0] = [];
    let z0: Vec<f64> = sys.z0().iter().map(|e| e.eval(&empty[..]).unwrap()).collect();
    sys.h()
        .entries()
        .unwrap()
        .iter()
        .map(|e| match e {
            Entry::Poly(p) => p.eval_f64(&z0),
            Entry::Rational(r) => r.eval_f64(&z0),
            Entry::Expr(x) => x.eval(&z0[..]).unwrap(),
        })
        .collect()
}

#[test]
fn criterion_9_fixed_initial_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut systems = vec![
        catalog::gaussian(),
        catalog::logpoly(Class::Rational),
        catalog::logpoly(Class::Polynomial),
        catalog::logpoly(Class::Quadratic),
        catalog::tt(),
    ];
    for (text, class) in [
        (GAUSSIAN_EXPR, Class::Quadratic),
        ("sin(x1)*x2 + cos(x2)", Class::Quadratic),
        ("1/(1 + x1^2 + x2^2)", Class::Polynomial),
        ("log(3 + x1 + x2^2)", Class::Rational),
    ] {
        systems.push(build(text, &["x1", "x2"], &[], class, 64).unwrap());
    }
    systems.push(promote(&catalog::logpoly(Class::Rational), Class::Quadratic).unwrap());
    let config = IntegrationConfig::default();
    let mut bad = Vec::new();
    for (i, sys) in systems.iter().enumerate() {
        let want = h_at_z0(sys);
        for _ in 0..20 {
            let xi: Vec<f64> = (0..sys.n()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y = output_at(sys, &xi, 0.0, &config).unwrap();
            if y != want {
                bad.push(format!("system {} at {:?}: {:?} vs {:?}", i, xi, y, want));
            }
        }
    }
    report(
        9,
        "fixed initial output",
        bad.is_empty(),
        &format!("{} systems x 20 inputs, mismatches: {:?}", systems.len(), bad),
    );
}
