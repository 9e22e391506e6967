use fiscids_core::expr::{as_rational, parse, poly_to_expr, rational_to_expr};
use fiscids_core::integrate::integrate;
use fiscids_core::polynomialize::{basis_of, r_to_p, reciprocal_drift};
use fiscids_core::quadratize::{dictionary_of, monomial_drift, p_to_q, MonomialDictionary};
use fiscids_core::{Class, ExponentSet, Expr, IntegrationConfig, Monomial, Poly, Rational, VarId};
use num_bigint::BigInt;
use proptest::prelude::*;

fn vars() -> Vec<VarId> {
    VarId::list(&["x1", "x2"])
}

/// Smooth expressions in `x1`, `x2` that are finite near the origin.
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x1".to_string()),
        Just("x2".to_string()),
        (-5i32..=5).prop_map(|c| format!("({})", c)),
        (1i32..=4, 1i32..=5).prop_map(|(p, q)| format!("({}/{})", p, q)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} + {})", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} - {})", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} * {})", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} / (2 + {}^2))", a, b)),
            (inner.clone(), 0u32..=3).prop_map(|(a, k)| format!("({})^{}", a, k)),
            inner.clone().prop_map(|a| format!("sin({})", a)),
            inner.clone().prop_map(|a| format!("cos({})", a)),
            inner.clone().prop_map(|a| format!("atan({})", a)),
            inner.clone().prop_map(|a| format!("exp(({})/(3 + ({})^2))", a, a)),
            inner.prop_map(|a| format!("log(1 + ({})^2)", a)),
        ]
    })
}

/// Rational expressions without transcendental functions.
fn rational_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x1".to_string()),
        Just("x2".to_string()),
        (-4i32..=4).prop_map(|c| format!("({})", c)),
    ];
    leaf.prop_recursive(4, 20, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} + {})", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} * {})", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({} / (1 + {}^2))", a, b)),
            (inner, 0u32..=3).prop_map(|(a, k)| format!("({})^{}", a, k)),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    [-1.0f64..1.0, -1.0f64..1.0]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn exponent_set(nvars: usize) -> impl Strategy<Value = ExponentSet> {
    prop::collection::vec(prop::collection::vec(0u32..4, nvars), 1..8)
        .prop_map(|ms| ms.into_iter().map(Monomial::from_exponents).collect())
}

fn small_poly(nvars: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0u32..3, nvars), -6i64..=6, 1i64..=4), 0..5).prop_map(move |terms| {
        Poly::from_terms(
            nvars,
            terms.into_iter().map(|(e, n, d)| {
                (
                    Rational::new(BigInt::from(n), BigInt::from(d)),
                    Monomial::from_exponents(e),
                )
            }),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fold_is_idempotent_and_value_preserving(text in smooth_expr(), x in point()) {
        let e = parse(&text, &vars()).unwrap();
        let once = e.fold();
        prop_assert_eq!(once.fold(), once.clone());
        let (a, b) = (e.eval(&x[..]).unwrap(), once.eval(&x[..]).unwrap());
        prop_assert!(close(a, b, 1e-12), "{} vs {} for {}", a, b, text);
    }

    #[test]
    fn printing_round_trips(text in smooth_expr()) {
        let e = parse(&text, &vars()).unwrap().fold();
        let again = parse(&e.to_string(), &vars()).unwrap().fold();
        prop_assert_eq!(again, e);
    }

    #[test]
    fn derivatives_match_central_differences(text in smooth_expr(), x in point(), j in 0usize..2) {
        let v = vars();
        let e = parse(&text, &v).unwrap();
        let d = e.differentiate(&v[j]).unwrap();
        let h = 1e-6;
        let mut lo = x;
        let mut hi = x;
        lo[j] -= h;
        hi[j] += h;
        let fd = (e.eval(&hi[..]).unwrap() - e.eval(&lo[..]).unwrap()) / (2.0 * h);
        let exact = d.eval(&x[..]).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "{}: {} vs {}", text, fd, exact);
    }

    #[test]
    fn rational_form_evaluates_like_the_expression(text in rational_expr(), x in point()) {
        let v = vars();
        let e = parse(&text, &v).unwrap();
        let r = as_rational(&e, &v).unwrap();
        let (a, b) = (e.eval(&x[..]).unwrap(), r.eval_f64(&x));
        prop_assert!(close(a, b, 1e-9), "{}: {} vs {}", text, a, b);
        let back = rational_to_expr(&r, &v).eval(&x[..]).unwrap();
        prop_assert!(close(a, back, 1e-9));
        let lc = r.den().leading_term().unwrap().1.clone();
        prop_assert!(lc > Rational::from_integer(BigInt::from(0)));
        prop_assert!(r.den().monomial_content().is_one() || r.num().is_zero());
    }

    #[test]
    fn polynomial_ring_axioms(p in small_poly(2), q in small_poly(2), s in small_poly(2)) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &s, &p * &(&q * &s));
        prop_assert_eq!(&p * &(&q + &s), &(&p * &q) + &(&p * &s));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &Poly::one(2), p.clone());
        let v = vars();
        let back = as_rational(&poly_to_expr(&p, &v), &v).unwrap().to_poly().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn divisor_closure_is_the_smallest_closed_superset(set in exponent_set(3)) {
        let closed = set.divisor_closure();
        prop_assert!(set.is_subset(&closed));
        prop_assert!(closed.is_divisor_closed());
        prop_assert_eq!(closed.divisor_closure(), closed.clone());
        for m in closed.iter() {
            prop_assert!(set.iter().any(|s| m.divides(s)));
        }
    }

    #[test]
    fn dictionary_starts_with_variables_and_is_sorted(set in exponent_set(3)) {
        let dict = MonomialDictionary::new(3, &set);
        for j in 0..3 {
            prop_assert_eq!(&dict.gamma()[j], &Monomial::unit(3, j));
        }
        for w in dict.gamma()[3..].windows(2) {
            prop_assert!(w[0].degree() < w[1].degree() || (w[0].degree() == w[1].degree() && w[0] > w[1]));
        }
        for m in set.iter().filter(|m| !m.is_one()) {
            prop_assert!(dict.position(m).is_some());
        }
    }
}

#[test]
fn validation_is_monotone_along_the_class_order() {
    let order = [Class::Quadratic, Class::Polynomial, Class::Rational, Class::General];
    let v = VarId::list(&["xi"]);
    let r = fiscids_core::lift::lift(&[parse("log(2 + xi + xi^2/2)", &v).unwrap()], &v, &[], 64).unwrap();
    let p = r_to_p(&r).unwrap();
    let q = p_to_q(&p).unwrap();
    for sys in [&r, &p, &q] {
        let first = order.iter().position(|c| sys.validate_class(*c).passed()).unwrap();
        for c in &order[first..] {
            assert!(sys.validate_class(*c).passed());
        }
        assert_eq!(sys.strictest_class(), order[first]);
    }
    assert_eq!(q.strictest_class(), Class::Quadratic);
}

#[test]
fn auxiliary_states_track_their_definitions() {
    let v = VarId::list(&["xi"]);
    let r = fiscids_core::lift::lift(&[parse("log(2 + xi + xi^2/2)", &v).unwrap()], &v, &[], 64).unwrap();
    let p = r_to_p(&r).unwrap();
    let q = p_to_q(&p).unwrap();
    assert_eq!(basis_of(&r).len(), 1);
    let dict = dictionary_of(&p).unwrap();
    let cfg = IntegrationConfig::default();
    for xi in [-3.0, -1.0, 0.5, 2.0, 4.0] {
        let tp = integrate(&p, &[xi], &cfg).unwrap();
        for z in tp.states() {
            assert!(reciprocal_drift(&r, z) < 1e-8, "xi = {}", xi);
        }
        let tq = integrate(&q, &[xi], &cfg).unwrap();
        for z in tq.states() {
            assert!(monomial_drift(&dict, z) < 1e-8, "xi = {}", xi);
        }
    }
}

#[test]
fn constants_fold_to_exact_values() {
    let e = parse("2^3 - 1/3 + 4/6", &[]).unwrap().fold();
    assert_eq!(e, Expr::rational(25, 3));
}
