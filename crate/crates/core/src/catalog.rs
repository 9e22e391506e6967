//! Built-in systems with fixed constants.
//!
//! * `gaussian`: `c·exp(½ξᵀAξ + bᵀξ)` with `A = −[[1, ½], [½, 1]]`,
//!   `b = (1, ½)`, `c = 1`.
//! * `logpoly`: `log(a0 + a1ξ + a2ξ²)` with `a = (2, 1, ½)`, at the rational,
//!   polynomial or quadratic stage.
//! * `tt`: `ż1 = (z2 − z1)ξ1`, `ż2 = z2(z2 − z1)ξ2`, `z(0) = (0, 1)`,
//!   `y = z1`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{parse, Expr, VarId};
use crate::lift::{lift, DEFAULT_CAP};
use crate::model::{Class, Entry, FiscidsSystem, Output};
use crate::poly::Poly;
use crate::polynomialize::r_to_p;
use crate::quadratize::p_to_q;

pub const GAUSSIAN_EXPR: &str = "exp(-0.5*(x1^2+x1*x2+x2^2)+x1+0.5*x2)";
pub const GAUSSIAN_VARS: [&str; 2] = ["x1", "x2"];
pub const LOGPOLY_EXPR: &str = "log(2 + xi + 0.5*xi^2)";
pub const LOGPOLY_VARS: [&str; 1] = ["xi"];

/// The Gaussian target at `ξ`.
pub fn gaussian_value(xi: &[f64]) -> f64 {
    let (a, b) = (xi[0], xi[1]);
    libm::exp(-0.5 * (a * a + a * b + b * b) + a + 0.5 * b)
}

/// `log P(ξ)` with the fixed coefficients.
pub fn logpoly_value(xi: &[f64]) -> f64 {
    let x = xi[0];
    libm::log(2.0 + x + 0.5 * x * x)
}

fn lifted(text: &str, names: &[&str]) -> FiscidsSystem {
    let v = VarId::list(names);
    let phi: Vec<Expr> = vec![parse(text, &v).expect("built-in expression parses")];
    lift(&phi, &v, &[], DEFAULT_CAP).expect("built-in expression lifts")
}

/// The three-state quadratic system of the Gaussian.
pub fn gaussian() -> FiscidsSystem {
    lifted(GAUSSIAN_EXPR, &GAUSSIAN_VARS)
        .with_class(Class::Quadratic)
        .expect("gaussian closure is quadratic")
}

/// The log-polynomial chain at `stage` (Rational, Polynomial or Quadratic).
pub fn logpoly(stage: Class) -> FiscidsSystem {
    let r = lifted(LOGPOLY_EXPR, &LOGPOLY_VARS);
    match stage {
        Class::General | Class::Rational => r,
        Class::Polynomial => r_to_p(&r).expect("log-polynomial r_to_p"),
        Class::Quadratic => p_to_q(&r_to_p(&r).expect("log-polynomial r_to_p")).expect("log-polynomial p_to_q"),
    }
}

/// The two-input quadratic system whose output is not differentially
/// algebraic.
pub fn tt() -> FiscidsSystem {
    let z1 = Poly::var(2, 0);
    let z2 = Poly::var(2, 1);
    let diff = &z2 - &z1;
    FiscidsSystem::new(
        vec![
            vec![Entry::Poly(diff.clone()), Entry::Poly(Poly::zero(2))],
            vec![Entry::Poly(Poly::zero(2)), Entry::Poly(&z2 * &diff)],
        ],
        Output::Entries(vec![Entry::Poly(z1)]),
        vec![Expr::zero(), Expr::one()],
        Vec::new(),
        Class::Quadratic,
        vec![String::from("z1"), String::from("z2")],
        vec![String::from("x1"), String::from("x2")],
    )
    .expect("tt system is quadratic")
}

/// Looks a built-in up by name: `gaussian`, `logpoly` or `tt`.
pub fn by_name(name: &str, stage: Class) -> Option<FiscidsSystem> {
    match name {
        "gaussian" => Some(gaussian()),
        "logpoly" => Some(logpoly(stage)),
        "tt" => Some(tt()),
        _ => None,
    }
}
