use num_traits::ToPrimitive;

use super::{Expr, VarId};
use crate::poly::{Poly, RationalFn};

/// The canonical rational function equal to `e` over the ordered `states`,
/// or `None` when `e` involves anything else: a variable outside `states`,
/// an irrational constant, or a transcendental node.
pub fn as_rational(e: &Expr, states: &[VarId]) -> Option<RationalFn> {
    let n = states.len();
    let r = match e {
        Expr::Const(c) => RationalFn::from_poly(Poly::constant(n, c.clone())),
        Expr::Var(v) => {
            let j = states.iter().position(|s| s == v)?;
            RationalFn::from_poly(Poly::var(n, j))
        }
        Expr::Add(ts) => {
            let mut acc = RationalFn::from_poly(Poly::zero(n));
            for t in ts {
                acc = acc.checked_add(&as_rational(t, states)?).ok()?;
            }
            acc
        }
        Expr::Mul(fs) => {
            let mut acc = RationalFn::from_poly(Poly::one(n));
            for f in fs {
                acc = acc.checked_mul(&as_rational(f, states)?).ok()?;
            }
            acc
        }
        Expr::Neg(a) => as_rational(a, states)?.neg(),
        Expr::Div(a, b) => as_rational(a, states)?.checked_div(&as_rational(b, states)?).ok()?,
        Expr::IntPow(b, k) => as_rational(b, states)?.powi(*k).ok()?,
        Expr::RatPow(b, r) => {
            if !r.is_integer() {
                return None;
            }
            as_rational(b, states)?.powi(r.to_integer().to_i64()?).ok()?
        }
        Expr::Named(_) | Expr::Func(_, _) | Expr::Call(_, _) => return None,
    };
    Some(r)
}

/// Converts a polynomial over `states` back into a folded expression.
pub fn poly_to_expr(p: &Poly, states: &[VarId]) -> Expr {
    let terms = p
        .terms()
        .rev()
        .map(|(m, c)| {
            let mut factors = alloc::vec![Expr::Const(c.clone())];
            for (j, e) in m.exponents().iter().enumerate() {
                if *e > 0 {
                    factors.push(Expr::powi(Expr::var(&states[j]), i64::from(*e)));
                }
            }
            Expr::Mul(factors)
        })
        .collect();
    Expr::Add(terms).fold()
}

/// Converts a rational function over `states` into a folded expression.
pub fn rational_to_expr(r: &RationalFn, states: &[VarId]) -> Expr {
    match r.to_poly() {
        Some(p) => poly_to_expr(&p, states),
        None => Expr::div(poly_to_expr(r.num(), states), poly_to_expr(r.den(), states)).fold(),
    }
}
