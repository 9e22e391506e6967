use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::One;

use super::{Expr, ExprError, FuncKind, VarId};
use crate::Rational;

impl Expr {
    /// Exact partial derivative with respect to `v`, folded.
    ///
    /// The rules keep derivatives rational in the function node itself and
    /// its companions: `tan' = 1 + tan^2`, `sqrt(u)' = u'/(2 sqrt(u))` and
    /// `(u^r)' = r u^r u'/u`, so differentiating never introduces new
    /// transcendental nodes other than the `sin`/`cos` pair.
    pub fn differentiate(&self, v: &VarId) -> Result<Expr, ExprError> {
        Ok(raw_derivative(self, v)?.fold())
    }
}

fn prod(fs: Vec<Expr>) -> Expr {
    Expr::Mul(fs)
}

fn raw_derivative(e: &Expr, v: &VarId) -> Result<Expr, ExprError> {
    if !e.contains_var(v) {
        return Ok(Expr::zero());
    }
    Ok(match e {
        Expr::Const(_) | Expr::Named(_) => Expr::zero(),
        Expr::Var(w) => {
            if w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Add(ts) => Expr::Add(ts.iter().map(|t| raw_derivative(t, v)).collect::<Result<_, _>>()?),
        Expr::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (i, fi) in fs.iter().enumerate() {
                if !fi.contains_var(v) {
                    continue;
                }
                let mut factors = fs.clone();
                factors[i] = raw_derivative(fi, v)?;
                terms.push(prod(factors));
            }
            Expr::Add(terms)
        }
        Expr::Neg(a) => Expr::neg(raw_derivative(a, v)?),
        Expr::Div(a, b) => {
            let da = raw_derivative(a, v)?;
            let db = raw_derivative(b, v)?;
            let num = Expr::Add(vec![
                prod(vec![da, (**b).clone()]),
                Expr::neg(prod(vec![(**a).clone(), db])),
            ]);
            Expr::div(num, Expr::powi((**b).clone(), 2))
        }
        Expr::IntPow(b, k) => prod(vec![
            Expr::int(*k),
            Expr::powi((**b).clone(), k - 1),
            raw_derivative(b, v)?,
        ]),
        Expr::RatPow(b, r) => prod(vec![
            Expr::Const(r.clone()),
            e.clone(),
            raw_derivative(b, v)?,
            Expr::powi((**b).clone(), -1),
        ]),
        Expr::Func(kind, a) => {
            let da = raw_derivative(a, v)?;
            let u = (**a).clone();
            match kind {
                FuncKind::Exp => prod(vec![e.clone(), da]),
                FuncKind::Log => Expr::div(da, u),
                FuncKind::Sin => prod(vec![Expr::func(FuncKind::Cos, u), da]),
                FuncKind::Cos => Expr::neg(prod(vec![Expr::func(FuncKind::Sin, u), da])),
                FuncKind::Tan => prod(vec![Expr::Add(vec![Expr::one(), Expr::powi(e.clone(), 2)]), da]),
                FuncKind::Atan => Expr::div(da, Expr::Add(vec![Expr::one(), Expr::powi(u, 2)])),
                FuncKind::Sqrt => Expr::div(
                    prod(vec![Expr::Const(Rational::new(BigInt::one(), BigInt::from(2))), da]),
                    e.clone(),
                ),
            }
        }
        Expr::Call(name, _) => return Err(ExprError::UnsupportedFunction(name.to_string())),
    })
}

/// Rejects any unsupported call anywhere in the tree.
pub(crate) fn check_supported(e: &Expr) -> Result<(), ExprError> {
    if let Expr::Call(name, _) = e {
        return Err(ExprError::UnsupportedFunction(name.clone()));
    }
    e.children().into_iter().try_for_each(check_supported)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn d(text: &str, names: &[&str], wrt: usize) -> Expr {
        let v = VarId::list(names);
        parse(text, &v).unwrap().differentiate(&v[wrt]).unwrap()
    }

    fn p(text: &str, names: &[&str]) -> Expr {
        parse(text, &VarId::list(names)).unwrap()
    }

    #[test]
    fn power_rule() {
        assert_eq!(d("x1^2", &["x1"], 0), p("2*x1", &["x1"]));
    }

    #[test]
    fn chain_rule_through_exp() {
        let names = ["x1", "x2"];
        assert_eq!(d("exp(x1*x2)", &names, 0), p("x2*exp(x1*x2)", &names));
    }

    #[test]
    fn log_of_quadratic_gives_ratio() {
        let names = ["xi", "a0", "a1", "a2"];
        let got = d("log(a0 + a1*xi + a2*xi^2)", &names, 0);
        let want = p("(a1 + 2*a2*xi)/(a0 + a1*xi + a2*xi^2)", &names);
        assert_eq!(got, want, "{}", got);
    }

    #[test]
    fn closed_rules_for_companion_functions() {
        let names = ["x"];
        assert_eq!(d("tan(x)", &names, 0), p("1 + tan(x)^2", &names));
        assert_eq!(d("sqrt(x)", &names, 0), p("1/2/sqrt(x)", &names));
        assert_eq!(d("sin(2*x)", &names, 0), p("2*cos(2*x)", &names));
        assert_eq!(d("x^(1/3)", &names, 0), p("1/3*x^(1/3)*x^(-1)", &names));
    }

    #[test]
    fn unsupported_function_is_an_error() {
        let v = VarId::list(&["x"]);
        let e = parse("gamma(x) + 1", &v).unwrap();
        assert_eq!(
            e.differentiate(&v[0]).unwrap_err(),
            ExprError::UnsupportedFunction("gamma".into())
        );
    }
}
