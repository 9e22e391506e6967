use alloc::collections::BTreeMap;
use alloc::string::ToString;

use num_traits::{Signed, ToPrimitive};

use super::{Expr, ExprError, FuncKind, VarId};
use crate::poly::rational_to_f64;

/// Source of variable values for [`Expr::eval`].
pub trait Bindings {
    fn value(&self, v: &VarId) -> Option<f64>;
}

impl Bindings for BTreeMap<VarId, f64> {
    fn value(&self, v: &VarId) -> Option<f64> {
        self.get(v).copied()
    }
}

/// Looks variables up by their index.
impl Bindings for [f64] {
    fn value(&self, v: &VarId) -> Option<f64> {
        self.get(v.index()).copied()
    }
}

fn domain(e: &Expr, reason: &str) -> ExprError {
    ExprError::Domain {
        expr: e.to_string(),
        reason: reason.to_string(),
    }
}

impl Expr {
    /// Floating-point value under `bindings`. Every intermediate result must
    /// be finite and every function argument inside its domain.
    pub fn eval<B: Bindings + ?Sized>(&self, bindings: &B) -> Result<f64, ExprError> {
        let out = match self {
            Expr::Const(c) => rational_to_f64(c),
            Expr::Named(n) => n.value(),
            Expr::Var(v) => bindings
                .value(v)
                .ok_or_else(|| ExprError::UnboundVariable(v.name().to_string()))?,
            Expr::Add(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval(bindings)?;
                }
                acc
            }
            Expr::Mul(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval(bindings)?;
                }
                acc
            }
            Expr::Neg(a) => -a.eval(bindings)?,
            Expr::Div(a, b) => {
                let d = b.eval(bindings)?;
                if d == 0.0 {
                    return Err(domain(self, "division by zero"));
                }
                a.eval(bindings)? / d
            }
            Expr::IntPow(b, k) => {
                let x = b.eval(bindings)?;
                if x == 0.0 && *k < 0 {
                    return Err(domain(self, "negative power of zero"));
                }
                powi(x, *k)
            }
            Expr::RatPow(b, r) => {
                let x = b.eval(bindings)?;
                let odd_root = r.denom().is_odd_integer();
                let p = rational_to_f64(r);
                if x < 0.0 {
                    if !odd_root {
                        return Err(domain(self, "even root of a negative number"));
                    }
                    let mag = libm::pow(-x, p);
                    if r.numer().is_odd_integer() {
                        -mag
                    } else {
                        mag
                    }
                } else if x == 0.0 && r.is_negative() {
                    return Err(domain(self, "negative power of zero"));
                } else {
                    libm::pow(x, p)
                }
            }
            Expr::Func(kind, a) => {
                let x = a.eval(bindings)?;
                match kind {
                    FuncKind::Exp => libm::exp(x),
                    FuncKind::Log => {
                        if x <= 0.0 {
                            return Err(domain(self, "logarithm of a nonpositive value"));
                        }
                        libm::log(x)
                    }
                    FuncKind::Sin => libm::sin(x),
                    FuncKind::Cos => libm::cos(x),
                    FuncKind::Tan => libm::tan(x),
                    FuncKind::Atan => libm::atan(x),
                    FuncKind::Sqrt => {
                        if x < 0.0 {
                            return Err(domain(self, "square root of a negative value"));
                        }
                        libm::sqrt(x)
                    }
                }
            }
            Expr::Call(name, _) => return Err(ExprError::UnsupportedFunction(name.clone())),
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(domain(self, "non-finite value"))
        }
    }
}

trait OddInteger {
    fn is_odd_integer(&self) -> bool;
}

impl OddInteger for num_bigint::BigInt {
    fn is_odd_integer(&self) -> bool {
        (self % 2u32).to_i32().is_some_and(|r| r != 0)
    }
}

pub(crate) fn powi(x: f64, k: i64) -> f64 {
    if let Ok(k32) = i32::try_from(k) {
        let mut acc = 1.0;
        let mut base = if k32 < 0 { 1.0 / x } else { x };
        let mut e = k32.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    } else {
        libm::pow(x, k as f64)
    }
}
