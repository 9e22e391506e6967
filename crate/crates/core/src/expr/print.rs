//! Printer emitting the parser's grammar. For folded trees,
//! `parse(&e.to_string(), vars) == e`.

use core::fmt::{self, Write};

use num_traits::{One, Signed};

use super::Expr;
use crate::Rational;

const P_ADD: u8 = 1;
const P_MUL: u8 = 2;
const P_PREFIX: u8 = 3;
const P_ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(_) => P_ADD,
        Expr::Mul(_) | Expr::Div(_, _) => P_MUL,
        Expr::Neg(_) => P_PREFIX,
        Expr::Const(c) if c.is_negative() => P_PREFIX.min(const_prec(c)),
        Expr::Const(c) => const_prec(c),
        // Right associative: a power as a base needs parentheses.
        Expr::IntPow(_, _) | Expr::RatPow(_, _) => P_PREFIX + 1,
        _ => P_ATOM,
    }
}

fn const_prec(c: &Rational) -> u8 {
    if c.is_integer() {
        P_ATOM
    } else {
        P_MUL
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        f.write_char('(')?;
        write_expr(f, e)?;
        f.write_char(')')
    } else {
        write_expr(f, e)
    }
}

/// True when the term prints with a leading minus sign.
fn is_negative_term(t: &Expr) -> bool {
    match t {
        Expr::Const(c) => c.is_negative(),
        Expr::Mul(fs) => matches!(fs.first(), Some(Expr::Const(c)) if c.is_negative()),
        _ => false,
    }
}

/// Writes a product given its coefficient and remaining factors.
fn write_product(f: &mut fmt::Formatter<'_>, coeff: Option<&Rational>, factors: &[Expr]) -> fmt::Result {
    let mut first = true;
    if let Some(c) = coeff {
        if c.is_negative() {
            f.write_char('-')?;
        }
        let abs = c.abs();
        if !abs.is_one() || factors.is_empty() {
            write_rational(f, &abs)?;
            first = false;
        }
    }
    for factor in factors {
        if !first {
            f.write_char('*')?;
        }
        write_at(f, factor, P_PREFIX)?;
        first = false;
    }
    Ok(())
}

fn split(fs: &[Expr]) -> (Option<&Rational>, &[Expr]) {
    match fs.first() {
        Some(Expr::Const(c)) => (Some(c), &fs[1..]),
        _ => (None, fs),
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Const(c) => {
            if c.is_negative() {
                f.write_char('-')?;
            }
            write_rational(f, &c.abs())
        }
        Expr::Named(n) => f.write_str(n.name()),
        Expr::Var(v) => f.write_str(v.name()),
        Expr::Add(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_at(f, t, P_ADD + 1)?;
                    continue;
                }
                if is_negative_term(t) {
                    f.write_str(" - ")?;
                    match t {
                        Expr::Const(c) => write_rational(f, &c.abs())?,
                        Expr::Mul(fs) => {
                            let (c, rest) = split(fs);
                            let abs = c.map(|c| c.abs());
                            write_product(f, abs.as_ref(), rest)?;
                        }
                        _ => unreachable!(),
                    }
                } else {
                    f.write_str(" + ")?;
                    write_at(f, t, P_ADD + 1)?;
                }
            }
            Ok(())
        }
        Expr::Mul(fs) => {
            let (c, rest) = split(fs);
            write_product(f, c, rest)
        }
        Expr::Neg(a) => {
            f.write_char('-')?;
            write_at(f, a, P_PREFIX)
        }
        Expr::Div(a, b) => {
            write_at(f, a, P_MUL)?;
            f.write_char('/')?;
            write_at(f, b, P_PREFIX)
        }
        Expr::IntPow(b, k) => {
            write_at(f, b, P_ATOM)?;
            if *k < 0 {
                write!(f, "^({})", k)
            } else {
                write!(f, "^{}", k)
            }
        }
        Expr::RatPow(b, r) => {
            write_at(f, b, P_ATOM)?;
            f.write_str("^(")?;
            if r.is_negative() {
                f.write_char('-')?;
            }
            write_rational(f, &r.abs())?;
            f.write_char(')')
        }
        Expr::Func(k, a) => {
            write!(f, "{}(", k.name())?;
            write_expr(f, a)?;
            f.write_char(')')
        }
        Expr::Call(name, args) => {
            write!(f, "{}(", name)?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_expr(f, a)?;
            }
            f.write_char(')')
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}
