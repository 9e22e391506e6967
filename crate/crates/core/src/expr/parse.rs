//! Pratt parser for the infix expression grammar.
//!
//! ```text
//! expr    := expr ('+' | '-') expr | expr ('*' | '/') expr
//!          | '-' expr | expr '^' unary | primary
//! primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! number  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```
//!
//! Binding powers, loosest first: `+ -`, `* /`, prefix `-`, `^` (right
//! associative). Exponents must fold to rational constants.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;

use super::{Expr, ExprError, FuncKind, NamedConst, VarId};
use crate::Rational;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn syntax(position: usize, message: &str) -> ExprError {
    ExprError::Syntax {
        position,
        message: message.to_string(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => {
                i += 1;
                Tok::Op(c)
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '0'..='9' | '.' => {
                let (value, end) = lex_number(text, i)?;
                i = end;
                Tok::Num(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Ident(text[start..i].to_string())
            }
            _ => return Err(syntax(i, &format!("unexpected character '{}'", c))),
        };
        out.push((start, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

/// Decimal literal as an exact rational.
fn lex_number(text: &str, start: usize) -> Result<(Rational, usize), ExprError> {
    let bytes = text.as_bytes();
    let mut i = start;
    let mut digits = String::new();
    let mut frac_len = 0usize;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        digits.push(bytes[i] as char);
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            digits.push(bytes[i] as char);
            frac_len += 1;
            i += 1;
        }
    }
    if digits.is_empty() {
        return Err(syntax(start, "malformed number"));
    }
    let mut exponent: i64 = 0;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        let mut sign = 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            if bytes[j] == b'-' {
                sign = -1;
            }
            j += 1;
        }
        let exp_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        // `2e` or `2ex` is a number followed by an identifier, not an exponent.
        if j > exp_start && !(j < bytes.len() && (bytes[j].is_ascii_alphabetic() || bytes[j] == b'_')) {
            exponent = sign
                * text[exp_start..j]
                    .parse::<i64>()
                    .map_err(|_| syntax(exp_start, "exponent out of range"))?;
            i = j;
        }
    }
    let mantissa: BigInt = digits.parse().map_err(|_| syntax(start, "malformed number"))?;
    let scale = exponent - frac_len as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
    };
    Ok((value, i))
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [VarId],
}

const BP_ADD: u8 = 1;
const BP_MUL: u8 = 3;
const BP_PREFIX: u8 = 5;
const BP_POW: u8 = 7;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), &format!("expected {}", what)))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ExprError> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, left_bp, right_bp) = match self.peek() {
                Tok::Op('+') => ('+', BP_ADD, BP_ADD + 1),
                Tok::Op('-') => ('-', BP_ADD, BP_ADD + 1),
                Tok::Op('*') => ('*', BP_MUL, BP_MUL + 1),
                Tok::Op('/') => ('/', BP_MUL, BP_MUL + 1),
                Tok::Op('^') => ('^', BP_POW, BP_POW),
                _ => break,
            };
            if left_bp < min_bp {
                break;
            }
            let (at, _) = self.bump();
            lhs = if op == '^' {
                // Exponent: a (possibly negated) power-level operand.
                let exponent = self.expr(right_bp.min(BP_PREFIX))?.fold();
                match exponent {
                    Expr::Const(r) if r.is_integer() => {
                        let k = num_traits::ToPrimitive::to_i64(&r.to_integer())
                            .ok_or_else(|| syntax(at, "exponent out of range"))?;
                        Expr::IntPow(Box::new(lhs), k)
                    }
                    Expr::Const(r) => Expr::RatPow(Box::new(lhs), r),
                    _ => return Err(syntax(at, "exponent must be a rational constant")),
                }
            } else {
                let rhs = self.expr(right_bp)?;
                match op {
                    '+' => Expr::Add(vec![lhs, rhs]),
                    '-' => Expr::Add(vec![lhs, Expr::neg(rhs)]),
                    '*' => Expr::Mul(vec![lhs, rhs]),
                    _ => Expr::div(lhs, rhs),
                }
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ExprError> {
        let (at, tok) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Op('-') => Ok(Expr::neg(self.expr(BP_PREFIX)?)),
            Tok::Op('+') => self.expr(BP_PREFIX),
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.expr(0)?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr(0)?);
                    }
                    self.expect(Tok::RParen, "')'")?;
                    match FuncKind::from_name(&name) {
                        Some(kind) if args.len() == 1 => Ok(Expr::func(kind, args.pop().unwrap())),
                        Some(_) => Err(syntax(at, &format!("{} takes one argument", name))),
                        None => Ok(Expr::Call(name, args)),
                    }
                } else if let Some(v) = self.vars.iter().find(|v| v.name() == name) {
                    Ok(Expr::Var(v.clone()))
                } else {
                    match name.as_str() {
                        "e" => Ok(Expr::Named(NamedConst::E)),
                        "pi" => Ok(Expr::Named(NamedConst::Pi)),
                        _ => Err(ExprError::UnknownIdentifier(name)),
                    }
                }
            }
            Tok::End => Err(syntax(at, "unexpected end of input")),
            Tok::Op(c) => Err(syntax(at, &format!("unexpected '{}'", c))),
            Tok::RParen => Err(syntax(at, "unexpected ')'")),
            Tok::Comma => Err(syntax(at, "unexpected ','")),
        }
    }
}

/// Parses `text` over the declared variables and returns the folded tree.
///
/// Names not declared in `vars` are rejected, except the constants `e` and
/// `pi` and function names in call position. Calls to functions outside the
/// supported table parse to [`Expr::Call`] so that later stages can report
/// them precisely.
pub fn parse(text: &str, vars: &[VarId]) -> Result<Expr, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars };
    let e = p.expr(0)?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), "unexpected trailing input"));
    }
    Ok(e.fold())
}
