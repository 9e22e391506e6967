//! Symbolic scalar expressions over named variables.
//!
//! Expressions are immutable trees. [`Expr::fold`] puts a tree into the
//! canonical sum-of-products form used throughout the crate: nested sums and
//! products are flattened, exact constants are combined, like terms and like
//! factors are merged, and commutative operands are sorted by the structural
//! order `Ord for Expr`. No algebraic identities beyond that are applied.

mod diff;
mod eval;
mod parse;
mod print;
mod rational;

pub(crate) use diff::check_supported;
pub(crate) use eval::powi;
pub use eval::Bindings;
pub use parse::parse;
pub use rational::{as_rational, poly_to_expr, rational_to_expr};

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unsupported function `{0}`")]
    UnsupportedFunction(String),
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

/// A named variable with its position in the declared ordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    index: u32,
    name: Arc<str>,
}

impl VarId {
    pub fn new(name: &str, index: usize) -> Self {
        VarId {
            index: index as u32,
            name: Arc::from(name),
        }
    }

    /// Variables `names[i]` with index `i`.
    pub fn list<S: AsRef<str>>(names: &[S]) -> Vec<VarId> {
        names
            .iter()
            .enumerate()
            .map(|(i, n)| VarId::new(n.as_ref(), i))
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> usize {
        self.index as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedConst {
    E,
    Pi,
}

impl NamedConst {
    pub fn name(self) -> &'static str {
        match self {
            NamedConst::E => "e",
            NamedConst::Pi => "pi",
        }
    }

    pub fn value(self) -> f64 {
        match self {
            NamedConst::E => core::f64::consts::E,
            NamedConst::Pi => core::f64::consts::PI,
        }
    }
}

/// Elementary functions with a closed differentiation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FuncKind {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Atan,
    Sqrt,
}

impl FuncKind {
    pub fn name(self) -> &'static str {
        match self {
            FuncKind::Exp => "exp",
            FuncKind::Log => "log",
            FuncKind::Sin => "sin",
            FuncKind::Cos => "cos",
            FuncKind::Tan => "tan",
            FuncKind::Atan => "atan",
            FuncKind::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => FuncKind::Exp,
            "log" | "ln" => FuncKind::Log,
            "sin" => FuncKind::Sin,
            "cos" => FuncKind::Cos,
            "tan" => FuncKind::Tan,
            "atan" => FuncKind::Atan,
            "sqrt" => FuncKind::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(Rational),
    Named(NamedConst),
    Var(VarId),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    IntPow(Box<Expr>, i64),
    /// `base^(p/q)` for a non-integer rational exponent.
    RatPow(Box<Expr>, Rational),
    Func(FuncKind, Box<Expr>),
    /// Application of a function without a supported rule (e.g. `gamma`).
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Const(Rational::from_integer(BigInt::from(v)))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::Const(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(v: &VarId) -> Expr {
        Expr::Var(v.clone())
    }

    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    pub fn func(kind: FuncKind, arg: Expr) -> Expr {
        Expr::Func(kind, Box::new(arg))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn powi(base: Expr, k: i64) -> Expr {
        Expr::IntPow(Box::new(base), k)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    /// Direct children, in order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Named(_) | Expr::Var(_) => Vec::new(),
            Expr::Add(v) | Expr::Mul(v) | Expr::Call(_, v) => v.iter().collect(),
            Expr::Neg(a) | Expr::IntPow(a, _) | Expr::RatPow(a, _) | Expr::Func(_, a) => vec![a],
            Expr::Div(a, b) => vec![a, b],
        }
    }

    /// Rebuilds the node with `f` applied to every child.
    pub fn map_children<F: FnMut(&Expr) -> Expr>(&self, mut f: F) -> Expr {
        match self {
            Expr::Const(_) | Expr::Named(_) | Expr::Var(_) => self.clone(),
            Expr::Add(v) => Expr::Add(v.iter().map(f).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(f).collect()),
            Expr::Call(n, v) => Expr::Call(n.clone(), v.iter().map(f).collect()),
            Expr::Neg(a) => Expr::Neg(Box::new(f(a))),
            Expr::IntPow(a, k) => Expr::IntPow(Box::new(f(a)), *k),
            Expr::RatPow(a, r) => Expr::RatPow(Box::new(f(a)), r.clone()),
            Expr::Func(k, a) => Expr::Func(*k, Box::new(f(a))),
            Expr::Div(a, b) => Expr::Div(Box::new(f(a)), Box::new(f(b))),
        }
    }

    /// Pre-order test over all nodes.
    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    /// True when no variable occurs.
    pub fn is_constant(&self) -> bool {
        !self.any(&|e| matches!(e, Expr::Var(_)))
    }

    pub fn contains_var(&self, v: &VarId) -> bool {
        self.any(&|e| matches!(e, Expr::Var(w) if w == v))
    }

    /// Free variables in ascending `VarId` order.
    pub fn free_vars(&self) -> Vec<VarId> {
        let mut out = alloc::collections::BTreeSet::new();
        self.collect_vars(&mut out);
        out.into_iter().collect()
    }

    fn collect_vars(&self, out: &mut alloc::collections::BTreeSet<VarId>) {
        if let Expr::Var(v) = self {
            out.insert(v.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Top-down replacement: the first (outermost) node for which `f`
    /// returns `Some` is replaced and not descended into.
    pub fn replace(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        match f(self) {
            Some(r) => r,
            None => self.map_children(|c| c.replace(f)),
        }
    }

    /// Substitutes variables; unmapped variables are kept.
    pub fn substitute_vars(&self, f: &dyn Fn(&VarId) -> Option<Expr>) -> Expr {
        self.replace(&|e| match e {
            Expr::Var(v) => f(v),
            _ => None,
        })
    }

    /// Canonical form. Idempotent: `e.fold().fold() == e.fold()`.
    pub fn fold(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Named(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => fold_mul(vec![Expr::int(-1), a.fold()]),
            Expr::Add(ts) => fold_add(ts.iter().map(Expr::fold).collect()),
            Expr::Mul(fs) => fold_mul(fs.iter().map(Expr::fold).collect()),
            Expr::Div(a, b) => fold_div(a.fold(), b.fold()),
            Expr::IntPow(b, k) => fold_intpow(b.fold(), *k),
            Expr::RatPow(b, r) => fold_ratpow(b.fold(), r.clone()),
            Expr::Func(k, a) => fold_func(*k, a.fold()),
            Expr::Call(n, args) => Expr::Call(n.clone(), args.iter().map(Expr::fold).collect()),
        }
    }
}

/// Splits a folded term into its rational coefficient and the remaining
/// factors.
fn split_coeff(t: Expr) -> (Rational, Vec<Expr>) {
    match t {
        Expr::Const(c) => (c, Vec::new()),
        Expr::Mul(mut fs) => {
            if let Some(Expr::Const(_)) = fs.first() {
                let Expr::Const(c) = fs.remove(0) else { unreachable!() };
                (c, fs)
            } else {
                (Rational::one(), fs)
            }
        }
        other => (Rational::one(), vec![other]),
    }
}

fn build_product(c: Rational, mut factors: Vec<Expr>) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    if factors.is_empty() {
        return Expr::Const(c);
    }
    if c.is_one() {
        if factors.len() == 1 {
            return factors.pop().unwrap();
        }
        return Expr::Mul(factors);
    }
    factors.insert(0, Expr::Const(c));
    Expr::Mul(factors)
}

fn fold_add(terms: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(terms.len());
    for t in terms {
        match t {
            Expr::Add(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut constant = Rational::zero();
    let mut like: BTreeMap<Vec<Expr>, Rational> = BTreeMap::new();
    for t in flat {
        let (c, rest) = split_coeff(t);
        if rest.is_empty() {
            constant += c;
        } else {
            *like.entry(rest).or_insert_with(Rational::zero) += c;
        }
    }
    let mut out: Vec<Expr> = like
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(rest, c)| build_product(c, rest))
        .collect();
    if !constant.is_zero() {
        out.push(Expr::Const(constant));
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

fn fold_mul(factors: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(factors.len());
    for f in factors {
        match f {
            Expr::Mul(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut coeff = Rational::one();
    let mut powers: BTreeMap<Expr, i64> = BTreeMap::new();
    for f in flat {
        match f {
            Expr::Const(c) => coeff *= c,
            Expr::IntPow(b, k) => *powers.entry(*b).or_insert(0) += k,
            other => *powers.entry(other).or_insert(0) += 1,
        }
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    let mut rest = Vec::new();
    let mut reflatten = false;
    for (base, k) in powers {
        match fold_intpow(base, k) {
            Expr::Const(c) => coeff *= c,
            other => {
                reflatten |= matches!(other, Expr::Mul(_));
                rest.push(other);
            }
        }
    }
    if reflatten {
        rest.push(Expr::Const(coeff));
        return fold_mul(rest);
    }
    rest.sort();
    build_product(coeff, rest)
}

fn fold_div(a: Expr, b: Expr) -> Expr {
    if let Expr::Const(d) = &b {
        if d.is_zero() {
            return Expr::Div(Box::new(a), Box::new(b));
        }
        return fold_mul(vec![a, Expr::Const(d.recip())]);
    }
    if a.is_zero() {
        return Expr::zero();
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn fold_intpow(base: Expr, k: i64) -> Expr {
    match (base, k) {
        (_, 0) => Expr::one(),
        (b, 1) => b,
        (Expr::Const(c), k) => {
            if c.is_zero() && k < 0 {
                return Expr::IntPow(Box::new(Expr::Const(c)), k);
            }
            let v = num_traits::pow(c, k.unsigned_abs() as usize);
            Expr::Const(if k < 0 { v.recip() } else { v })
        }
        (Expr::IntPow(b, j), k) => fold_intpow(*b, j * k),
        (b, k) => Expr::IntPow(Box::new(b), k),
    }
}

/// Exact `q`-th root of a nonnegative rational, if it exists.
fn exact_root(c: &Rational, q: u32) -> Option<Rational> {
    if c.is_negative() {
        return None;
    }
    let n = c.numer().nth_root(q);
    let d = c.denom().nth_root(q);
    if num_traits::pow(n.clone(), q as usize) == *c.numer() && num_traits::pow(d.clone(), q as usize) == *c.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

fn fold_ratpow(base: Expr, r: Rational) -> Expr {
    if r.is_integer() {
        if let Some(k) = r.to_integer().to_i64() {
            return fold_intpow(base, k);
        }
    }
    if let Expr::Const(c) = &base {
        if let Some(q) = r.denom().to_u32() {
            if let (Some(root), Some(p)) = (exact_root(c, q), r.numer().to_i64()) {
                if !(root.is_zero() && p < 0) {
                    return fold_intpow(Expr::Const(root), p);
                }
            }
        }
    }
    Expr::RatPow(Box::new(base), r)
}

fn fold_func(kind: FuncKind, arg: Expr) -> Expr {
    if let Expr::Const(c) = &arg {
        let special = match kind {
            FuncKind::Exp | FuncKind::Cos if c.is_zero() => Some(Expr::one()),
            FuncKind::Sin | FuncKind::Tan | FuncKind::Atan if c.is_zero() => Some(Expr::zero()),
            FuncKind::Log if c.is_one() => Some(Expr::zero()),
            FuncKind::Sqrt => exact_root(c, 2).map(Expr::Const),
            _ => None,
        };
        if let Some(v) = special {
            return v;
        }
    }
    Expr::Func(kind, Box::new(arg))
}
