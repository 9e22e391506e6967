//! Exact sparse multivariate polynomials over the rationals.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! graded lexicographic with `x1 > x2 > ... > xN`. Iteration is therefore
//! deterministic and the leading term is the last entry of the map.

mod exponent_set;
mod rational_fn;

pub use exponent_set::ExponentSet;
pub use rational_fn::{normalize_rational, RationalFn};

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("ambient mismatch: {left} variables vs {right} variables")]
    AmbientMismatch { left: usize, right: usize },
    #[error("zero denominator")]
    ZeroDenominator,
}

/// Multi-exponent `ν` of a monomial `z^ν`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    /// The unit exponent `e_j`.
    pub fn unit(nvars: usize, j: usize) -> Self {
        let mut e = vec![0; nvars];
        e[j] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise minimum.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    /// `self - e_j`, if the j-th exponent is positive.
    pub fn lower(&self, j: usize) -> Option<Monomial> {
        if self.0[j] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[j] -= 1;
        Some(Monomial(e))
    }

    /// Index `j` when this is the degree-one monomial `z_j`.
    pub fn as_variable(&self) -> Option<usize> {
        if self.degree() == 1 {
            self.0.iter().position(|&e| e == 1)
        } else {
            None
        }
    }

    /// Embeds into an ambient space with `nvars >= self.nvars()` variables.
    pub fn extend(&self, nvars: usize) -> Monomial {
        let mut e = self.0.clone();
        e.resize(nvars, 0);
        Monomial(e)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(point)
            .filter(|(e, _)| **e > 0)
            .map(|(e, x)| libm::pow(*x, f64::from(*e)))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with exact rational coefficients in a fixed number of
/// variables. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, j: usize) -> Self {
        Self::monomial(Monomial::unit(nvars, j), Rational::one())
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let nvars = m.nvars();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { nvars, terms }
    }

    /// Builds a polynomial from `(coefficient, monomial)` pairs, merging
    /// duplicates. Every monomial must have `nvars` exponents.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Rational, Monomial)>,
    {
        let mut p = Poly::zero(nvars);
        for (c, m) in terms {
            if m.nvars() != nvars {
                return Err(PolyError::AmbientMismatch {
                    left: nvars,
                    right: m.nvars(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Maximum monomial degree; the zero polynomial has degree 0.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant value of a constant polynomial.
    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.coeff(&Monomial::one(self.nvars)))
        } else {
            None
        }
    }

    fn check(&self, other: &Poly) -> Result<(), PolyError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(PolyError::AmbientMismatch {
                left: self.nvars,
                right: other.nvars,
            })
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
        }
    }

    /// Exact division by a monomial dividing every term.
    pub fn div_monomial(&self, m: &Monomial) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            terms.insert(k.div(m)?, v.clone());
        }
        Some(Poly {
            nvars: self.nvars,
            terms,
        })
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact partial derivative with respect to variable `j`.
    pub fn partial(&self, j: usize) -> Result<Poly, PolyError> {
        if j >= self.nvars {
            return Err(PolyError::AmbientMismatch {
                left: self.nvars,
                right: j + 1,
            });
        }
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exponents()[j];
            if let Some(lowered) = m.lower(j) {
                out.add_term(lowered, c * Rational::from_integer(BigInt::from(e)));
            }
        }
        Ok(out)
    }

    /// Positive rational content: gcd of numerators over lcm of denominators.
    /// Zero for the zero polynomial.
    pub fn content(&self) -> Rational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        Rational::new(num, den)
    }

    /// Largest monomial dividing every term; `1` for the zero polynomial.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(self.nvars),
            Some(first) => it.fold(first.clone(), |acc, m| acc.gcd(m)),
        }
    }

    /// Scalar-normalized form: integer coefficients with content 1 and a
    /// positive leading coefficient. Returns `(c, p)` with `self = c * p`.
    pub fn primitive(&self) -> (Rational, Poly) {
        if self.is_zero() {
            return (Rational::one(), self.clone());
        }
        let mut c = self.content();
        if self.leading_term().map(|(_, v)| v.is_negative()).unwrap_or(false) {
            c = -c;
        }
        (c.clone(), self.scale(&c.recip()))
    }

    /// Re-embeds into `nvars` variables, appending zero exponents.
    pub fn extend(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars, "cannot shrink a polynomial ambient");
        Poly {
            nvars,
            terms: self.terms.iter().map(|(m, c)| (m.extend(nvars), c.clone())).collect(),
        }
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (e, x) in m.exponents().iter().zip(point) {
                if *e > 0 {
                    t *= num_traits::pow(x.clone(), *e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| rational_to_f64(c) * m.eval_f64(point))
            .sum()
    }

    /// Exponent set of every stored term.
    pub fn support(&self) -> impl Iterator<Item = &Monomial> + '_ {
        self.terms.keys()
    }
}

/// Nearest double to an exact rational.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    r.to_f64().unwrap_or(f64::NAN)
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;

    /// Panics on ambient mismatch; see [`Poly::checked_add`].
    fn add(self, rhs: &'a Poly) -> Poly {
        self.checked_add(rhs).expect("polynomial ambient mismatch")
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;

    fn sub(self, rhs: &'a Poly) -> Poly {
        self.checked_sub(rhs).expect("polynomial ambient mismatch")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;

    fn mul(self, rhs: &'a Poly) -> Poly {
        self.checked_mul(rhs).expect("polynomial ambient mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Poly {
    /// Prints with generic variable names `z1, z2, ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}", c)?;
            for (j, e) in m.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*z{}", j + 1)?,
                    _ => write!(f, "*z{}^{}", j + 1, e)?,
                }
            }
        }
        Ok(())
    }
}
