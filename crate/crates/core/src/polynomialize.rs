//! Rational to polynomial systems by adjoining reciprocal denominators.
//!
//! For denominators `d_i` of the entries, the states `β_i = 1/d_i(z)` are
//! appended. Every entry `p/(c·d_i^k)` becomes the polynomial `p·β_i^k/c`,
//! and `β_i` evolves by `β̇_i = −β_i² ∇d_i · ż`.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::expr::{poly_to_expr, Expr};
use crate::model::{fresh_names, Class, Entry, FiscidsSystem, Output, TransformError};
use crate::poly::{Monomial, Poly, RationalFn};

/// Primitive denominators and the states holding their reciprocals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenominatorBasis {
    denominators: Vec<Poly>,
    offset: usize,
}

impl DenominatorBasis {
    /// Denominators `d_i` over the original states, in state order.
    pub fn denominators(&self) -> &[Poly] {
        &self.denominators
    }

    /// State index of `β_i`.
    pub fn state_of(&self, i: usize) -> usize {
        self.offset + i
    }

    pub fn len(&self) -> usize {
        self.denominators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.denominators.is_empty()
    }

    /// Writes `d = c·d_i^k`, when `d`'s primitive part is a power of a basis
    /// element.
    fn locate(&self, primitive: &Poly) -> Option<(usize, u32)> {
        let deg = primitive.total_degree();
        self.denominators.iter().enumerate().find_map(|(i, b)| {
            let bd = b.total_degree();
            if !deg.is_multiple_of(bd) {
                return None;
            }
            let k = deg / bd;
            (b.pow(k) == *primitive).then_some((i, k))
        })
    }

    /// Collects the denominators of `entries`, lowest degree first so that
    /// powers find their base.
    fn collect(entries: &[RationalFn], offset: usize) -> Self {
        let mut prims: Vec<Poly> = Vec::new();
        for r in entries {
            if r.den().is_constant() {
                continue;
            }
            let (_, p) = r.den().primitive();
            if !prims.contains(&p) {
                prims.push(p);
            }
        }
        // Stable: ties keep first appearance.
        prims.sort_by_key(Poly::total_degree);
        let mut basis = DenominatorBasis {
            denominators: Vec::new(),
            offset,
        };
        for p in prims {
            if basis.locate(&p).is_none() {
                basis.denominators.push(p);
            }
        }
        basis
    }

    /// `r` as a polynomial in the original and reciprocal states.
    fn rewrite(&self, r: &RationalFn, total: usize) -> Poly {
        let num = r.num().extend(total);
        if r.den().is_constant() {
            let c = r.den().constant_value().expect("constant denominator");
            return num.scale(&c.recip());
        }
        let (c, p) = r.den().primitive();
        let (i, k) = self.locate(&p).expect("denominator in basis");
        let mut e = alloc::vec![0u32; total];
        e[self.state_of(i)] = k;
        num.mul_monomial(&Monomial::from_exponents(e)).scale(&c.recip())
    }
}

fn class_error(sys: &FiscidsSystem, expected: Class) -> TransformError {
    TransformError::ClassError {
        expected,
        report: format!("{}", sys.validate_class(expected)),
    }
}

/// Rewrites a rational system as a polynomial one.
pub fn r_to_p(sys: &FiscidsSystem) -> Result<FiscidsSystem, TransformError> {
    if !sys.validate_class(Class::Rational).passed() {
        return Err(class_error(sys, Class::Rational));
    }
    let states = sys.states();
    let big_n = sys.big_n();
    let n = sys.n();
    let rat = |e: &Entry| e.to_rational(states).expect("validated rational");
    let f: Vec<Vec<RationalFn>> = sys.f().iter().map(|row| row.iter().map(rat).collect()).collect();
    let h: Vec<RationalFn> = sys.h().entries().expect("validated entries").iter().map(rat).collect();

    let basis = basis_of(sys);
    if basis.is_empty() {
        return Ok(sys.with_class(Class::Polynomial)?);
    }
    let total = big_n + basis.len();

    let z0 = sys.z0();
    let mut beta0 = Vec::with_capacity(basis.len());
    for (i, d) in basis.denominators().iter().enumerate() {
        let at = poly_to_expr(d, states)
            .substitute_vars(&|v| Some(z0[v.index()].clone()))
            .fold();
        let vanishes = match at.as_const() {
            Some(c) => c.is_zero(),
            None => at.eval(&[0.0f64; 0][..]).map_or(true, |x| x == 0.0),
        };
        if vanishes {
            return Err(TransformError::DenominatorVanishesAtBase {
                index: i,
                denominator: format!("{}", d),
            });
        }
        beta0.push(Expr::div(Expr::one(), at).fold());
    }

    let mut fp: Vec<Vec<Poly>> = f
        .iter()
        .map(|row| row.iter().map(|r| basis.rewrite(r, total)).collect())
        .collect();
    for (i, d) in basis.denominators().iter().enumerate() {
        let b = Poly::var(total, basis.state_of(i));
        let minus_b2 = -&(&b * &b);
        let grads: Vec<Poly> = (0..big_n)
            .map(|k| d.partial(k).expect("index in range").extend(total))
            .collect();
        let row = (0..n)
            .map(|j| {
                let mut s = Poly::zero(total);
                for (k, g) in grads.iter().enumerate() {
                    if !g.is_zero() {
                        s = &s + &(g * &fp[k][j]);
                    }
                }
                &minus_b2 * &s
            })
            .collect();
        fp.push(row);
    }
    let hp = h.iter().map(|r| Entry::Poly(basis.rewrite(r, total))).collect();

    let mut names = sys.state_names().to_vec();
    names.extend(fresh_names(&names, basis.len(), "z"));
    let mut z0p = z0.to_vec();
    z0p.extend(beta0);
    Ok(FiscidsSystem::new(
        fp.into_iter()
            .map(|row| row.into_iter().map(Entry::Poly).collect())
            .collect(),
        Output::Entries(hp),
        z0p,
        sys.base_point().to_vec(),
        Class::Polynomial,
        names,
        sys.input_names().to_vec(),
    )?)
}

/// Reciprocal-state drift `max_i |β_i·d_i(z) − 1|` at a state `x` of the
/// output of [`r_to_p`] built from `source`.
pub fn reciprocal_drift(source: &FiscidsSystem, x: &[f64]) -> f64 {
    let basis = basis_of(source);
    basis
        .denominators()
        .iter()
        .enumerate()
        .map(|(i, d)| libm::fabs(x[basis.state_of(i)] * d.eval_f64(&x[..source.big_n()]) - 1.0))
        .fold(0.0, f64::max)
}

/// The denominator basis [`r_to_p`] uses for `sys`.
pub fn basis_of(sys: &FiscidsSystem) -> DenominatorBasis {
    let states = sys.states();
    let all: Vec<RationalFn> = sys
        .f()
        .iter()
        .flatten()
        .chain(sys.h().entries().unwrap_or(&[]))
        .filter_map(|e| e.to_rational(states))
        .collect();
    DenominatorBasis::collect(&all, sys.big_n())
}
