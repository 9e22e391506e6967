//! Polynomial to quadratic systems over a divisor-closed monomial
//! dictionary.
//!
//! Each monomial `γ_k = z^ν` of the dictionary becomes a state. Entries of
//! `F` and `h` are affine in `γ`, and so is every partial derivative
//! `∂γ_k/∂z_j = ν_j z^(ν − e_j)` because the dictionary is closed under
//! lowering. The new field `Ḡ(γ)·F̄(γ)` is therefore at most quadratic.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::expr::Expr;
use crate::model::{fresh_names, Class, Entry, FiscidsSystem, Output, TransformError};
use crate::poly::{ExponentSet, Monomial, Poly};
use crate::Rational;

/// The monomials that become states, with their positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialDictionary {
    gamma: Vec<Monomial>,
    index: BTreeMap<Monomial, usize>,
}

impl MonomialDictionary {
    /// Dictionary for the divisor closure of `support` plus every variable.
    ///
    /// Order: the variables `z_1..z_N`, then the remaining monomials by
    /// degree, larger graded-lex first within a degree.
    pub fn new(nvars: usize, support: &ExponentSet) -> Self {
        let mut set: ExponentSet = support.iter().cloned().collect();
        for j in 0..nvars {
            set.insert(Monomial::unit(nvars, j));
        }
        let mut closed = set.divisor_closure();
        // Lowering keeps the closure; the loop only guards the invariant.
        loop {
            let missing: Vec<Monomial> = closed
                .iter()
                .flat_map(|m| (0..nvars).filter_map(move |j| m.lower(j)))
                .filter(|m| !m.is_one() && !closed.contains(m))
                .collect();
            if missing.is_empty() {
                break;
            }
            for m in missing {
                closed.insert(m);
            }
        }
        let mut gamma: Vec<Monomial> = (0..nvars).map(|j| Monomial::unit(nvars, j)).collect();
        let mut rest: Vec<Monomial> = closed.iter().filter(|m| m.degree() >= 2).cloned().collect();
        rest.sort_by(|a, b| a.degree().cmp(&b.degree()).then(b.cmp(a)));
        gamma.extend(rest);
        let index = gamma.iter().enumerate().map(|(k, m)| (m.clone(), k)).collect();
        MonomialDictionary { gamma, index }
    }

    pub fn gamma(&self) -> &[Monomial] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// `p` as an affine polynomial in `γ`. The constant term stays constant.
    fn affine(&self, p: &Poly) -> Poly {
        let total = self.len();
        let mut out = Poly::zero(total);
        for (m, c) in p.terms() {
            let term = if m.is_one() {
                Poly::constant(total, c.clone())
            } else {
                let k = self.position(m).expect("monomial in dictionary");
                Poly::var(total, k).scale(c)
            };
            out = &out + &term;
        }
        out
    }

    /// `Ḡ_kj(γ) = ∂γ_k/∂z_j`, affine in `γ`.
    fn jacobian_entry(&self, k: usize, j: usize) -> Poly {
        let total = self.len();
        let nu = self.gamma[k].exponents()[j];
        match self.gamma[k].lower(j) {
            None => Poly::zero(total),
            Some(low) => {
                let c = Rational::from_integer(BigInt::from(nu));
                self.affine(&Poly::monomial(low, c))
            }
        }
    }
}

/// Rewrites a polynomial system as a quadratic one.
pub fn p_to_q(sys: &FiscidsSystem) -> Result<FiscidsSystem, TransformError> {
    if !sys.validate_class(Class::Polynomial).passed() {
        return Err(TransformError::ClassError {
            expected: Class::Polynomial,
            report: format!("{}", sys.validate_class(Class::Polynomial)),
        });
    }
    let states = sys.states();
    let big_n = sys.big_n();
    let n = sys.n();
    let poly = |e: &Entry| e.to_poly(states).expect("validated polynomial");
    let f: Vec<Vec<Poly>> = sys.f().iter().map(|row| row.iter().map(poly).collect()).collect();
    let h: Vec<Poly> = sys.h().entries().expect("validated entries").iter().map(poly).collect();

    let support: ExponentSet = f
        .iter()
        .flatten()
        .chain(h.iter())
        .flat_map(|p| p.support().cloned().collect::<Vec<_>>())
        .collect();
    let dict = MonomialDictionary::new(big_n, &support);
    let total = dict.len();

    let f_bar: Vec<Vec<Poly>> = f
        .iter()
        .map(|row| row.iter().map(|p| dict.affine(p)).collect())
        .collect();
    let mut fq = Vec::with_capacity(total);
    for k in 0..total {
        let g: Vec<Poly> = (0..big_n).map(|j| dict.jacobian_entry(k, j)).collect();
        let row = (0..n)
            .map(|i| {
                let mut s = Poly::zero(total);
                for (j, gj) in g.iter().enumerate() {
                    if !gj.is_zero() {
                        s = &s + &(gj * &f_bar[j][i]);
                    }
                }
                Entry::Poly(s)
            })
            .collect::<Vec<_>>();
        fq.push(row);
    }
    let hq = h.iter().map(|p| Entry::Poly(dict.affine(p))).collect();

    let z0 = sys.z0();
    let z0q = dict
        .gamma()
        .iter()
        .map(|m| {
            let factors = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(j, e)| Expr::powi(z0[j].clone(), i64::from(*e)))
                .collect();
            Expr::Mul(factors).fold()
        })
        .collect();

    let mut names = sys.state_names().to_vec();
    names.extend(fresh_names(&names, total - big_n, "z"));
    Ok(FiscidsSystem::new(
        fq,
        Output::Entries(hq),
        z0q,
        sys.base_point().to_vec(),
        Class::Quadratic,
        names,
        sys.input_names().to_vec(),
    )?)
}

/// The dictionary [`p_to_q`] uses for `sys`, which must be polynomial.
pub fn dictionary_of(sys: &FiscidsSystem) -> Option<MonomialDictionary> {
    let states = sys.states();
    let mut support = ExponentSet::new();
    for e in sys.f().iter().flatten().chain(sys.h().entries()?) {
        for m in e.to_poly(states)?.support() {
            support.insert(m.clone());
        }
    }
    Some(MonomialDictionary::new(sys.big_n(), &support))
}

/// `max_k |γ_k(t) − Π_j x_j^ν_j|` over composite monomials, for a state `x`
/// of the output of [`p_to_q`].
pub fn monomial_drift(dict: &MonomialDictionary, x: &[f64]) -> f64 {
    let base = dict.gamma().iter().take_while(|m| m.degree() == 1).count();
    dict.gamma()
        .iter()
        .enumerate()
        .skip(base)
        .map(|(k, m)| libm::fabs(x[k] - m.eval_f64(&x[..base])))
        .fold(0.0, f64::max)
}
