use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{Poly, PolyError};
use crate::Rational;

/// A quotient of polynomials in canonical form.
///
/// Canonical means: the pair `(num, den)` has integer coefficients with
/// joint content 1, no monomial divides every term of both, and the
/// graded-lex leading coefficient of `den` is positive. The zero function is
/// `0 / 1`. No polynomial gcd is taken, so `(x+1)/(x+1)^2` is kept as is.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalFn {
    num: Poly,
    den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self, PolyError> {
        normalize_rational(num, den)
    }

    pub fn from_poly(p: Poly) -> Self {
        let nvars = p.nvars();
        normalize_rational(p, Poly::one(nvars)).expect("unit denominator")
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// The polynomial `num / den` when `den` is constant.
    pub fn to_poly(&self) -> Option<Poly> {
        let c = self.den.constant_value()?;
        Some(self.num.scale(&c.recip()))
    }

    pub fn checked_add(&self, other: &RationalFn) -> Result<RationalFn, PolyError> {
        if self.den == other.den {
            return normalize_rational(self.num.checked_add(&other.num)?, self.den.clone());
        }
        let num = self
            .num
            .checked_mul(&other.den)?
            .checked_add(&other.num.checked_mul(&self.den)?)?;
        normalize_rational(num, self.den.checked_mul(&other.den)?)
    }

    pub fn checked_sub(&self, other: &RationalFn) -> Result<RationalFn, PolyError> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &RationalFn) -> Result<RationalFn, PolyError> {
        normalize_rational(self.num.checked_mul(&other.num)?, self.den.checked_mul(&other.den)?)
    }

    pub fn checked_div(&self, other: &RationalFn) -> Result<RationalFn, PolyError> {
        if other.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        normalize_rational(self.num.checked_mul(&other.den)?, self.den.checked_mul(&other.num)?)
    }

    pub fn neg(&self) -> RationalFn {
        RationalFn {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn powi(&self, k: i64) -> Result<RationalFn, PolyError> {
        let e = u32::try_from(k.unsigned_abs()).map_err(|_| PolyError::ZeroDenominator)?;
        if k >= 0 {
            normalize_rational(self.num.pow(e), self.den.pow(e))
        } else {
            normalize_rational(self.den.pow(e), self.num.pow(e))
        }
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.num.eval_f64(point) / self.den.eval_f64(point)
    }

    /// Exact value, or `None` where the denominator vanishes.
    pub fn eval_exact(&self, point: &[Rational]) -> Option<Rational> {
        let d = self.den.eval_exact(point);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval_exact(point) / d)
        }
    }
}

/// Canonical form of `num / den`: strips the common scalar content and the
/// common monomial factor and makes the leading coefficient of `den`
/// positive. Two inputs normalize to the same value exactly when they differ
/// by a nonzero scalar times a monomial.
pub fn normalize_rational(num: Poly, den: Poly) -> Result<RationalFn, PolyError> {
    if num.nvars() != den.nvars() {
        return Err(PolyError::AmbientMismatch {
            left: num.nvars(),
            right: den.nvars(),
        });
    }
    if den.is_zero() {
        return Err(PolyError::ZeroDenominator);
    }
    let nvars = num.nvars();
    if num.is_zero() {
        return Ok(RationalFn {
            num,
            den: Poly::one(nvars),
        });
    }
    let (cn, cd) = (num.content(), den.content());
    let mut scale = Rational::new(cn.numer().gcd(cd.numer()), cn.denom().lcm(cd.denom()));
    if den.leading_term().map(|(_, c)| c.is_negative()).unwrap_or(false) {
        scale = -scale;
    }
    let inv = scale.recip();
    let (num, den) = (num.scale(&inv), den.scale(&inv));

    let common = num.monomial_content().gcd(&den.monomial_content());
    let (num, den) = if common.is_one() {
        (num, den)
    } else {
        (
            num.div_monomial(&common).expect("common monomial divides numerator"),
            den.div_monomial(&common).expect("common monomial divides denominator"),
        )
    };
    debug_assert!(den.leading_term().map(|(_, c)| c.is_positive()).unwrap_or(false));
    Ok(RationalFn { num, den })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Monomial;
    use alloc::vec;
    use num_bigint::BigInt;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn mono(c: Rational, e: &[u32]) -> Poly {
        Poly::monomial(Monomial::from_exponents(e.to_vec()), c)
    }

    #[test]
    fn strips_scalar_and_monomial_content() {
        let out = normalize_rational(mono(r(2, 1), &[1]), mono(r(4, 1), &[2])).unwrap();
        assert_eq!(out.num(), &Poly::one(1));
        assert_eq!(out.den(), &mono(r(2, 1), &[1]));
    }

    #[test]
    fn zero_numerator_normalizes_to_unit_denominator() {
        let out = normalize_rational(Poly::zero(1), Poly::var(1, 0)).unwrap();
        assert!(out.num().is_zero());
        assert_eq!(out.den(), &Poly::one(1));
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert_eq!(
            normalize_rational(Poly::one(1), Poly::zero(1)).unwrap_err(),
            PolyError::ZeroDenominator
        );
    }

    #[test]
    fn coprime_log_derivative_is_unchanged() {
        // P = 2 + 3 z + 5 z^2, P' = 3 + 10 z: integer, jointly primitive, no
        // common monomial, positive leading coefficient.
        let p = Poly::from_terms(
            1,
            [
                (r(2, 1), Monomial::one(1)),
                (r(3, 1), Monomial::unit(1, 0)),
                (r(5, 1), Monomial::from_exponents(vec![2])),
            ],
        )
        .unwrap();
        let dp = p.partial(0).unwrap();
        let out = normalize_rational(dp.clone(), p.clone()).unwrap();
        assert_eq!(out.num(), &dp);
        assert_eq!(out.den(), &p);
    }

    #[test]
    fn scalar_monomial_multiples_share_a_canonical_form() {
        let num = &Poly::var(2, 0) + &Poly::constant(2, r(1, 3));
        let den = &Poly::var(2, 1) - &Poly::constant(2, r(2, 1));
        let a = normalize_rational(num.clone(), den.clone()).unwrap();
        let m = Monomial::from_exponents(vec![1, 2]);
        let b = normalize_rational(
            num.mul_monomial(&m).scale(&r(-7, 5)),
            den.mul_monomial(&m).scale(&r(-7, 5)),
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a.den().leading_term().unwrap().1 > &Rational::zero());
    }

    #[test]
    fn arithmetic_reuses_equal_denominators() {
        let d = &Poly::var(1, 0) + &Poly::one(1);
        let a = RationalFn::new(Poly::var(1, 0), d.clone()).unwrap();
        let b = RationalFn::new(Poly::one(1), d.clone()).unwrap();
        let sum = a.checked_add(&b).unwrap();
        assert_eq!(sum.den(), &d);
        assert_eq!(sum.num(), &d);
        let q = sum.checked_div(&a).unwrap();
        assert_eq!(q.eval_f64(&[2.0]), 1.5);
        assert!(a.checked_div(&RationalFn::from_poly(Poly::zero(1))).is_err());
    }

    #[test]
    fn negative_powers_swap_roles() {
        let a = RationalFn::from_poly(&Poly::var(1, 0) + &Poly::one(1));
        let inv2 = a.powi(-2).unwrap();
        assert!(inv2.num().is_constant());
        assert!((inv2.eval_f64(&[1.0]) - 0.25).abs() < 1e-15);
        assert_eq!(inv2.eval_exact(&[r(-1, 1)]), None);
    }
}
