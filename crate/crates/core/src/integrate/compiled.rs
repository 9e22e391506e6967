//! Flat floating-point forms of system entries for the inner loop.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::expr::{powi, Expr};
use crate::model::{Entry, Evaluator, FiscidsSystem, Output};
use crate::poly::{rational_to_f64, Poly};

/// `Σ c_t Π x_v^p` with all factors in one buffer.
#[derive(Debug, Clone)]
struct Terms {
    coeffs: Vec<f64>,
    /// End offset of each term's factors in `factors`.
    ends: Vec<u32>,
    factors: Vec<(u32, i64)>,
}

impl Terms {
    fn new(p: &Poly) -> Self {
        let mut t = Terms {
            coeffs: Vec::with_capacity(p.term_count()),
            ends: Vec::with_capacity(p.term_count()),
            factors: Vec::new(),
        };
        for (m, c) in p.terms() {
            t.coeffs.push(rational_to_f64(c));
            for (v, e) in m.exponents().iter().enumerate() {
                if *e > 0 {
                    t.factors.push((v as u32, i64::from(*e)));
                }
            }
            t.ends.push(t.factors.len() as u32);
        }
        t
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut sum = 0.0;
        let mut start = 0usize;
        for (c, end) in self.coeffs.iter().zip(&self.ends) {
            let mut prod = *c;
            for &(v, e) in &self.factors[start..*end as usize] {
                let xv = x[v as usize];
                prod *= if e == 1 { xv } else { powi(xv, e) };
            }
            sum += prod;
            start = *end as usize;
        }
        sum
    }
}

#[derive(Debug, Clone)]
enum Compiled {
    Zero,
    Poly(Terms),
    Rational(Terms, Terms),
    Expr(Expr),
}

impl Compiled {
    fn new(e: &Entry) -> Self {
        match e {
            Entry::Poly(p) if p.is_zero() => Compiled::Zero,
            Entry::Poly(p) => Compiled::Poly(Terms::new(p)),
            Entry::Rational(r) => Compiled::Rational(Terms::new(r.num()), Terms::new(r.den())),
            Entry::Expr(e) => Compiled::Expr(e.clone()),
        }
    }

    fn eval(&self, x: &[f64]) -> Result<f64, String> {
        match self {
            Compiled::Zero => Ok(0.0),
            Compiled::Poly(t) => Ok(t.eval(x)),
            Compiled::Rational(n, d) => {
                let den = d.eval(x);
                if den == 0.0 {
                    return Err("division by zero".to_string());
                }
                Ok(n.eval(x) / den)
            }
            Compiled::Expr(e) => e.eval(x).map_err(|err| err.to_string()),
        }
    }
}

enum CompiledOutput {
    Entries(Vec<Compiled>),
    Opaque(Evaluator),
}

/// A system ready for numerical integration at one input.
pub(crate) struct CompiledSystem {
    n: usize,
    big_n: usize,
    /// Row-major `N × n`.
    f: Vec<Compiled>,
    h: CompiledOutput,
    pub(crate) z0: Vec<f64>,
    pub(crate) base: Vec<f64>,
}

impl CompiledSystem {
    pub(crate) fn new(sys: &FiscidsSystem) -> Result<Self, String> {
        let empty: [f64; 0] = [];
        let z0 = sys
            .z0()
            .iter()
            .map(|e| e.eval(&empty[..]).map_err(|err| err.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        let base = sys
            .base_point()
            .iter()
            .map(|e| e.eval(&empty[..]).map_err(|err| err.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        let h = match sys.h() {
            Output::Entries(es) => CompiledOutput::Entries(es.iter().map(Compiled::new).collect()),
            Output::Opaque { eval, .. } => CompiledOutput::Opaque(eval.clone()),
        };
        Ok(CompiledSystem {
            n: sys.n(),
            big_n: sys.big_n(),
            f: sys.f().iter().flatten().map(Compiled::new).collect(),
            h,
            z0,
            base,
        })
    }

    pub(crate) fn big_n(&self) -> usize {
        self.big_n
    }

    /// `u = ξ − ξ0`.
    pub(crate) fn shifted_input(&self, xi: &[f64]) -> Vec<f64> {
        xi.iter().zip(&self.base).map(|(x, b)| x - b).collect()
    }

    /// `out = F(x) u`.
    pub(crate) fn rhs(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<(), String> {
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.f[k * self.n..(k + 1) * self.n];
            let mut s = 0.0;
            for (entry, uj) in row.iter().zip(u) {
                if *uj != 0.0 {
                    s += entry.eval(x)? * uj;
                }
            }
            *o = s;
        }
        Ok(())
    }

    pub(crate) fn output(&self, x: &[f64]) -> Result<Vec<f64>, String> {
        let y = match &self.h {
            CompiledOutput::Entries(es) => es.iter().map(|e| e.eval(x)).collect::<Result<Vec<_>, _>>()?,
            CompiledOutput::Opaque(f) => f(x),
        };
        if y.iter().all(|v| v.is_finite()) {
            Ok(y)
        } else {
            Err("output is not finite".to_string())
        }
    }
}
