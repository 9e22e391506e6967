//! Rational representations of closed-form functions by differential
//! closure.
//!
//! States are expressions `α_k(ξ)`. Each state is differentiated with
//! respect to every input; the derivative is rewritten in terms of the
//! states and must come out rational in them. When it does not, a new state
//! is adjoined and the derivative is retried:
//!
//! 1. the innermost transcendental node (function call or named constant)
//!    that is not yet a state, with `cos` accompanying `sin` and vice versa;
//! 2. otherwise every nonconstant affine input factor of a product;
//! 3. otherwise the inputs themselves.
//!
//! The representation is `ż = F(z)(ξ − ξ0)`, `z(0) = α(ξ0)`, `y = h(z)`
//! where `h` selects the states holding the target components.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::expr::{as_rational, check_supported, Expr, ExprError, FuncKind, VarId};
use crate::model::{Class, Entry, FiscidsSystem, ModelError, Output};
use crate::poly::Poly;

/// Default maximum number of states.
pub const DEFAULT_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiftError {
    #[error("unsupported function `{0}`")]
    UnsupportedFunction(String),
    #[error("state {state} is undefined at the base point: {reason}")]
    BasePointDomainError { state: String, reason: String },
    #[error("closure needs more than {0} states")]
    ClosureCapExceeded(usize),
    #[error("derivative `{0}` cannot be made rational")]
    NotClosable(String),
    #[error("base point has {got} entries, expected {expected}")]
    BasePointDimension { got: usize, expected: usize },
    #[error(transparent)]
    Expr(ExprError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<ExprError> for LiftError {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::UnsupportedFunction(name) => LiftError::UnsupportedFunction(name),
            other => LiftError::Expr(other),
        }
    }
}

/// The states found so far and their defining expressions over the inputs.
#[derive(Debug, Clone)]
pub struct ClosureState {
    inputs: Vec<VarId>,
    defs: Vec<Expr>,
    vars: Vec<VarId>,
    prefix: &'static str,
    cap: usize,
}

impl ClosureState {
    fn new(inputs: &[VarId], cap: usize) -> Self {
        let clash = inputs.iter().any(|v| {
            let name = v.name();
            name.len() > 1 && name.starts_with('z') && name[1..].bytes().all(|b| b.is_ascii_digit())
        });
        ClosureState {
            inputs: inputs.to_vec(),
            defs: Vec::new(),
            vars: Vec::new(),
            prefix: if clash { "w" } else { "z" },
            cap,
        }
    }

    /// Defining expressions, in state order.
    pub fn definitions(&self) -> &[Expr] {
        &self.defs
    }

    pub fn state_vars(&self) -> &[VarId] {
        &self.vars
    }

    /// Index of the state defined by `e`, adding it when new.
    fn insert(&mut self, e: Expr) -> Result<usize, LiftError> {
        if let Some(k) = self.defs.iter().position(|d| *d == e) {
            return Ok(k);
        }
        if self.defs.len() == self.cap {
            return Err(LiftError::ClosureCapExceeded(self.cap));
        }
        let k = self.defs.len();
        self.vars.push(VarId::new(&format!("{}{}", self.prefix, k + 1), k));
        self.defs.push(e);
        Ok(k)
    }

    /// Replaces state definitions by state variables, outermost first.
    /// Rational constants are left alone.
    fn to_states(&self, e: &Expr) -> Expr {
        e.replace(&|node| {
            if node.as_const().is_some() {
                return None;
            }
            self.defs
                .iter()
                .position(|d| d == node)
                .map(|k| Expr::var(&self.vars[k]))
        })
    }

    fn to_inputs(&self, e: &Expr) -> Expr {
        e.substitute_vars(&|v| self.vars.iter().position(|w| w == v).map(|k| self.defs[k].clone()))
            .fold()
    }

    fn mentions_state(&self, e: &Expr) -> bool {
        e.any(&|n| matches!(n, Expr::Var(v) if self.vars.contains(v)))
    }

    /// Adjoins states so that `residual` can make progress.
    fn extend(&mut self, residual: &Expr) -> Result<(), LiftError> {
        let mut opaque = BTreeSet::new();
        innermost_opaque(residual, &mut opaque);
        if let Some(node) = opaque.into_iter().next() {
            let node = self.to_inputs(&node);
            self.insert(node.clone())?;
            if let Expr::Func(kind @ (FuncKind::Sin | FuncKind::Cos), arg) = &node {
                let other = if *kind == FuncKind::Sin {
                    FuncKind::Cos
                } else {
                    FuncKind::Sin
                };
                self.insert(Expr::func(other, (**arg).clone()))?;
            }
            return Ok(());
        }

        let mut affine = Vec::new();
        self.affine_factors(residual, &mut affine);
        if !affine.is_empty() {
            for f in affine {
                self.insert(f)?;
            }
            return Ok(());
        }

        let free: Vec<VarId> = residual
            .free_vars()
            .into_iter()
            .filter(|v| self.inputs.contains(v))
            .collect();
        if free.is_empty() {
            return Err(LiftError::NotClosable(residual.to_string()));
        }
        for v in free {
            self.insert(Expr::var(&v))?;
        }
        Ok(())
    }

    /// Product factors that depend on inputs only, affinely and not trivially.
    /// Input-only subtrees are taken whole, never searched.
    fn affine_factors(&self, e: &Expr, out: &mut Vec<Expr>) {
        if let Expr::Mul(fs) = e {
            for f in fs {
                if self.mentions_state(f) || f.is_constant() {
                    continue;
                }
                let degree_one = as_rational(f, &self.inputs)
                    .and_then(|r| r.to_poly())
                    .is_some_and(|p| p.total_degree() == 1);
                if degree_one && !out.contains(f) {
                    out.push(f.clone());
                }
            }
        }
        for c in e.children() {
            if self.mentions_state(c) {
                self.affine_factors(c, out);
            }
        }
    }
}

fn is_opaque(e: &Expr) -> bool {
    matches!(e, Expr::Func(_, _) | Expr::Named(_) | Expr::RatPow(_, _))
}

/// Collects opaque nodes that contain no other opaque node.
fn innermost_opaque(e: &Expr, out: &mut BTreeSet<Expr>) -> bool {
    let mut below = false;
    for c in e.children() {
        below |= innermost_opaque(c, out);
    }
    if is_opaque(e) {
        if !below {
            out.insert(e.clone());
        }
        return true;
    }
    below
}

type Closed = (ClosureState, Vec<usize>, Vec<Vec<Expr>>);

/// Runs the closure. Returns the states, the state index of each target
/// component and the derivative rows rewritten in the states.
fn close(phi: &[Expr], inputs: &[VarId], cap: usize) -> Result<Closed, LiftError> {
    for c in phi {
        check_supported(c)?;
    }
    let mut st = ClosureState::new(inputs, cap);
    let outputs = phi.iter().map(|c| st.insert(c.fold())).collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<Vec<Expr>> = Vec::new();
    let mut k = 0;
    while k < st.defs.len() {
        let def = st.defs[k].clone();
        let mut row = Vec::with_capacity(inputs.len());
        for xi in inputs {
            let d = def.differentiate(xi)?;
            loop {
                let s = st.to_states(&d);
                if as_rational(&s, &st.vars).is_some() {
                    row.push(s);
                    break;
                }
                let before = st.defs.len();
                st.extend(&s)?;
                if st.defs.len() == before {
                    return Err(LiftError::NotClosable(s.to_string()));
                }
            }
        }
        rows.push(row);
        k += 1;
    }
    Ok((st, outputs, rows))
}

/// The closure states `lift` would create, without building the system.
pub fn closure(phi: &[Expr], inputs: &[VarId], cap: usize) -> Result<ClosureState, LiftError> {
    close(phi, inputs, cap).map(|(st, _, _)| st)
}

/// Builds a rational representation of `phi` over `inputs`.
///
/// `base_point` holds constant expressions, or is empty for the origin.
pub fn lift(phi: &[Expr], inputs: &[VarId], base_point: &[Expr], cap: usize) -> Result<FiscidsSystem, LiftError> {
    let n = inputs.len();
    if !base_point.is_empty() && base_point.len() != n {
        return Err(LiftError::BasePointDimension {
            got: base_point.len(),
            expected: n,
        });
    }
    let (st, outputs, rows) = close(phi, inputs, cap)?;

    let big_n = st.defs.len();
    let f = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| Entry::from_rational(as_rational(s, &st.vars).expect("closed row")))
                .collect()
        })
        .collect();
    let h = Output::Entries(outputs.iter().map(|&k| Entry::Poly(Poly::var(big_n, k))).collect());

    let base: Vec<Expr> = if base_point.is_empty() {
        alloc::vec![Expr::zero(); n]
    } else {
        base_point.iter().map(Expr::fold).collect()
    };
    let empty: [f64; 0] = [];
    let mut z0 = Vec::with_capacity(big_n);
    for (k, def) in st.defs.iter().enumerate() {
        let at = def
            .substitute_vars(&|v| inputs.iter().position(|w| w == v).map(|j| base[j].clone()))
            .fold();
        if let Err(e) = at.eval(&empty[..]) {
            let reason = match e {
                ExprError::Domain { reason, .. } => reason,
                other => other.to_string(),
            };
            return Err(LiftError::BasePointDomainError {
                state: st.vars[k].name().to_string(),
                reason,
            });
        }
        z0.push(at);
    }

    Ok(FiscidsSystem::new(
        f,
        h,
        z0,
        base,
        Class::Rational,
        st.vars.iter().map(|v| v.name().to_string()).collect(),
        inputs.iter().map(|v| v.name().to_string()).collect(),
    )?)
}
