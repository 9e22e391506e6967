//! The system data model, class validation and the trivial representation.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{as_rational, Expr, VarId};
use crate::poly::{Poly, RationalFn};
use crate::Rational;

/// The class hierarchy, ordered from weakest to strictest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    General,
    Rational,
    Polynomial,
    Quadratic,
}

impl Class {
    pub fn name(self) -> &'static str {
        match self {
            Class::General => "general",
            Class::Rational => "rational",
            Class::Polynomial => "polynomial",
            Class::Quadratic => "quadratic",
        }
    }

    pub fn from_name(s: &str) -> Option<Class> {
        Some(match s {
            "general" => Class::General,
            "rational" => Class::Rational,
            "polynomial" => Class::Polynomial,
            "quadratic" => Class::Quadratic,
            _ => return None,
        })
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One entry of `F` or `h`, a function of the state vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    Poly(Poly),
    Rational(RationalFn),
    /// Any expression over the state variables.
    Expr(Expr),
}

impl Entry {
    /// Stores `r` as a polynomial when its denominator is constant.
    pub fn from_rational(r: RationalFn) -> Entry {
        match r.to_poly() {
            Some(p) => Entry::Poly(p),
            None => Entry::Rational(r),
        }
    }

    /// The entry as a rational function of `states`, if it is one.
    pub fn to_rational(&self, states: &[VarId]) -> Option<RationalFn> {
        match self {
            Entry::Poly(p) => Some(RationalFn::from_poly(p.clone())),
            Entry::Rational(r) => Some(r.clone()),
            Entry::Expr(e) => as_rational(e, states),
        }
    }

    /// The entry as a polynomial of `states`, if it is one.
    pub fn to_poly(&self, states: &[VarId]) -> Option<Poly> {
        match self {
            Entry::Poly(p) => Some(p.clone()),
            _ => self.to_rational(states)?.to_poly(),
        }
    }

    fn nvars(&self) -> Option<usize> {
        match self {
            Entry::Poly(p) => Some(p.nvars()),
            Entry::Rational(r) => Some(r.nvars()),
            Entry::Expr(_) => None,
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Poly(p) => write!(f, "{}", p),
            Entry::Rational(r) => write!(f, "({})/({})", r.num(), r.den()),
            Entry::Expr(e) => write!(f, "{}", e),
        }
    }
}

/// Evaluator used for an output map that has no symbolic form.
pub type Evaluator = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// The output map `h`.
#[derive(Clone)]
pub enum Output {
    Entries(Vec<Entry>),
    Opaque { m: usize, eval: Evaluator },
}

impl Output {
    pub fn m(&self) -> usize {
        match self {
            Output::Entries(e) => e.len(),
            Output::Opaque { m, .. } => *m,
        }
    }

    pub fn entries(&self) -> Option<&[Entry]> {
        match self {
            Output::Entries(e) => Some(e),
            Output::Opaque { .. } => None,
        }
    }
}

impl fmt::Debug for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Output::Entries(e) => f.debug_tuple("Entries").field(e).finish(),
            Output::Opaque { m, .. } => write!(f, "Opaque {{ m: {} }}", m),
        }
    }
}

impl PartialEq for Output {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Output::Entries(a), Output::Entries(b)) => a == b,
            (Output::Opaque { eval: a, .. }, Output::Opaque { eval: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("initial state entry {index} is not constant: {expr}")]
    NonConstantInitialState { index: usize, expr: String },
    #[error("base point entry {index} is not constant: {expr}")]
    NonConstantBasePoint { index: usize, expr: String },
    #[error("class tag {claimed} exceeds validated class: {reason}")]
    ClassTag { claimed: Class, reason: String },
}

/// Errors of the class-raising transforms.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("input is not {expected}: {report}")]
    ClassError { expected: Class, report: String },
    #[error("denominator {index} vanishes at the initial state: {denominator}")]
    DenominatorVanishesAtBase { index: usize, denominator: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `count` names `prefix<i>` not among `taken`, numbered after them.
pub(crate) fn fresh_names(taken: &[String], count: usize, prefix: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut i = taken.len();
    while out.len() < count {
        i += 1;
        let name = format!("{}{}", prefix, i);
        if !taken.contains(&name) && !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

/// Where a validation diagnostic points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    F(usize, usize),
    H(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::F(k, j) => write!(f, "F[{}][{}]", k, j),
            Location::H(i) => write!(f, "h[{}]", i),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub target: Class,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "passes {}", self.target);
        }
        write!(f, "fails {}:", self.target)?;
        for d in &self.diagnostics {
            write!(f, " {}: {};", d.location, d.message)?;
        }
        Ok(())
    }
}

/// `ż = F(z)(ξ − ξ0)`, `z(0) = z0`, `y = h(z)`.
///
/// Immutable once built; the constructor checks dimensions, constancy of
/// `z0` and the base point, and that the class tag is earned.
#[derive(Debug, Clone, PartialEq)]
pub struct FiscidsSystem {
    f: Vec<Vec<Entry>>,
    h: Output,
    z0: Vec<Expr>,
    base_point: Vec<Expr>,
    class: Class,
    state_names: Vec<String>,
    input_names: Vec<String>,
    states: Vec<VarId>,
}

impl FiscidsSystem {
    /// `f` is row-major `N × n`. An empty `base_point` means the origin.
    pub fn new(
        f: Vec<Vec<Entry>>,
        h: Output,
        z0: Vec<Expr>,
        base_point: Vec<Expr>,
        class: Class,
        state_names: Vec<String>,
        input_names: Vec<String>,
    ) -> Result<Self, ModelError> {
        let big_n = state_names.len();
        let n = input_names.len();
        if f.len() != big_n {
            return Err(ModelError::Dimension(format!(
                "F has {} rows, expected {}",
                f.len(),
                big_n
            )));
        }
        if let Some((k, row)) = f.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(ModelError::Dimension(format!(
                "F row {} has {} entries, expected {}",
                k,
                row.len(),
                n
            )));
        }
        if z0.len() != big_n {
            return Err(ModelError::Dimension(format!(
                "z0 has {} entries, expected {}",
                z0.len(),
                big_n
            )));
        }
        let base_point = if base_point.is_empty() {
            vec![Expr::zero(); n]
        } else {
            base_point
        };
        if base_point.len() != n {
            return Err(ModelError::Dimension(format!(
                "base point has {} entries, expected {}",
                base_point.len(),
                n
            )));
        }
        for (index, e) in z0.iter().enumerate() {
            if !e.is_constant() {
                return Err(ModelError::NonConstantInitialState {
                    index,
                    expr: format!("{}", e),
                });
            }
        }
        for (index, e) in base_point.iter().enumerate() {
            if !e.is_constant() {
                return Err(ModelError::NonConstantBasePoint {
                    index,
                    expr: format!("{}", e),
                });
            }
        }
        let entries = f.iter().flatten().chain(h.entries().unwrap_or(&[]));
        for e in entries {
            if let Some(k) = e.nvars() {
                if k != big_n {
                    return Err(ModelError::Dimension(format!(
                        "entry over {} variables in a system with {} states",
                        k, big_n
                    )));
                }
            }
        }
        let states = VarId::list(&state_names);
        let sys = FiscidsSystem {
            f,
            h,
            z0,
            base_point,
            class,
            state_names,
            input_names,
            states,
        };
        let report = sys.validate_class(class);
        if !report.passed() {
            return Err(ModelError::ClassTag {
                claimed: class,
                reason: format!("{}", report),
            });
        }
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.input_names.len()
    }

    pub fn m(&self) -> usize {
        self.h.m()
    }

    /// State dimension `N`.
    pub fn big_n(&self) -> usize {
        self.state_names.len()
    }

    pub fn f(&self) -> &[Vec<Entry>] {
        &self.f
    }

    pub fn h(&self) -> &Output {
        &self.h
    }

    pub fn z0(&self) -> &[Expr] {
        &self.z0
    }

    pub fn base_point(&self) -> &[Expr] {
        &self.base_point
    }

    pub fn class(&self) -> Class {
        self.class
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    /// State variables `z_k` with index `k`.
    pub fn states(&self) -> &[VarId] {
        &self.states
    }

    /// The same system with a different tag, validated.
    pub fn with_class(&self, class: Class) -> Result<FiscidsSystem, ModelError> {
        let report = self.validate_class(class);
        if !report.passed() {
            return Err(ModelError::ClassTag {
                claimed: class,
                reason: format!("{}", report),
            });
        }
        let mut out = self.clone();
        out.class = class;
        Ok(out)
    }

    /// The exact initial state when every entry folds to a rational.
    pub fn z0_exact(&self) -> Option<Vec<Rational>> {
        self.z0.iter().map(|e| e.fold().as_const().cloned()).collect()
    }

    /// Checks every entry against `target`. Failure is reported, not raised.
    pub fn validate_class(&self, target: Class) -> ValidationReport {
        let mut diagnostics = Vec::new();
        if target == Class::General {
            return ValidationReport { target, diagnostics };
        }
        let mut check = |location: Location, entry: &Entry, is_output: bool| {
            let r = match entry.to_rational(&self.states) {
                Some(r) => r,
                None => {
                    diagnostics.push(Diagnostic {
                        location,
                        message: format!("`{}` is not rational in the states", entry),
                    });
                    return;
                }
            };
            if target == Class::Rational {
                return;
            }
            let p = match r.to_poly() {
                Some(p) => p,
                None => {
                    diagnostics.push(Diagnostic {
                        location,
                        message: format!("`{}` has a nonconstant denominator", entry),
                    });
                    return;
                }
            };
            if target == Class::Quadratic {
                let limit = if is_output { 1 } else { 2 };
                if p.total_degree() > limit {
                    diagnostics.push(Diagnostic {
                        location,
                        message: format!("degree {} exceeds {}", p.total_degree(), limit),
                    });
                }
            }
        };
        for (k, row) in self.f.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                check(Location::F(k, j), e, false);
            }
        }
        match &self.h {
            Output::Entries(es) => {
                for (i, e) in es.iter().enumerate() {
                    check(Location::H(i), e, true);
                }
            }
            Output::Opaque { .. } => diagnostics.push(Diagnostic {
                location: Location::H(0),
                message: "output map is an opaque evaluator".into(),
            }),
        }
        ValidationReport { target, diagnostics }
    }

    /// The strictest class this system validates as.
    pub fn strictest_class(&self) -> Class {
        [Class::Quadratic, Class::Polynomial, Class::Rational]
            .into_iter()
            .find(|c| self.validate_class(*c).passed())
            .unwrap_or(Class::General)
    }
}

/// `ż = ξ`, `z(0) = 0`, `y = φ(z)`, exact for any `φ`.
#[derive(Clone)]
pub struct TrivialRepresentation {
    n: usize,
    m: usize,
    phi: Evaluator,
}

impl TrivialRepresentation {
    pub fn new(phi: Evaluator, n: usize, m: usize) -> Self {
        TrivialRepresentation { n, m, phi }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The closed-form flow `z(t) = tξ`.
    pub fn state_at(&self, xi: &[f64], t: f64) -> Vec<f64> {
        xi.iter().map(|x| t * x).collect()
    }

    pub fn output_at(&self, xi: &[f64], t: f64) -> Vec<f64> {
        (self.phi)(&self.state_at(xi, t))
    }

    /// The same representation as a general system with an opaque output.
    pub fn to_system(&self) -> FiscidsSystem {
        let f = (0..self.n)
            .map(|k| {
                (0..self.n)
                    .map(|j| Entry::Poly(Poly::constant(self.n, Rational::from_integer((k == j).into()))))
                    .collect()
            })
            .collect();
        let names = |p: &str| (1..=self.n).map(|i| format!("{}{}", p, i)).collect::<Vec<_>>();
        FiscidsSystem::new(
            f,
            Output::Opaque {
                m: self.m,
                eval: self.phi.clone(),
            },
            vec![Expr::zero(); self.n],
            Vec::new(),
            Class::General,
            names("z"),
            names("x"),
        )
        .expect("trivial representation is well formed")
    }
}

/// Wraps `phi` in the trivial representation.
pub fn trivial_representation(phi: Evaluator, n: usize, m: usize) -> TrivialRepresentation {
    TrivialRepresentation::new(phi, n, m)
}
