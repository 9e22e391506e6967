//! Expression to system, then down the class ladder as far as asked.

use fiscids_core::expr::{parse, ExprError};
use fiscids_core::lift::{lift, LiftError};
use fiscids_core::model::{ModelError, TransformError};
use fiscids_core::polynomialize::r_to_p;
use fiscids_core::quadratize::p_to_q;
use fiscids_core::{Class, FiscidsSystem, VarId};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ExprError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("target class must be rational, polynomial or quadratic")]
    GeneralTarget,
}

/// Brings `sys` to `target`, transforming only where validation fails.
pub fn promote(sys: &FiscidsSystem, target: Class) -> Result<FiscidsSystem, PipelineError> {
    if target == Class::General {
        return Err(PipelineError::GeneralTarget);
    }
    if sys.validate_class(target).passed() {
        return Ok(sys.with_class(target)?);
    }
    let p = if sys.validate_class(Class::Polynomial).passed() {
        sys.with_class(Class::Polynomial)?
    } else {
        r_to_p(sys)?
    };
    if target == Class::Polynomial || p.validate_class(target).passed() {
        return Ok(p.with_class(target)?);
    }
    Ok(p_to_q(&p)?)
}

/// Parses, lifts and promotes one target expression.
pub fn build(
    expr: &str,
    vars: &[&str],
    base_point: &[&str],
    target: Class,
    cap: usize,
) -> Result<FiscidsSystem, PipelineError> {
    let inputs = VarId::list(vars);
    let phi = parse(expr, &inputs)?;
    let base = base_point
        .iter()
        .map(|b| parse(b, &[]))
        .collect::<Result<Vec<_>, _>>()?;
    let r = lift(&[phi], &inputs, &base, cap)?;
    promote(&r, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fiscids_core::catalog::{GAUSSIAN_EXPR, LOGPOLY_EXPR};

    #[test]
    fn gaussian_needs_no_transform() {
        let q = build(GAUSSIAN_EXPR, &["x1", "x2"], &[], Class::Quadratic, 64).unwrap();
        assert_eq!((q.big_n(), q.class()), (3, Class::Quadratic));
    }

    #[test]
    fn log_polynomial_state_counts() {
        let n = |c| build(LOGPOLY_EXPR, &["xi"], &[], c, 64).unwrap().big_n();
        assert_eq!(
            (n(Class::Rational), n(Class::Polynomial), n(Class::Quadratic)),
            (2, 3, 6)
        );
    }

    #[test]
    fn unknown_function_is_reported() {
        assert!(matches!(
            build("gamma(x)", &["x"], &[], Class::Rational, 64),
            Err(PipelineError::Lift(LiftError::UnsupportedFunction(_)))
        ));
    }
}
