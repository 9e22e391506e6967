//! Exact construction and numerical evaluation of fixed-initial-state,
//! constant-input dynamical system representations of functions.
//!
//! A function `φ: X → R^m` is represented by an input-affine system
//!
//! ```text
//! ż(t) = F(z(t)) ξ,   z(0) = z0,   y(t) = h(z(t))
//! ```
//!
//! whose output at `t = 1` equals `φ(ξ)`. The crate builds such systems from
//! closed-form expressions ([`lift`]), rewrites rational systems into
//! polynomial ones ([`polynomialize`]) and polynomial systems into quadratic
//! ones ([`quadratize`]), and integrates them ([`integrate`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod expr;
pub mod integrate;
pub mod lift;
pub mod model;
pub mod poly;
pub mod polynomialize;
pub mod quadratize;
pub mod tt;

/// Arbitrary-precision rational number used for every exact coefficient.
pub type Rational = num_rational::BigRational;

pub use expr::{Expr, VarId};
pub use integrate::{IntegrationConfig, Method, Trajectory};
pub use model::{Class, Entry, FiscidsSystem, Output, TrivialRepresentation};
pub use poly::{ExponentSet, Monomial, Poly, RationalFn};
