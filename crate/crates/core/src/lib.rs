//! Deductive verification of ODE liveness and global existence.
//!
//! The crate is organized around a small trusted core:
//!
//! - [`syntax`]: terms, formulas, ODE systems, sequents, the problem-file
//!   parser and printers.
//! - [`poly`]: canonical multivariate polynomial arithmetic, generic over the
//!   coefficient scalar, with Lie derivatives.
//! - [`arith`]: the real-arithmetic validity oracle (exact builtin backend
//!   plus an SMT-LIB subprocess backend) and topological classification.
//! - [`kernel`]: the trusted proof rules and derivation replay checker.
//! - [`refine`], [`existence`], [`liveness`]: untrusted tactics that build
//!   derivations from the kernel primitives.
//!
//! Everything on the symbolic path computes over exact rationals; floating
//! point instantiations of [`poly::Poly`] exist only for numeric consumers
//! such as simulation.

pub mod arith;
pub mod existence;
pub mod kernel;
pub mod liveness;
pub mod poly;
pub mod refine;
pub mod syntax;

/// Exact rational scalar used on the entire symbolic path.
pub type Q = num_rational::BigRational;

/// Canonical polynomial over exact rationals.
pub type QPoly = poly::Poly<Q>;

/// Polynomial over `f64`, used by numeric consumers (simulation).
pub type FPoly = poly::Poly<f64>;

pub use syntax::{CmpOp, Formula, ODESystem, Problem, Sequent, Term, Var};

/// Builds an exact rational from a numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Q {
    Q::new(num.into(), den.into())
}

/// Builds an exact rational from an integer.
pub fn int(n: i64) -> Q {
    Q::from_integer(n.into())
}
