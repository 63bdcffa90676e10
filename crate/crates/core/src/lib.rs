//! Exact-decision real numbers built on lazily evaluated expression DAGs.
//!
//! A [`Real`] records the arithmetic that defines it. Comparisons and sign
//! queries are always correct: approximations are refined top-down until
//! the error interval excludes zero, or a separation bound proves the value
//! is zero. The error bound carried by every node can be stored directly,
//! as an integer exponent, or as a floating-point exponent; see
//! [`StrategyConfig`].

pub mod bigfloat;
pub mod dag;
pub mod error;
pub mod errorbound;
pub mod eval;
mod fpu;
pub mod real;
pub mod sepbound;

pub use bigfloat::{BigFloat, Precision, Rounded, RoundingMode};
pub use dag::{CounterSnapshot, Counters, Expr, NodeKind};
pub use error::{Error, Result};
pub use errorbound::{ErrorRep, RepKind};
pub use eval::{Context, StrategyConfig};
pub use real::Real;
