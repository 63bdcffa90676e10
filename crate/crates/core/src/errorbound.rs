//! Error-bound representations and their sound combination rules.
//!
//! Three carriers are supported:
//!
//! - [`DirectError`]: the radius itself, a short bigfloat rounded upward.
//! - [`LogIntError`]: an integer exponent `e`, radius `2^e`.
//! - [`LogFloatError`]: an `f64` exponent `e`, radius `2^e`, every update
//!   rounded upward.
//!
//! [`ErrorRep::Exact`] is shared by all carriers and denotes radius zero.
//! Combining two bounds requires the same carrier; converting between
//! carriers is always explicit ([`phi`], [`phi_hat`], [`ErrorRep::convert`]).

use std::cmp::Ordering;
use std::fmt;

use crate::bigfloat::{BigFloat, Precision, RoundingMode};
use crate::error::{Error, Result};
use crate::fpu;

/// Significand length of direct radii.
pub const DIRECT_BITS: u32 = 32;

fn direct_precision() -> Precision {
    Precision::saturating(DIRECT_BITS as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RepKind {
    Direct,
    LogInt,
    LogFloat,
}

impl RepKind {
    pub fn label(self) -> &'static str {
        match self {
            RepKind::Direct => "direct",
            RepKind::LogInt => "log-int",
            RepKind::LogFloat => "log-float",
        }
    }
}

/// Radius stored as a non-negative bigfloat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectError(BigFloat);

impl DirectError {
    /// Rounds `radius` up to the direct precision; `|radius|` is used.
    pub fn new(radius: &BigFloat) -> Self {
        DirectError(
            radius
                .abs()
                .round(direct_precision(), RoundingMode::TowardPositive)
                .value,
        )
    }

    pub fn radius(&self) -> &BigFloat {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogIntError(pub i64);

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogFloatError(pub f64);

#[derive(Clone, Debug, PartialEq)]
pub enum ErrorRep {
    Exact,
    Direct(DirectError),
    LogInt(LogIntError),
    LogFloat(LogFloatError),
}

/// `2^e_log` as a direct radius; lossless.
pub fn phi(e_log: i64) -> DirectError {
    DirectError(BigFloat::pow2(e_log))
}

/// `ceil(log2(e_dir))`, computed exactly or through the stored exponent.
pub fn phi_hat(e_dir: &DirectError, exact: bool) -> Result<i64> {
    if exact {
        e_dir.0.ceil_log2_exact()
    } else {
        e_dir.0.ceil_log2_inexact()
    }
}

fn log_float(e: f64) -> Result<ErrorRep> {
    if e.is_finite() {
        Ok(ErrorRep::LogFloat(LogFloatError(e)))
    } else {
        Err(Error::ExponentOverflow)
    }
}

/// Upper bound on `log2(1 + 2^-d)` for `d >= 0`, never above 1.
fn log1p_exp2_neg_up(d: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    let t = fpu::exp2_up(-d);
    fpu::log2_up(fpu::add_up(1.0, t)).min(1.0)
}

impl ErrorRep {
    pub fn kind(&self) -> Option<RepKind> {
        match self {
            ErrorRep::Exact => None,
            ErrorRep::Direct(_) => Some(RepKind::Direct),
            ErrorRep::LogInt(_) => Some(RepKind::LogInt),
            ErrorRep::LogFloat(_) => Some(RepKind::LogFloat),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ErrorRep::Exact)
    }

    /// The bound `2^q` in the given carrier.
    pub fn pow2(kind: RepKind, q: i64) -> ErrorRep {
        match kind {
            RepKind::Direct => ErrorRep::Direct(phi(q)),
            RepKind::LogInt => ErrorRep::LogInt(LogIntError(q)),
            RepKind::LogFloat => ErrorRep::LogFloat(LogFloatError(q as f64)),
        }
    }

    /// A rounding error as reported by the bigfloat layer.
    pub fn from_rounding(kind: RepKind, error_log2: Option<i64>) -> ErrorRep {
        match error_log2 {
            None => ErrorRep::Exact,
            Some(e) => ErrorRep::pow2(kind, e),
        }
    }

    /// Sound upper bound on the radius' base-2 logarithm, rounded up to an
    /// integer. `exact` selects the `ceil_log2` variant for direct radii.
    pub fn log2_ceil(&self, exact: bool) -> Option<i64> {
        match self {
            ErrorRep::Exact => None,
            ErrorRep::Direct(d) if d.0.is_zero() => None,
            ErrorRep::Direct(d) => phi_hat(d, exact).ok(),
            ErrorRep::LogInt(e) => Some(e.0),
            ErrorRep::LogFloat(e) => Some(fpu::ceil_to_i64(e.0)),
        }
    }

    fn mixed(a: &ErrorRep, b: &ErrorRep) -> Error {
        let label = |x: &ErrorRep| x.kind().map_or("exact", RepKind::label);
        Error::MixedRepresentation(label(a), label(b))
    }

    /// A bound on the sum of both radii.
    pub fn combine(&self, other: &ErrorRep) -> Result<ErrorRep> {
        match (self, other) {
            (ErrorRep::Exact, x) | (x, ErrorRep::Exact) => Ok(x.clone()),
            (ErrorRep::Direct(a), ErrorRep::Direct(b)) => Ok(ErrorRep::Direct(DirectError(
                a.0.add(&b.0, direct_precision(), RoundingMode::TowardPositive)
                    .value,
            ))),
            (ErrorRep::LogInt(a), ErrorRep::LogInt(b)) => a
                .0
                .max(b.0)
                .checked_add(1)
                .map(|c| ErrorRep::LogInt(LogIntError(c)))
                .ok_or(Error::ExponentOverflow),
            (ErrorRep::LogFloat(a), ErrorRep::LogFloat(b)) => {
                let (a, b) = (a.0, b.0);
                let max = a.max(b);
                let d = fpu::sub_down(max, a.min(b)).max(0.0);
                let c = fpu::add_up(max, log1p_exp2_neg_up(d));
                log_float(c.min(fpu::add_up(max, 1.0)))
            }
            (a, b) => Err(Self::mixed(a, b)),
        }
    }

    /// A bound on the sum of three radii.
    pub fn combine3(&self, b: &ErrorRep, c: &ErrorRep) -> Result<ErrorRep> {
        let folded = self.combine(b)?.combine(c)?;
        let ErrorRep::LogFloat(fold) = folded else {
            return Ok(folded);
        };
        // Direct three-term evaluation: max + log2(sum 2^(x - max)).
        let terms: Vec<f64> = [self, b, c]
            .iter()
            .filter_map(|x| match x {
                ErrorRep::LogFloat(e) => Some(e.0),
                _ => None,
            })
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum = terms
            .iter()
            .map(|&t| fpu::exp2_up(fpu::sub_up(t, max)).min(1.0))
            .fold(0.0, fpu::add_up);
        let direct = fpu::add_up(max, fpu::log2_up(sum));
        log_float(direct.min(fold.0))
    }

    /// Folds any number of radii; `Exact` when the iterator is empty.
    pub fn combine_all<'a>(terms: impl IntoIterator<Item = &'a ErrorRep>) -> Result<ErrorRep> {
        terms
            .into_iter()
            .try_fold(ErrorRep::Exact, |acc, t| acc.combine(t))
    }

    /// A bound on `2^k` times the radius.
    pub fn scale_pow2(&self, k: i64) -> Result<ErrorRep> {
        match self {
            ErrorRep::Exact => Ok(ErrorRep::Exact),
            ErrorRep::Direct(d) => Ok(ErrorRep::Direct(DirectError(d.0.mul_pow2(k)))),
            ErrorRep::LogInt(e) => e
                .0
                .checked_add(k)
                .map(|c| ErrorRep::LogInt(LogIntError(c)))
                .ok_or(Error::ExponentOverflow),
            ErrorRep::LogFloat(e) => log_float(fpu::add_up(e.0, k as f64)),
        }
    }

    /// A bound on `|m|` times the radius.
    pub fn scale_by(&self, m: &BigFloat, exact_log: bool) -> Result<ErrorRep> {
        if m.is_zero() {
            return Ok(ErrorRep::Exact);
        }
        match self {
            ErrorRep::Exact => Ok(ErrorRep::Exact),
            ErrorRep::Direct(d) => Ok(ErrorRep::Direct(DirectError(
                d.0.mul(&m.abs(), direct_precision(), RoundingMode::TowardPositive)
                    .value,
            ))),
            ErrorRep::LogInt(_) => {
                let k = if exact_log {
                    m.ceil_log2_exact()?
                } else {
                    m.ceil_log2_inexact()?
                };
                self.scale_pow2(k)
            }
            ErrorRep::LogFloat(e) => {
                let (_, hi) = m.log2_bounds()?;
                log_float(fpu::add_up(e.0, hi))
            }
        }
    }

    /// A bound on the product of two radii.
    pub fn mul(&self, other: &ErrorRep) -> Result<ErrorRep> {
        match (self, other) {
            (ErrorRep::Exact, _) | (_, ErrorRep::Exact) => Ok(ErrorRep::Exact),
            (ErrorRep::Direct(a), ErrorRep::Direct(b)) => Ok(ErrorRep::Direct(DirectError(
                a.0.mul(&b.0, direct_precision(), RoundingMode::TowardPositive)
                    .value,
            ))),
            (ErrorRep::LogInt(a), ErrorRep::LogInt(b)) => a
                .0
                .checked_add(b.0)
                .map(|c| ErrorRep::LogInt(LogIntError(c)))
                .ok_or(Error::ExponentOverflow),
            (ErrorRep::LogFloat(a), ErrorRep::LogFloat(b)) => log_float(fpu::add_up(a.0, b.0)),
            (a, b) => Err(Self::mixed(a, b)),
        }
    }

    /// True iff the radius is guaranteed to be at most `2^q`.
    pub fn leq_accuracy(&self, q: i64) -> bool {
        match self {
            ErrorRep::Exact => true,
            ErrorRep::Direct(d) => d.0.cmp_abs(&BigFloat::pow2(q)) != Ordering::Greater,
            ErrorRep::LogInt(e) => e.0 <= q,
            ErrorRep::LogFloat(e) => e.0 <= q as f64,
        }
    }

    /// True unless `[approx - r, approx + r]` provably excludes zero.
    pub fn covers_zero(&self, approx: &BigFloat) -> bool {
        if approx.is_zero() {
            return true;
        }
        match self {
            ErrorRep::Exact => false,
            ErrorRep::Direct(d) => approx.cmp_abs(&d.0) != Ordering::Greater,
            ErrorRep::LogInt(e) => approx.ceil_log2_exact().map_or(true, |c| c <= e.0),
            ErrorRep::LogFloat(e) => approx.log2_bounds().map_or(true, |(lo, _)| lo <= e.0),
        }
    }

    /// Re-expresses the bound in another carrier without shrinking it.
    pub fn convert(&self, kind: RepKind, exact_log: bool) -> ErrorRep {
        match (self, kind) {
            (ErrorRep::Exact, _) => ErrorRep::Exact,
            (ErrorRep::Direct(_), RepKind::Direct)
            | (ErrorRep::LogInt(_), RepKind::LogInt)
            | (ErrorRep::LogFloat(_), RepKind::LogFloat) => self.clone(),
            (ErrorRep::Direct(d), RepKind::LogInt) => match phi_hat(d, exact_log) {
                Ok(e) => ErrorRep::LogInt(LogIntError(e)),
                Err(_) => ErrorRep::Exact,
            },
            (ErrorRep::Direct(d), RepKind::LogFloat) => match d.0.log2_bounds() {
                Ok((_, hi)) => ErrorRep::LogFloat(LogFloatError(hi)),
                Err(_) => ErrorRep::Exact,
            },
            (ErrorRep::LogInt(e), RepKind::Direct) => ErrorRep::Direct(phi(e.0)),
            (ErrorRep::LogInt(e), RepKind::LogFloat) => ErrorRep::LogFloat(LogFloatError(e.0 as f64)),
            (ErrorRep::LogFloat(e), RepKind::LogInt) => {
                ErrorRep::LogInt(LogIntError(fpu::ceil_to_i64(e.0)))
            }
            (ErrorRep::LogFloat(e), RepKind::Direct) => {
                ErrorRep::Direct(phi(fpu::ceil_to_i64(e.0)))
            }
        }
    }
}

impl fmt::Display for ErrorRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorRep::Exact => write!(f, "exact"),
            ErrorRep::Direct(d) => write!(f, "{:?}", d.0),
            ErrorRep::LogInt(e) => write!(f, "2^{}", e.0),
            ErrorRep::LogFloat(e) => write!(f, "2^{:.6}", e.0),
        }
    }
}
