//! The public exact-decision number type.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::rc::Rc;

use crate::bigfloat::BigFloat;
use crate::dag::{Expr, NodeKind};
use crate::error::{Error, Result};
use crate::errorbound::ErrorRep;
use crate::eval::{self, Context, StrategyConfig};

/// A real number represented by the expression that defines it.
///
/// Arithmetic only records operations; decisions ([`Real::sign`],
/// [`Real::compare`]) and approximations evaluate as far as needed. All
/// operands of one expression must share a [`Context`].
#[derive(Clone)]
pub struct Real {
    expr: Expr,
    ctx: Rc<Context>,
}

impl Real {
    pub fn context(config: StrategyConfig) -> Rc<Context> {
        Rc::new(Context::new(config))
    }

    pub fn from_bigfloat(ctx: &Rc<Context>, v: BigFloat) -> Real {
        Real {
            expr: Expr::leaf(v),
            ctx: ctx.clone(),
        }
    }

    pub fn int(ctx: &Rc<Context>, v: i64) -> Real {
        Self::from_bigfloat(ctx, BigFloat::from_i64(v))
    }

    /// `m * 2^e`.
    pub fn dyadic(ctx: &Rc<Context>, m: i64, e: i64) -> Real {
        Self::from_bigfloat(ctx, BigFloat::from_i64(m).mul_pow2(e))
    }

    /// `None` for NaN and infinities.
    pub fn float(ctx: &Rc<Context>, v: f64) -> Option<Real> {
        BigFloat::from_f64(v).map(|b| Self::from_bigfloat(ctx, b))
    }

    /// `n / d` as a division node.
    pub fn ratio(ctx: &Rc<Context>, n: i64, d: i64) -> Real {
        Self::int(ctx, n) / Self::int(ctx, d)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn ctx(&self) -> &Rc<Context> {
        &self.ctx
    }

    fn same_context(&self, other: &Real) -> bool {
        Rc::ptr_eq(&self.ctx, &other.ctx)
    }

    fn wrap(&self, kind: NodeKind) -> Real {
        Real {
            expr: Expr::node(kind).expect("valid node"),
            ctx: self.ctx.clone(),
        }
    }

    fn binary(&self, other: &Real, make: fn(Expr, Expr) -> NodeKind) -> Result<Real> {
        if !self.same_context(other) {
            return Err(Error::Usage("operands belong to different contexts"));
        }
        Ok(self.wrap(make(self.expr.clone(), other.expr.clone())))
    }

    pub fn try_add(&self, other: &Real) -> Result<Real> {
        self.binary(other, NodeKind::Add)
    }

    pub fn try_sub(&self, other: &Real) -> Result<Real> {
        self.binary(other, NodeKind::Sub)
    }

    pub fn try_mul(&self, other: &Real) -> Result<Real> {
        self.binary(other, NodeKind::Mul)
    }

    pub fn try_div(&self, other: &Real) -> Result<Real> {
        self.binary(other, NodeKind::Div)
    }

    pub fn sqrt(&self) -> Real {
        self.wrap(NodeKind::Root(self.expr.clone(), 2))
    }

    pub fn root(&self, k: u32) -> Result<Real> {
        if k < 2 {
            return Err(Error::InvalidRootIndex(k));
        }
        Ok(self.wrap(NodeKind::Root(self.expr.clone(), k)))
    }

    pub fn sign(&self) -> Result<i32> {
        eval::sign(&self.ctx, &self.expr)
    }

    pub fn compare(&self, other: &Real) -> Result<Ordering> {
        let d = self.try_sub(other)?;
        Ok(d.sign()?.cmp(&0))
    }

    pub fn equals(&self, other: &Real) -> Result<bool> {
        Ok(self.compare(other)? == Ordering::Equal)
    }

    /// An approximation within `2^q` of the value, with its error bound.
    pub fn to_approx(&self, q: i64) -> Result<(BigFloat, ErrorRep)> {
        eval::to_approx(&self.ctx, &self.expr, q)
    }

    /// Separation bound of the current expression.
    pub fn sep_log(&self) -> Result<i64> {
        eval::init_bottom_up(&self.ctx, &self.expr)?;
        Ok(eval::compute_sep(&self.ctx, &self.expr))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({:?})", self.expr)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident, $kind:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                self.binary(rhs, NodeKind::$kind)
                    .expect("operands belong to different contexts")
            }
        }

        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }

        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }

        impl $assign_trait<&Real> for Real {
            fn $assign(&mut self, rhs: &Real) {
                *self = (&*self).$method(rhs);
            }
        }

        impl $assign_trait<Real> for Real {
            fn $assign(&mut self, rhs: Real) {
                *self = (&*self).$method(&rhs);
            }
        }
    };
}

binary_op!(Add, add, AddAssign, add_assign, Add);
binary_op!(Sub, sub, SubAssign, sub_assign, Sub);
binary_op!(Mul, mul, MulAssign, mul_assign, Mul);
binary_op!(Div, div, DivAssign, div_assign, Div);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        self.wrap(NodeKind::Neg(self.expr.clone()))
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction() {
        let ctx = Real::context(StrategyConfig::lgi());
        let five = Real::int(&ctx, 5);
        assert_eq!(five.to_approx(-100).unwrap(), (BigFloat::from_i64(5), ErrorRep::Exact));
        let q = Real::float(&ctx, 0.25).unwrap();
        assert_eq!(q.to_approx(0).unwrap().0, BigFloat::from_f64(0.25).unwrap());
        assert!(Real::float(&ctx, f64::NAN).is_none());
        let third = Real::ratio(&ctx, 1, 3);
        assert!(matches!(third.expr().kind(), NodeKind::Div(..)));
        assert_eq!(Real::dyadic(&ctx, 3, -2).to_approx(0).unwrap().0, BigFloat::from_f64(0.75).unwrap());
    }

    #[test]
    fn sharing_and_laziness() {
        let ctx = Real::context(StrategyConfig::def());
        let a = Real::int(&ctx, 2);
        let b = &a + &a;
        let kids = b.expr().children();
        assert!(kids[0].ptr_eq(&kids[1]));
        let r = a.sqrt();
        let f = r.expr().filter();
        assert!(f.lo < f.hi && f.lo <= std::f64::consts::SQRT_2 && f.hi >= std::f64::consts::SQRT_2);
        let bad = Real::int(&ctx, 1) / (&r * &r - &a);
        assert_eq!(ctx.counters.bigfloat_ops.get(), 0);
        assert_eq!(bad.sign(), Err(Error::DivisionByZero));
    }

    #[test]
    fn decisions() {
        let ctx = Real::context(StrategyConfig::lgd());
        let lhs = Real::ratio(&ctx, 1, 3) + Real::ratio(&ctx, 1, 6);
        assert_eq!(lhs.compare(&Real::ratio(&ctx, 1, 2)), Ok(Ordering::Equal));
        let two = Real::int(&ctx, 2);
        let r = two.sqrt();
        assert_eq!((&r * &r).equals(&two), Ok(true));
        assert_eq!(Real::int(&ctx, 0).sign(), Ok(0));
        assert_eq!(r.compare(&Real::ratio(&ctx, 99, 70)), Ok(Ordering::Less));
        assert_eq!(r.compare(&Real::ratio(&ctx, 140, 99)), Ok(Ordering::Greater));
        assert!(two.root(1).is_err());
        assert_eq!(two.root(3).unwrap().compare(&r), Ok(Ordering::Less));
    }

    #[test]
    fn mixed_contexts_are_rejected() {
        let a = Real::int(&Real::context(StrategyConfig::def()), 1);
        let b = Real::int(&Real::context(StrategyConfig::def()), 1);
        assert!(matches!(a.compare(&b), Err(Error::Usage(_))));
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn compound_assignment() {
        let ctx = Real::context(StrategyConfig::lgi());
        let mut x = Real::int(&ctx, 3);
        x += Real::int(&ctx, 4);
        x *= &Real::int(&ctx, 2);
        x -= Real::int(&ctx, 4);
        x /= Real::int(&ctx, 5);
        assert_eq!(x.compare(&Real::int(&ctx, 2)), Ok(Ordering::Equal));
    }
}
