//! Test oracles and random expression generators shared by the
//! integration and acceptance suites.
#![allow(dead_code)]

use std::collections::HashMap;
use std::rc::Rc;
use std::sync::OnceLock;

use lazy_real::{BigFloat, Context, Precision, Real, RoundingMode};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

pub fn rational(v: &BigFloat) -> BigRational {
    let m = BigInt::from(v.significand().clone());
    let m = if v.is_negative() { -m } else { m };
    let e = v.lsb_exponent();
    if e >= 0 {
        BigRational::from_integer(m << e as usize)
    } else {
        BigRational::new(m, BigInt::one() << (-e) as usize)
    }
}

pub fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact value of a finite `f64`.
pub fn f64_rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

// ---------------------------------------------------------------------
// Upper bounds for 2^-s in fixed point.

/// Fixed-point fraction bits of the power oracle.
pub const FP_BITS: usize = 192;

fn scale() -> BigUint {
    BigUint::one() << FP_BITS
}

/// `floor(ln 2 * 2^FP_BITS)` lower bound from `ln 2 = sum 1/(k 2^k)`.
fn ln2_lower() -> &'static BigUint {
    static L: OnceLock<BigUint> = OnceLock::new();
    L.get_or_init(|| {
        let s = scale();
        let mut acc = BigUint::zero();
        for k in 1..=(FP_BITS + 16) {
            acc += &s / (BigUint::from(k) << k);
        }
        acc
    })
}

/// Lower bound of `e^z * 2^FP_BITS` given `zf <= z * 2^FP_BITS`.
/// Every step rounds down, so the result stays a lower bound.
fn exp_lower(zf: &BigUint) -> BigUint {
    let s = scale();
    // Reduce to z / 2^r <= 1 and square back r times.
    let r = (zf.bits() as usize).saturating_sub(FP_BITS);
    let zr = zf >> r;
    let mut sum = s.clone();
    let mut term = s.clone();
    for j in 1..=60u32 {
        term = ((&term * &zr) >> FP_BITS) / j;
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    for _ in 0..r {
        sum = (&sum * &sum) >> FP_BITS;
    }
    sum
}

/// `U >= 2^-s * 2^FP_BITS` for a rational `s >= 0`.
pub fn pow2_neg_upper(s: &BigRational) -> BigUint {
    assert!(!s.is_negative());
    if s.is_integer() || s > &BigRational::from_integer(BigInt::from(128)) {
        // 2^-s <= 2^-floor(s), exact for integers.
        let f = s.floor().to_integer().to_usize().unwrap_or(usize::MAX);
        return if f >= FP_BITS {
            BigUint::one()
        } else {
            scale() >> f
        };
    }
    // 2^-s = 1 / e^(s ln 2) <= 1 / e^z for any z <= s ln 2.
    let sf = (s.numer().to_biguint().expect("non-negative") << FP_BITS)
        / s.denom().to_biguint().expect("positive");
    let zf = (sf * ln2_lower()) >> FP_BITS;
    let e = exp_lower(&zf);
    let s2 = scale() * scale();
    let (q, rem) = s2.div_rem(&e);
    if rem.is_zero() {
        q
    } else {
        q + 1u32
    }
}

/// Whether `2^c >= 2^a + 2^b` is certified (rigorous one-sided check).
pub fn pow2_sum_bounded(a: &BigRational, b: &BigRational, c: &BigRational) -> bool {
    if a > c || b > c {
        return false;
    }
    let u1 = pow2_neg_upper(&(c - a));
    let u2 = pow2_neg_upper(&(c - b));
    u1 + u2 <= scale()
}

// ---------------------------------------------------------------------
// Random expressions.

#[derive(Debug)]
pub enum Ast {
    Int(i64),
    Ratio(i64, i64),
    Dyadic(i64, i64),
    Neg(Rc<Ast>),
    Add(Rc<Ast>, Rc<Ast>),
    Sub(Rc<Ast>, Rc<Ast>),
    Mul(Rc<Ast>, Rc<Ast>),
    Div(Rc<Ast>, Rc<Ast>),
    Root(Rc<Ast>, u32),
}

pub type Node = Rc<Ast>;

fn key(n: &Node) -> usize {
    Rc::as_ptr(n) as usize
}

pub fn has_roots(n: &Node) -> bool {
    match &**n {
        Ast::Int(_) | Ast::Ratio(..) | Ast::Dyadic(..) => false,
        Ast::Root(..) => true,
        Ast::Neg(x) => has_roots(x),
        Ast::Add(x, y) | Ast::Sub(x, y) | Ast::Mul(x, y) | Ast::Div(x, y) => {
            has_roots(x) || has_roots(y)
        }
    }
}

/// Builds the expression in `ctx`, preserving sharing.
pub fn to_real(ctx: &Rc<Context>, n: &Node) -> Real {
    fn go(ctx: &Rc<Context>, n: &Node, memo: &mut HashMap<usize, Real>) -> Real {
        if let Some(r) = memo.get(&key(n)) {
            return r.clone();
        }
        let r = match &**n {
            Ast::Int(v) => Real::int(ctx, *v),
            Ast::Ratio(p, q) => Real::ratio(ctx, *p, *q),
            Ast::Dyadic(m, e) => Real::dyadic(ctx, *m, *e),
            Ast::Neg(x) => -go(ctx, x, memo),
            Ast::Add(x, y) => go(ctx, x, memo) + go(ctx, y, memo),
            Ast::Sub(x, y) => go(ctx, x, memo) - go(ctx, y, memo),
            Ast::Mul(x, y) => go(ctx, x, memo) * go(ctx, y, memo),
            Ast::Div(x, y) => go(ctx, x, memo) / go(ctx, y, memo),
            Ast::Root(x, k) => go(ctx, x, memo).root(*k).expect("k >= 2"),
        };
        memo.insert(key(n), r.clone());
        r
    }
    go(ctx, n, &mut HashMap::new())
}

/// Exact value of a root-free expression; `None` on division by zero.
pub fn rational_value(n: &Node) -> Option<BigRational> {
    fn go(n: &Node, memo: &mut HashMap<usize, Option<BigRational>>) -> Option<BigRational> {
        if let Some(v) = memo.get(&key(n)) {
            return v.clone();
        }
        let int = |v: i64| BigRational::from_integer(BigInt::from(v));
        let v = match &**n {
            Ast::Int(v) => Some(int(*v)),
            Ast::Ratio(p, q) => Some(BigRational::new(BigInt::from(*p), BigInt::from(*q))),
            Ast::Dyadic(m, e) => Some(int(*m) * pow2(*e)),
            Ast::Neg(x) => go(x, memo).map(|v| -v),
            Ast::Add(x, y) => Some(go(x, memo)? + go(y, memo)?),
            Ast::Sub(x, y) => Some(go(x, memo)? - go(y, memo)?),
            Ast::Mul(x, y) => Some(go(x, memo)? * go(y, memo)?),
            Ast::Div(x, y) => {
                let d = go(y, memo)?;
                if d.is_zero() {
                    None
                } else {
                    Some(go(x, memo)? / d)
                }
            }
            Ast::Root(..) => panic!("rational_value on an expression with roots"),
        };
        memo.insert(key(n), v.clone());
        v
    }
    go(n, &mut HashMap::new())
}

/// Closed interval `[lo, hi]` of bigfloats.
pub type Iv = (BigFloat, BigFloat);

/// Outward-rounded interval evaluation at `prec` significand bits; `None`
/// if a divisor or even-root operand is not provably admissible.
pub fn interval(n: &Node, prec: u32) -> Option<Iv> {
    let p = Precision::new(prec).expect("valid precision");
    fn go(n: &Node, p: Precision, memo: &mut HashMap<usize, Option<Iv>>) -> Option<Iv> {
        if let Some(v) = memo.get(&key(n)) {
            return v.clone();
        }
        let dn = RoundingMode::TowardNegative;
        let up = RoundingMode::TowardPositive;
        let point = |v: BigFloat| Some((v.clone(), v));
        let v = match &**n {
            Ast::Int(v) => point(BigFloat::from_i64(*v)),
            Ast::Dyadic(m, e) => point(BigFloat::from_i64(*m).mul_pow2(*e)),
            Ast::Ratio(a, b) => {
                let (a, b) = (BigFloat::from_i64(*a), BigFloat::from_i64(*b));
                Some((a.div(&b, p, dn).ok()?.value, a.div(&b, p, up).ok()?.value))
            }
            Ast::Neg(x) => {
                let (lo, hi) = go(x, p, memo)?;
                Some((-hi, -lo))
            }
            Ast::Add(x, y) => {
                let (a, b) = (go(x, p, memo)?, go(y, p, memo)?);
                Some((a.0.add(&b.0, p, dn).value, a.1.add(&b.1, p, up).value))
            }
            Ast::Sub(x, y) => {
                let (a, b) = (go(x, p, memo)?, go(y, p, memo)?);
                Some((a.0.sub(&b.1, p, dn).value, a.1.sub(&b.0, p, up).value))
            }
            Ast::Mul(x, y) => {
                let (a, b) = (go(x, p, memo)?, go(y, p, memo)?);
                let mut lo: Option<BigFloat> = None;
                let mut hi: Option<BigFloat> = None;
                for u in [&a.0, &a.1] {
                    for v in [&b.0, &b.1] {
                        let d = u.mul(v, p, dn).value;
                        let h = u.mul(v, p, up).value;
                        lo = Some(lo.map_or(d.clone(), |l| l.min(d)));
                        hi = Some(hi.map_or(h.clone(), |x| x.max(h)));
                    }
                }
                Some((lo?, hi?))
            }
            Ast::Div(x, y) => {
                let (a, b) = (go(x, p, memo)?, go(y, p, memo)?);
                if b.0.signum() != b.1.signum() || b.0.is_zero() {
                    return None;
                }
                let mut lo: Option<BigFloat> = None;
                let mut hi: Option<BigFloat> = None;
                for u in [&a.0, &a.1] {
                    for v in [&b.0, &b.1] {
                        let d = u.div(v, p, dn).ok()?.value;
                        let h = u.div(v, p, up).ok()?.value;
                        lo = Some(lo.map_or(d.clone(), |l| l.min(d)));
                        hi = Some(hi.map_or(h.clone(), |x| x.max(h)));
                    }
                }
                Some((lo?, hi?))
            }
            Ast::Root(x, k) => {
                let (lo, hi) = go(x, p, memo)?;
                if k % 2 == 0 {
                    if hi.is_negative() {
                        return None;
                    }
                    let lo = if lo.is_negative() { BigFloat::zero() } else { lo };
                    Some((lo.root(*k, p, dn).ok()?.value, hi.root(*k, p, up).ok()?.value))
                } else {
                    Some((lo.root(*k, p, dn).ok()?.value, hi.root(*k, p, up).ok()?.value))
                }
            }
        };
        memo.insert(key(n), v.clone());
        v
    }
    go(n, p, &mut HashMap::new())
}

/// Interval no wider than `2^q`, found by raising the precision.
pub fn reference(n: &Node, q: i64) -> Option<Iv> {
    let mut prec = 64u32;
    loop {
        let iv = interval(n, prec)?;
        let width = iv.1.sub_exact(&iv.0);
        if width.is_zero() || width.ceil_log2_exact().ok()? <= q {
            return Some(iv);
        }
        if prec > 1 << 20 {
            return None;
        }
        prec *= 2;
    }
}

pub struct Gen<'a, R: Rng> {
    pub rng: &'a mut R,
    pub roots: bool,
}

impl<'a, R: Rng> Gen<'a, R> {
    pub fn new(rng: &'a mut R, roots: bool) -> Self {
        Gen { rng, roots }
    }

    pub fn leaf(&mut self) -> Node {
        Rc::new(match self.rng.gen_range(0..3) {
            0 => Ast::Int(self.rng.gen_range(-50..=50)),
            1 => {
                let q = self.rng.gen_range(1..=20);
                Ast::Ratio(self.rng.gen_range(-50..=50), q)
            }
            _ => Ast::Dyadic(self.rng.gen_range(-200..=200), self.rng.gen_range(-12..=12)),
        })
    }

    fn positive_leaf(&mut self) -> Node {
        Rc::new(match self.rng.gen_range(0..2) {
            0 => Ast::Int(self.rng.gen_range(1..=60)),
            _ => Ast::Ratio(self.rng.gen_range(1..=60), self.rng.gen_range(1..=20)),
        })
    }

    /// `x^2 + c` with `c > 0`.
    fn positive(&mut self, depth: u32) -> Node {
        let x = self.expr(depth);
        let c = self.positive_leaf();
        Rc::new(Ast::Add(Rc::new(Ast::Mul(x.clone(), x)), c))
    }

    fn nonzero_divisor(&mut self, depth: u32) -> Node {
        if self.roots {
            return match self.rng.gen_range(0..3) {
                0 => self.positive(depth),
                1 => Rc::new(Ast::Root(self.positive_leaf(), 2)),
                _ => self.positive_leaf(),
            };
        }
        let d = self.expr(depth);
        match rational_value(&d) {
            Some(v) if !v.is_zero() => d,
            _ => self.positive_leaf(),
        }
    }

    pub fn expr(&mut self, depth: u32) -> Node {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.leaf();
        }
        let d = depth - 1;
        let pick = self.rng.gen_range(0..100);
        let node = match pick {
            0..=4 => Ast::Neg(self.expr(d)),
            5..=22 => Ast::Add(self.expr(d), self.expr(d)),
            23..=40 => Ast::Sub(self.expr(d), self.expr(d)),
            41..=60 => Ast::Mul(self.expr(d), self.expr(d)),
            61..=72 => Ast::Div(self.expr(d), self.nonzero_divisor(d)),
            73..=80 => {
                // a - ((a + c) - c): zero with sharing.
                let a = self.expr(d);
                let c = self.expr(d);
                let b = Rc::new(Ast::Sub(Rc::new(Ast::Add(a.clone(), c.clone())), c));
                Ast::Sub(a, b)
            }
            81..=86 => {
                // a * c - c * a
                let a = self.expr(d);
                let c = self.expr(d);
                Ast::Sub(Rc::new(Ast::Mul(a.clone(), c.clone())), Rc::new(Ast::Mul(c, a)))
            }
            87..=90 => {
                // a - (a + 2^-k): tiny but non-zero.
                let a = self.expr(d);
                let k = self.rng.gen_range(30..=90);
                Ast::Sub(a.clone(), Rc::new(Ast::Add(a, Rc::new(Ast::Dyadic(1, -k)))))
            }
            _ if self.roots => match self.rng.gen_range(0..4) {
                0 => Ast::Root(self.positive(d.saturating_sub(1)), 2),
                1 => Ast::Root(self.expr(d), 3),
                2 => {
                    // sqrt(a)^2 - a
                    let a = self.positive_leaf();
                    let r = Rc::new(Ast::Root(a.clone(), 2));
                    Ast::Sub(Rc::new(Ast::Mul(r.clone(), r)), a)
                }
                _ => Ast::Root(self.positive_leaf(), 2),
            },
            _ => Ast::Mul(self.expr(d), self.leaf()),
        };
        Rc::new(node)
    }
}

/// Sign of an interval that excludes zero.
pub fn interval_sign(iv: &Iv) -> Option<i32> {
    if iv.0.signum() > 0 {
        Some(1)
    } else if iv.1.signum() < 0 {
        Some(-1)
    } else {
        None
    }
}

/// `min |x|` over an interval that excludes zero.
pub fn interval_min_abs(iv: &Iv) -> BigFloat {
    if iv.0.signum() > 0 {
        iv.0.clone()
    } else {
        iv.1.abs()
    }
}
