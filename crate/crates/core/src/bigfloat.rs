//! Arbitrary-precision binary floating point with directed rounding.
//!
//! A [`BigFloat`] is `sign * mant * 2^lsb` with an odd integer significand, so
//! every stored value is exact and equality is structural. The conventional
//! view `m * 2^b` with `m` in `[0.5, 1)` is available through
//! [`BigFloat::exponent`]; `b = lsb + bits(mant)`.
//!
//! Every rounding operation returns a [`Rounded`] that carries an upper bound
//! on the absolute rounding error as a power of two (or `None` when the
//! result is exact).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fpu;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RoundingMode {
    TowardNegative,
    TowardPositive,
    ToNearest,
    AwayFromZero,
}

/// Target significand length of a rounded operation, at least 2 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 2;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::InvalidPrecision(bits));
        }
        Ok(Precision(bits))
    }

    /// Clamps `bits` into the valid range instead of failing.
    pub fn saturating(bits: i64) -> Self {
        Precision(bits.clamp(Self::MIN_BITS as i64, u32::MAX as i64) as u32)
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

/// Result of a rounded operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rounded {
    pub value: BigFloat,
    /// `Some(e)` when `|value - exact| <= 2^e`; `None` when no rounding occurred.
    pub error_log2: Option<i64>,
}

impl Rounded {
    pub fn is_exact(&self) -> bool {
        self.error_log2.is_none()
    }

    fn exact(value: BigFloat) -> Self {
        Rounded {
            value,
            error_log2: None,
        }
    }
}

/// Operators accepted by [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    Root(u32),
    Neg,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigFloat {
    negative: bool,
    /// Odd, or zero for the value zero.
    mant: BigUint,
    /// Weight of the least significant bit of `mant`; 0 for zero.
    lsb: i64,
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat {
            negative: false,
            mant: BigUint::zero(),
            lsb: 0,
        }
    }

    pub fn one() -> Self {
        BigFloat::from_i64(1)
    }

    /// Exactly `2^e`.
    pub fn pow2(e: i64) -> Self {
        BigFloat {
            negative: false,
            mant: BigUint::one(),
            lsb: e,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_parts(v < 0, BigUint::from(v.unsigned_abs()), 0)
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        Self::from_parts(v.sign() == Sign::Minus, v.magnitude().clone(), 0)
    }

    /// Exact conversion; `None` for NaN and infinities.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Self::zero());
        }
        let bits = v.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Some(Self::from_parts(negative, BigUint::from(mant), e))
    }

    /// Builds `(-1)^negative * mant * 2^lsb`, normalizing the significand.
    pub fn from_parts(negative: bool, mant: BigUint, lsb: i64) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        let mant = if tz > 0 { mant >> tz } else { mant };
        BigFloat {
            negative,
            mant,
            lsb: lsb + tz as i64,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn abs(&self) -> Self {
        BigFloat {
            negative: false,
            ..self.clone()
        }
    }

    /// The odd integer significand.
    pub fn significand(&self) -> &BigUint {
        &self.mant
    }

    /// Weight of the lowest set bit.
    pub fn lsb_exponent(&self) -> i64 {
        self.lsb
    }

    /// Number of significant bits.
    pub fn precision_bits(&self) -> u64 {
        self.mant.bits()
    }

    /// The exponent `b` of the normalized form `m * 2^b`, `m` in `[0.5, 1)`.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.lsb + self.mant.bits() as i64)
        }
    }

    pub fn is_power_of_two(&self) -> bool {
        // Odd significand: a power of two has exactly one significant bit.
        self.mant.bits() == 1
    }

    /// The stored exponent `b`; overestimates `ceil(log2|x|)` by one on powers of two.
    pub fn ceil_log2_inexact(&self) -> Result<i64> {
        self.exponent().ok_or(Error::LogOfZero)
    }

    /// Exactly `ceil(log2|x|)`.
    pub fn ceil_log2_exact(&self) -> Result<i64> {
        let b = self.exponent().ok_or(Error::LogOfZero)?;
        Ok(if self.is_power_of_two() { b - 1 } else { b })
    }

    /// Exactly `floor(log2|x|)`.
    pub fn floor_log2(&self) -> Result<i64> {
        Ok(self.exponent().ok_or(Error::LogOfZero)? - 1)
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        BigFloat {
            lsb: self.lsb + k,
            ..self.clone()
        }
    }

    /// Bits needed to hold `self + other` exactly.
    pub fn exact_sum_bits(&self, other: &BigFloat) -> u64 {
        match (self.exponent(), other.exponent()) {
            (None, None) => 0,
            (Some(_), None) => self.precision_bits(),
            (None, Some(_)) => other.precision_bits(),
            (Some(a), Some(b)) => (a.max(b) - self.lsb.min(other.lsb)) as u64 + 1,
        }
    }

    pub fn add_exact(&self, other: &BigFloat) -> BigFloat {
        add_signed(self, other, false)
    }

    pub fn sub_exact(&self, other: &BigFloat) -> BigFloat {
        add_signed(self, other, true)
    }

    pub fn mul_exact(&self, other: &BigFloat) -> BigFloat {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        BigFloat {
            negative: self.negative != other.negative,
            mant: &self.mant * &other.mant,
            lsb: self.lsb + other.lsb,
        }
    }

    /// Rounds to `p` bits in direction `rm`.
    pub fn round(&self, p: Precision, rm: RoundingMode) -> Rounded {
        round_parts(self.negative, self.mant.clone(), self.lsb, false, p, rm)
    }

    pub fn add(&self, other: &BigFloat, p: Precision, rm: RoundingMode) -> Rounded {
        add_rounded(self, other, false, p, rm)
    }

    pub fn sub(&self, other: &BigFloat, p: Precision, rm: RoundingMode) -> Rounded {
        add_rounded(self, other, true, p, rm)
    }

    pub fn mul(&self, other: &BigFloat, p: Precision, rm: RoundingMode) -> Rounded {
        if self.is_zero() || other.is_zero() {
            return Rounded::exact(Self::zero());
        }
        round_parts(
            self.negative != other.negative,
            &self.mant * &other.mant,
            self.lsb + other.lsb,
            false,
            p,
            rm,
        )
    }

    pub fn div(&self, other: &BigFloat, p: Precision, rm: RoundingMode) -> Result<Rounded> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Rounded::exact(Self::zero()));
        }
        // Scale the dividend so the integer quotient carries p + 2 bits.
        let want = p.bits() as i64 + 2 + other.mant.bits() as i64 + 1;
        let shift = (want - self.mant.bits() as i64).max(0);
        let num = &self.mant << shift as usize;
        let (q, r) = num_integer::Integer::div_rem(&num, &other.mant);
        let lsb = self.lsb - other.lsb - shift;
        Ok(round_parts(
            self.negative != other.negative,
            q,
            lsb,
            !r.is_zero(),
            p,
            rm,
        ))
    }

    pub fn sqrt(&self, p: Precision, rm: RoundingMode) -> Result<Rounded> {
        self.root(2, p, rm)
    }

    /// The real `k`-th root; odd `k` accepts negative operands.
    pub fn root(&self, k: u32, p: Precision, rm: RoundingMode) -> Result<Rounded> {
        if k < 2 {
            return Err(Error::InvalidRootIndex(k));
        }
        if self.is_zero() {
            return Ok(Rounded::exact(Self::zero()));
        }
        if self.negative && k.is_multiple_of(2) {
            return Err(Error::NegativeEvenRoot);
        }
        let k64 = k as i64;
        // The integer root of the scaled significand must carry p + 2 bits,
        // and the remaining exponent must be divisible by k.
        let want = k64 * (p.bits() as i64 + 2) + 1;
        let mut shift = (want - self.mant.bits() as i64).max(0);
        shift += (self.lsb - shift).rem_euclid(k64);
        let radicand = &self.mant << shift as usize;
        let r = if k == 2 {
            isqrt(&radicand)
        } else {
            radicand.nth_root(k)
        };
        let sticky = if k == 2 {
            &r * &r != radicand
        } else {
            r.pow(k) != radicand
        };
        let lsb = (self.lsb - shift) / k64;
        Ok(round_parts(self.negative, r, lsb, sticky, p, rm))
    }

    /// Directed conversion to `f64`, saturating to infinities on overflow.
    pub fn to_f64(&self, rm: RoundingMode) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(Precision(53), rm).value;
        let m = r.mant.to_u64().expect("53-bit significand") as f64;
        let v = scale_f64(m, r.lsb);
        if self.negative {
            -v
        } else {
            v
        }
    }

    /// Closed `f64` interval containing the value.
    pub fn to_f64_interval(&self) -> (f64, f64) {
        let near = self.to_f64(RoundingMode::ToNearest);
        if BigFloat::from_f64(near).as_ref() == Some(self) {
            return (near, near);
        }
        if near.is_infinite() {
            return if near > 0.0 {
                (f64::MAX, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, f64::MIN)
            };
        }
        (near.next_down(), near.next_up())
    }

    /// Bounds `(lo, hi)` on `log2|x|`, both finite for non-zero `x`.
    pub fn log2_bounds(&self) -> Result<(f64, f64)> {
        if self.is_zero() {
            return Err(Error::LogOfZero);
        }
        let bits = self.mant.bits();
        let (top, shift) = if bits > 53 {
            ((&self.mant >> (bits - 53) as usize).to_u64().unwrap(), bits - 53)
        } else {
            (self.mant.to_u64().unwrap(), 0)
        };
        let offset = (self.lsb + shift as i64) as f64;
        let lo = fpu::add_down(fpu::log2_down(top as f64), offset);
        let hi_arg = if shift > 0 { top + 1 } else { top };
        let hi = fpu::add_up(fpu::log2_up(hi_arg as f64), offset);
        Ok((lo, hi))
    }

    pub fn cmp_abs(&self, other: &BigFloat) -> Ordering {
        match (self.exponent(), other.exponent()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) if a != b => a.cmp(&b),
            _ => {
                // Same exponent: align the significands at their top bits.
                let (sa, sb) = (self.mant.bits(), other.mant.bits());
                if sa >= sb {
                    self.mant.cmp(&(&other.mant << (sa - sb) as usize))
                } else {
                    (&self.mant << (sb - sa) as usize).cmp(&other.mant)
                }
            }
        }
    }
}

/// Dispatches one rounded operation over `operands`.
pub fn arith(op: Op, operands: &[BigFloat], p: Precision, rm: RoundingMode) -> Result<Rounded> {
    let arity = match op {
        Op::Add | Op::Sub | Op::Mul | Op::Div => 2,
        Op::Sqrt | Op::Root(_) | Op::Neg => 1,
    };
    if operands.len() != arity {
        return Err(Error::Usage("operand count does not match operator arity"));
    }
    let a = &operands[0];
    match op {
        Op::Add => Ok(a.add(&operands[1], p, rm)),
        Op::Sub => Ok(a.sub(&operands[1], p, rm)),
        Op::Mul => Ok(a.mul(&operands[1], p, rm)),
        Op::Div => a.div(&operands[1], p, rm),
        Op::Sqrt => a.sqrt(p, rm),
        Op::Root(k) => a.root(k, p, rm),
        Op::Neg => Ok((-a).round(p, rm)),
    }
}

fn scale_f64(m: f64, e: i64) -> f64 {
    // Stepwise scaling keeps intermediate values representable.
    let mut v = m;
    let mut e = e.clamp(-3000, 3000) as i32;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e)
}

/// Integer square root by precision doubling: one division per level.
fn isqrt(n: &BigUint) -> BigUint {
    let bits = n.bits();
    if bits <= 104 {
        return n.sqrt();
    }
    // Take the root of the top half and refine with a single Newton step.
    let k = (bits / 4) as usize;
    let hi = isqrt(&(n >> (2 * k))) << k;
    let mut x = (&hi + n / &hi) >> 1usize;
    // Newton from above converges monotonically; fix the last unit.
    while &x * &x > *n {
        x -= 1u32;
    }
    loop {
        let next = &x + 1u32;
        if &next * &next <= *n {
            x = next;
        } else {
            break;
        }
    }
    x
}

fn add_signed(a: &BigFloat, b: &BigFloat, negate_b: bool) -> BigFloat {
    let b_neg = b.negative != negate_b;
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return BigFloat {
            negative: b_neg,
            ..b.clone()
        };
    }
    let lsb = a.lsb.min(b.lsb);
    let ma = &a.mant << (a.lsb - lsb) as usize;
    let mb = &b.mant << (b.lsb - lsb) as usize;
    if a.negative == b_neg {
        BigFloat::from_parts(a.negative, ma + mb, lsb)
    } else {
        match ma.cmp(&mb) {
            Ordering::Equal => BigFloat::zero(),
            Ordering::Greater => BigFloat::from_parts(a.negative, ma - mb, lsb),
            Ordering::Less => BigFloat::from_parts(b_neg, mb - ma, lsb),
        }
    }
}

fn add_rounded(a: &BigFloat, b: &BigFloat, negate_b: bool, p: Precision, rm: RoundingMode) -> Rounded {
    let b_neg = b.negative != negate_b;
    let (ea, eb) = match (a.exponent(), b.exponent()) {
        (Some(ea), Some(eb)) => (ea, eb),
        _ => return add_signed(a, b, negate_b).round(p, rm),
    };
    // An operand lying entirely below the rounding position of the other and
    // below its lowest bit only acts as a sticky bit; substitute a single bit
    // so the aligned sum stays short.
    let (big, big_neg, small_neg, e_small, e_big) = if ea >= eb {
        (a, a.negative, b_neg, eb, ea)
    } else {
        (b, b_neg, a.negative, ea, eb)
    };
    let k = big.lsb.min(e_big - p.bits() as i64 - 2);
    if e_small <= k {
        let sticky = BigFloat {
            negative: small_neg,
            mant: BigUint::one(),
            lsb: k - 1,
        };
        let big = BigFloat {
            negative: big_neg,
            ..big.clone()
        };
        return add_signed(&big, &sticky, false).round(p, rm);
    }
    add_signed(a, b, negate_b).round(p, rm)
}

/// Rounds `(-1)^negative * (mant + s) * 2^lsb` where `s` is in `(0, 1)` when
/// `sticky` is set and 0 otherwise.
fn round_parts(
    negative: bool,
    mant: BigUint,
    lsb: i64,
    sticky: bool,
    p: Precision,
    rm: RoundingMode,
) -> Rounded {
    if mant.is_zero() {
        debug_assert!(!sticky, "sticky residue without significand");
        return Rounded::exact(BigFloat::zero());
    }
    let bits = mant.bits();
    let p64 = p.bits() as u64;
    if bits <= p64 && !sticky {
        return Rounded::exact(BigFloat::from_parts(negative, mant, lsb));
    }
    debug_assert!(!sticky || bits >= p64 + 2, "sticky bit must lie below the guard bit");
    let shift = bits - p64;
    let tz = mant.trailing_zeros().unwrap_or(0);
    let guard = mant.bit(shift - 1);
    let below_guard = tz < shift - 1 || sticky;
    let inexact = tz < shift || sticky;
    let mut kept = mant >> shift as usize;
    let up = inexact
        && match rm {
            RoundingMode::TowardPositive => !negative,
            RoundingMode::TowardNegative => negative,
            RoundingMode::AwayFromZero => true,
            RoundingMode::ToNearest => guard && (below_guard || kept.bit(0)),
        };
    if up {
        kept += 1u32;
    }
    let ulp = lsb + shift as i64;
    let error_log2 = if !inexact {
        None
    } else if rm == RoundingMode::ToNearest {
        Some(ulp - 1)
    } else {
        Some(ulp)
    };
    Rounded {
        value: BigFloat::from_parts(negative, kept, ulp),
        error_log2,
    }
}

impl Default for BigFloat {
    fn default() -> Self {
        Self::zero()
    }
}

impl std::ops::Neg for &BigFloat {
    type Output = BigFloat;

    fn neg(self) -> BigFloat {
        if self.is_zero() {
            return BigFloat::zero();
        }
        BigFloat {
            negative: !self.negative,
            ..self.clone()
        }
    }
}

impl std::ops::Neg for BigFloat {
    type Output = BigFloat;

    fn neg(self) -> BigFloat {
        -&self
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.signum(), other.signum()) {
            (a, b) if a != b => a.cmp(&b),
            (0, _) => Ordering::Equal,
            (1, _) => self.cmp_abs(other),
            _ => other.cmp_abs(self),
        }
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let sign = if self.negative { "-" } else { "" };
        if self.mant.bits() <= 64 {
            return write!(f, "{sign}{}*2^{}", self.mant, self.lsb);
        }
        let approx = self.to_f64(RoundingMode::ToNearest);
        if approx.is_finite() && approx != 0.0 {
            write!(f, "{approx:e} [{} bits]", self.mant.bits())
        } else {
            write!(f, "{sign}~2^{} [{} bits]", self.lsb + self.mant.bits() as i64, self.mant.bits())
        }
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64(RoundingMode::ToNearest))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn bf(v: f64) -> BigFloat {
        BigFloat::from_f64(v).unwrap()
    }

    fn rational(x: &BigFloat) -> BigRational {
        let m = BigInt::from_biguint(
            if x.negative { Sign::Minus } else { Sign::Plus },
            x.mant.clone(),
        );
        let two = BigRational::from_integer(BigInt::from(2));
        let mut r = BigRational::from_integer(m);
        if x.lsb >= 0 {
            for _ in 0..x.lsb {
                r *= &two;
            }
        } else {
            for _ in 0..(-x.lsb) {
                r /= &two;
            }
        }
        r
    }

    fn pow2_rational(e: i64) -> BigRational {
        rational(&BigFloat::pow2(e))
    }

    #[test]
    fn exact_addition_reports_no_error() {
        let r = bf(1.0).add(&bf(1.0), p(10), RoundingMode::ToNearest);
        assert_eq!(r.value, bf(2.0));
        assert!(r.is_exact());
    }

    #[test]
    fn one_third_rounded_up_to_four_bits() {
        // Long division oracle: 1/3 = 0.0101 0101...b; four significant bits
        // rounded toward +inf give 0.01011b = 0.34375.
        let r = bf(1.0)
            .div(&bf(3.0), p(4), RoundingMode::TowardPositive)
            .unwrap();
        assert_eq!(r.value, bf(0.34375));
        let e = r.error_log2.unwrap();
        assert!(e <= -5);
        let err = rational(&r.value) - BigRational::new(1.into(), 3.into());
        assert!(err > BigRational::from_integer(0.into()));
        assert!(err <= pow2_rational(e));
    }

    #[test]
    fn perfect_square_root_is_exact() {
        let r = bf(4.0).sqrt(p(8), RoundingMode::ToNearest).unwrap();
        assert_eq!(r.value, bf(2.0));
        assert!(r.is_exact());
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            bf(1.0).div(&BigFloat::zero(), p(8), RoundingMode::ToNearest),
            Err(Error::DivisionByZero)
        );
        assert_eq!(
            bf(-4.0).sqrt(p(8), RoundingMode::ToNearest),
            Err(Error::NegativeEvenRoot)
        );
        let cube = bf(-8.0).root(3, p(8), RoundingMode::ToNearest).unwrap();
        assert_eq!(cube.value, bf(-2.0));
        assert!(Precision::new(1).is_err());
        assert_eq!(BigFloat::zero().ceil_log2_exact(), Err(Error::LogOfZero));
    }

    #[test]
    fn log2_variants() {
        assert_eq!(bf(3.0).ceil_log2_inexact(), Ok(2));
        assert_eq!(bf(16.0).ceil_log2_inexact(), Ok(5));
        assert_eq!(bf(0.5).ceil_log2_inexact(), Ok(0));
        assert_eq!(bf(16.0).ceil_log2_exact(), Ok(4));
        assert_eq!(bf(3.0).ceil_log2_exact(), Ok(2));
        assert_eq!(bf(0.75).ceil_log2_exact(), Ok(0));
        assert_eq!(bf(16.0).floor_log2(), Ok(4));
        assert_eq!(bf(3.0).floor_log2(), Ok(1));
        assert_eq!(bf(0.75).floor_log2(), Ok(-1));
    }

    #[test]
    fn rational_bracketing_of_three_quarters() {
        // 2^-1 < 3/4 <= 2^0, so ceil is 0 and floor is -1.
        let x = BigRational::new(3.into(), 4.into());
        assert!(pow2_rational(-1) < x && x <= pow2_rational(0));
        assert!(pow2_rational(-1) <= x && x < pow2_rational(0));
    }

    #[test]
    fn far_apart_sum_rounds_like_the_full_sum() {
        let big = bf(1.0);
        let tiny = BigFloat::pow2(-5000);
        let prec = p(53);
        let up = big.add(&tiny, prec, RoundingMode::TowardPositive);
        assert_eq!(up.value, bf(1.0 + f64::EPSILON));
        let down = big.sub(&tiny, prec, RoundingMode::TowardNegative);
        assert_eq!(down.value, bf(1.0 - f64::EPSILON / 2.0));
        let near = big.sub(&tiny, prec, RoundingMode::ToNearest);
        assert_eq!(near.value, bf(1.0));
        assert!(!near.is_exact());
    }

    #[test]
    fn f64_interval_contains_value() {
        let third = bf(1.0).div(&bf(3.0), p(200), RoundingMode::ToNearest).unwrap().value;
        let (lo, hi) = third.to_f64_interval();
        assert!(lo < hi);
        assert!(bf(lo) <= third && third <= bf(hi));
        assert_eq!(bf(0.25).to_f64_interval(), (0.25, 0.25));
    }

    #[test]
    fn isqrt_matches_reference() {
        let n = BigUint::from(3u32).pow(400u32) + 12345u32;
        assert_eq!(isqrt(&n), n.sqrt());
        let sq = BigUint::from(7u32).pow(300u32);
        assert_eq!(isqrt(&(&sq * &sq)), sq);
    }

    fn arb_bigfloat() -> impl Strategy<Value = BigFloat> {
        (any::<bool>(), 1u64..u64::MAX, 0u32..3, -200i64..200).prop_map(|(neg, m, extra, e)| {
            let mant = BigUint::from(m).pow(extra + 1);
            BigFloat::from_parts(neg, mant, e)
        })
    }

    fn check_bracket(exact: &BigRational, prec: u32, op: impl Fn(RoundingMode) -> Rounded) {
        let up = op(RoundingMode::TowardPositive);
        let down = op(RoundingMode::TowardNegative);
        let near = op(RoundingMode::ToNearest);
        assert!(rational(&up.value) >= *exact);
        assert!(rational(&down.value) <= *exact);
        for r in [&up, &down, &near] {
            assert!(r.value.precision_bits() <= prec as u64);
            match r.error_log2 {
                None => assert_eq!(rational(&r.value), *exact),
                Some(e) => {
                    let err = (rational(&r.value) - exact).abs();
                    assert!(err <= pow2_rational(e));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn directed_rounding_brackets_exact_results(
            a in arb_bigfloat(),
            b in arb_bigfloat(),
            prec in 2u32..120,
        ) {
            let pr = p(prec);
            let (ra, rb) = (rational(&a), rational(&b));
            check_bracket(&(&ra + &rb), prec, |rm| a.add(&b, pr, rm));
            check_bracket(&(&ra - &rb), prec, |rm| a.sub(&b, pr, rm));
            check_bracket(&(&ra * &rb), prec, |rm| a.mul(&b, pr, rm));
            check_bracket(&(&ra / &rb), prec, |rm| a.div(&b, pr, rm).unwrap());
        }

        #[test]
        fn roots_bracket_exact_results(a in arb_bigfloat(), prec in 2u32..120, k in 2u32..5) {
            let a = if k % 2 == 0 { a.abs() } else { a };
            let up = a.root(k, p(prec), RoundingMode::TowardPositive).unwrap().value;
            let down = a.root(k, p(prec), RoundingMode::TowardNegative).unwrap().value;
            let pow = |x: &BigFloat| (1..k).fold(x.clone(), |acc, _| acc.mul_exact(x));
            prop_assert!(pow(&down) <= a);
            prop_assert!(pow(&up) >= a);
        }

        #[test]
        fn log2_variants_bracket(a in arb_bigfloat()) {
            let x = rational(&a.abs());
            let ce = a.ceil_log2_exact().unwrap();
            let ci = a.ceil_log2_inexact().unwrap();
            let fl = a.floor_log2().unwrap();
            prop_assert!(pow2_rational(ce - 1) < x && x <= pow2_rational(ce));
            prop_assert!(pow2_rational(fl) <= x && x < pow2_rational(fl + 1));
            prop_assert!(ce <= ci && ci <= ce + 1);
            prop_assert_eq!(ci == ce + 1, a.is_power_of_two());
            let (lo, hi) = a.log2_bounds().unwrap();
            prop_assert!(lo <= hi);
            prop_assert!(lo <= ce as f64 && hi >= (ce - 1) as f64);
        }

        #[test]
        fn ordering_matches_rationals(a in arb_bigfloat(), b in arb_bigfloat()) {
            prop_assert_eq!(a.cmp(&b), rational(&a).cmp(&rational(&b)));
        }
    }
}
