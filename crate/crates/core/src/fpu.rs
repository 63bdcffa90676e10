//! Directed rounding helpers for `f64`.
//!
//! The platform only offers round-to-nearest, so upward/downward results are
//! obtained from error-free transformations (sums and products) or by nudging
//! library results by a couple of ulps where no exact residual is available.

// Below this magnitude fma residuals may themselves be rounded.
const TINY: f64 = f64::MIN_POSITIVE * 9007199254740992.0;

/// Exact residual of `a + b` (Knuth's TwoSum): `a + b == s + err` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Smallest-possible `f64` that is `>= a + b`.
#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let (s, err) = two_sum(a, b);
    if !s.is_finite() {
        return s;
    }
    if err > 0.0 {
        s.next_up()
    } else {
        s
    }
}

/// Largest `f64` that is `<= a + b`.
#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let (s, err) = two_sum(a, b);
    if !s.is_finite() {
        return s;
    }
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

/// Upper bound of `a * b`, exact residual via fused multiply-add.
#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() || p == 0.0 && (a == 0.0 || b == 0.0) {
        return p;
    }
    let err = a.mul_add(b, -p);
    if err > 0.0 || p.abs() < TINY {
        p.next_up()
    } else {
        p
    }
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() || p == 0.0 && (a == 0.0 || b == 0.0) {
        return p;
    }
    let err = a.mul_add(b, -p);
    if err < 0.0 || p.abs() < TINY {
        p.next_down()
    } else {
        p
    }
}

/// Upper bound of `a / b` for `b != 0`.
#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return q;
    }
    // a - q*b exactly; its sign relative to b tells the rounding direction.
    let r = (-q).mul_add(b, a);
    if q.abs() < TINY || (r > 0.0) == (b > 0.0) && r != 0.0 {
        q.next_up()
    } else {
        q
    }
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return q;
    }
    let r = (-q).mul_add(b, a);
    if q.abs() < TINY || (r > 0.0) != (b > 0.0) && r != 0.0 {
        q.next_down()
    } else {
        q
    }
}

/// Upper bound of `sqrt(a)`; IEEE square root is correctly rounded.
#[inline]
pub fn sqrt_up(a: f64) -> f64 {
    let s = a.sqrt();
    if s.is_finite() && s.mul_add(s, -a) < 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub fn sqrt_down(a: f64) -> f64 {
    let s = a.sqrt();
    if s.is_finite() && s.mul_add(s, -a) > 0.0 {
        s.next_down()
    } else {
        s
    }
}

// libm log2/exp2 are faithful (error < 1 ulp); two ulps of slack covers that
// with margin.
#[inline]
pub fn log2_up(a: f64) -> f64 {
    let r = a.log2();
    if r.is_finite() {
        r.next_up().next_up()
    } else {
        r
    }
}

#[inline]
pub fn log2_down(a: f64) -> f64 {
    let r = a.log2();
    if r.is_finite() {
        r.next_down().next_down()
    } else {
        r
    }
}

#[inline]
pub fn exp2_up(a: f64) -> f64 {
    let r = a.exp2();
    if r.is_finite() {
        r.next_up().next_up()
    } else {
        r
    }
}

#[inline]
pub fn ceil_to_i64(a: f64) -> i64 {
    let c = a.ceil();
    if c >= i64::MAX as f64 {
        i64::MAX
    } else if c <= i64::MIN as f64 {
        i64::MIN
    } else {
        c as i64
    }
}
