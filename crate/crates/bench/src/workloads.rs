//! Benchmark workloads. Each returns its outcome; timing and counters are
//! collected by the caller.

use std::rc::Rc;

use lazy_real::{Context, Real, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Checks `F_n == (phi^n - phibar^n) / sqrt(5)` with the loop below.
pub fn fibonacci(ctx: &Rc<Context>, n: u64) -> Result<bool> {
    let int = |v| Real::int(ctx, v);
    let sqrt5 = int(5).sqrt();
    let phi = (int(1) + &sqrt5) / int(2);
    let phibar = (int(1) - &sqrt5) / int(2);

    let mut phi_n = phi.clone();
    let mut phibar_n = phibar.clone();
    let mut fib0 = int(0);
    let mut fib1 = int(1);

    for _ in 1..n {
        let tmp = fib1.clone();
        fib1 += &fib0;
        fib0 = tmp;
        phi_n *= &phi;
        phibar_n *= &phibar;
    }

    let res = int(1) / &sqrt5 * (phi_n - phibar_n);
    fib1.equals(&res)
}

/// `(sqrt(13) + sqrt(17))^(2^n)` by repeated squaring.
pub fn repeated_square(ctx: &Rc<Context>, n: u64) -> Real {
    let mut x = Real::int(ctx, 13).sqrt() + Real::int(ctx, 17).sqrt();
    for _ in 0..n {
        x = &x * &x;
    }
    x
}

/// Approximates the repeated square to `2^-q`.
pub fn square(ctx: &Rc<Context>, n: u64, q: i64) -> Result<()> {
    repeated_square(ctx, n).to_approx(-q)?;
    Ok(())
}

pub type Point = (i64, i64);

/// Grid coordinates enter the expressions as `v / 3`, so nothing is
/// decided by exact leaf arithmetic alone. Scaling does not change signs.
pub fn grid_real(ctx: &Rc<Context>, v: i64) -> Real {
    Real::ratio(ctx, v, 3)
}

fn real_point(ctx: &Rc<Context>, p: Point) -> (Real, Real) {
    (grid_real(ctx, p.0), grid_real(ctx, p.1))
}

pub fn orient_exact(a: Point, b: Point, c: Point) -> i32 {
    let d = (b.0 - a.0) as i128 * (c.1 - a.1) as i128 - (b.1 - a.1) as i128 * (c.0 - a.0) as i128;
    d.signum() as i32
}

fn orient_real(a: &(Real, Real), b: &(Real, Real), c: &(Real, Real)) -> Result<i32> {
    let d = (&b.0 - &a.0) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&c.0 - &a.0);
    d.sign()
}

pub fn incircle_exact(a: Point, b: Point, c: Point, d: Point) -> i32 {
    let row = |p: Point| {
        let x = (p.0 - d.0) as i128;
        let y = (p.1 - d.1) as i128;
        (x, y, x * x + y * y)
    };
    let (a, b, c) = (row(a), row(b), row(c));
    let det = a.0 * (b.1 * c.2 - b.2 * c.1) - a.1 * (b.0 * c.2 - b.2 * c.0)
        + a.2 * (b.0 * c.1 - b.1 * c.0);
    det.signum() as i32
}

fn incircle_real(pts: [&(Real, Real); 4]) -> Result<i32> {
    let d = pts[3];
    let row = |p: &(Real, Real)| {
        let x = &p.0 - &d.0;
        let y = &p.1 - &d.1;
        let n = &x * &x + &y * &y;
        (x, y, n)
    };
    let (a, b, c) = (row(pts[0]), row(pts[1]), row(pts[2]));
    let det = &a.0 * (&b.1 * &c.2 - &b.2 * &c.1) - &a.1 * (&b.0 * &c.2 - &b.2 * &c.0)
        + &a.2 * (&b.0 * &c.1 - &b.1 * &c.0);
    det.sign()
}

pub fn orient_sign(ctx: &Rc<Context>, [a, b, c]: [Point; 3]) -> Result<i32> {
    orient_real(&real_point(ctx, a), &real_point(ctx, b), &real_point(ctx, c))
}

pub fn incircle_sign(ctx: &Rc<Context>, pts: [Point; 4]) -> Result<i32> {
    let p = pts.map(|p| real_point(ctx, p));
    incircle_real([&p[0], &p[1], &p[2], &p[3]])
}

/// Orientation triples; even indices are exactly collinear, odd ones have
/// the last point moved by one grid unit.
pub fn orient_instances(n: u64, seed: u64) -> Vec<[Point; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let a = (rng.gen_range(-500..=500), rng.gen_range(-500..=500));
            let mut d = (0, 0);
            while d == (0, 0) {
                d = (rng.gen_range(-40..=40), rng.gen_range(-40..=40));
            }
            let s = rng.gen_range(1..=12);
            let t = rng.gen_range(-12..=12);
            let b = (a.0 + s * d.0, a.1 + s * d.1);
            let mut c = (a.0 + t * d.0, a.1 + t * d.1);
            if i % 2 == 1 {
                let units = [(1, 0), (-1, 0), (0, 1), (0, -1)];
                let e = loop {
                    let e: Point = units[rng.gen_range(0..4)];
                    if d.0 * e.1 - d.1 * e.0 != 0 {
                        break e;
                    }
                };
                c = (c.0 + e.0, c.1 + e.1);
            }
            [a, b, c]
        })
        .collect()
}

/// Integer vectors of squared length `r2`.
fn lattice_circle(r2: i64) -> Vec<Point> {
    let r = (r2 as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            if x * x + y * y == r2 {
                out.push((x, y));
            }
        }
    }
    out
}

/// Incircle quadruples; even indices are exactly cocircular, odd ones have
/// the last point moved by one grid unit.
pub fn incircle_instances(n: u64, seed: u64) -> Vec<[Point; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let circles: Vec<Vec<Point>> = [25, 65 * 65, 85 * 85, 125 * 125, 325]
        .iter()
        .map(|&r2| lattice_circle(r2))
        .collect();
    (0..n)
        .map(|i| {
            let center = (rng.gen_range(-300..=300), rng.gen_range(-300..=300));
            let circle = &circles[rng.gen_range(0..circles.len())];
            let mut pick: Vec<Point> = circle.choose_multiple(&mut rng, 4).copied().collect();
            for p in &mut pick {
                *p = (p.0 + center.0, p.1 + center.1);
            }
            if i % 2 == 1 {
                let p = &mut pick[3];
                match rng.gen_range(0..4) {
                    0 => p.0 += 1,
                    1 => p.0 -= 1,
                    2 => p.1 += 1,
                    _ => p.1 -= 1,
                }
            }
            [pick[0], pick[1], pick[2], pick[3]]
        })
        .collect()
}

/// Number of orientation signs that agree with the integer oracle.
pub fn orient(ctx: &Rc<Context>, n: u64, seed: u64) -> Result<u64> {
    let mut agree = 0;
    for [a, b, c] in orient_instances(n, seed) {
        let (ra, rb, rc) = (real_point(ctx, a), real_point(ctx, b), real_point(ctx, c));
        if orient_real(&ra, &rb, &rc)? == orient_exact(a, b, c) {
            agree += 1;
        }
    }
    Ok(agree)
}

/// Number of incircle signs that agree with the integer oracle.
pub fn incircle(ctx: &Rc<Context>, n: u64, seed: u64) -> Result<u64> {
    let mut agree = 0;
    for [a, b, c, d] in incircle_instances(n, seed) {
        let pts = [a, b, c, d].map(|p| real_point(ctx, p));
        let got = incircle_real([&pts[0], &pts[1], &pts[2], &pts[3]])?;
        if got == incircle_exact(a, b, c, d) {
            agree += 1;
        }
    }
    Ok(agree)
}

pub type Segment = (Point, Point);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Intersection {
    Disjoint,
    /// Interiors cross in a single point.
    Crossing,
    /// A single common point that is an endpoint of at least one segment.
    Touching,
    /// Collinear with a common piece of positive length.
    Overlapping,
}

/// Segment endpoints on a coarse lattice in `[0, 2^10]`, so collinear and
/// touching pairs are frequent.
pub fn segment_instances(n: u64, seed: u64) -> Vec<Segment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coord = |rng: &mut ChaCha8Rng| rng.gen_range(0..=8) * 128;
    (0..n)
        .map(|_| loop {
            let p = (coord(&mut rng), coord(&mut rng));
            let q = (coord(&mut rng), coord(&mut rng));
            if p != q {
                break (p, q);
            }
        })
        .collect()
}

/// Shared classification given the four orientation signs and a 1-D
/// comparison along the common line.
fn classify(o: [i32; 4], overlap: impl FnOnce() -> Result<i32>) -> Result<Intersection> {
    if o == [0; 4] {
        return Ok(match overlap()? {
            d if d > 0 => Intersection::Overlapping,
            0 => Intersection::Touching,
            _ => Intersection::Disjoint,
        });
    }
    if o[0] * o[1] > 0 || o[2] * o[3] > 0 {
        return Ok(Intersection::Disjoint);
    }
    if o.contains(&0) {
        Ok(Intersection::Touching)
    } else {
        Ok(Intersection::Crossing)
    }
}

pub fn intersect_exact(s: Segment, t: Segment) -> Intersection {
    let o = [
        orient_exact(s.0, s.1, t.0),
        orient_exact(s.0, s.1, t.1),
        orient_exact(t.0, t.1, s.0),
        orient_exact(t.0, t.1, s.1),
    ];
    classify(o, || {
        // Project onto the dominant axis of s.
        let axis = |p: Point| {
            if s.0 .0 != s.1 .0 {
                p.0
            } else {
                p.1
            }
        };
        let (a0, a1) = (axis(s.0).min(axis(s.1)), axis(s.0).max(axis(s.1)));
        let (b0, b1) = (axis(t.0).min(axis(t.1)), axis(t.0).max(axis(t.1)));
        Ok((a1.min(b1) - a0.max(b0)).signum() as i32)
    })
    .expect("integer classification")
}

struct RealSegment {
    p: (Real, Real),
    q: (Real, Real),
    /// Homogeneous line through both endpoints.
    line: (Real, Real, Real),
}

impl RealSegment {
    fn new(ctx: &Rc<Context>, s: Segment) -> RealSegment {
        let p = real_point(ctx, s.0);
        let q = real_point(ctx, s.1);
        let line = (&p.1 - &q.1, &q.0 - &p.0, &p.0 * &q.1 - &p.1 * &q.0);
        RealSegment { p, q, line }
    }
}

fn intersect_real(s: &RealSegment, t: &RealSegment, vertical: bool) -> Result<Intersection> {
    let o = [
        orient_real(&s.p, &s.q, &t.p)?,
        orient_real(&s.p, &s.q, &t.q)?,
        orient_real(&t.p, &t.q, &s.p)?,
        orient_real(&t.p, &t.q, &s.q)?,
    ];
    classify(o, || {
        let axis = |p: &(Real, Real)| if vertical { p.1.clone() } else { p.0.clone() };
        let (sp, sq, tp, tq) = (axis(&s.p), axis(&s.q), axis(&t.p), axis(&t.q));
        let ordered = |a: Real, b: Real| -> Result<(Real, Real)> {
            Ok(if a.compare(&b)?.is_le() { (a, b) } else { (b, a) })
        };
        let (a0, a1) = ordered(sp, sq)?;
        let (b0, b1) = ordered(tp, tq)?;
        let hi = if a1.compare(&b1)?.is_le() { a1 } else { b1 };
        let lo = if a0.compare(&b0)?.is_ge() { a0 } else { b0 };
        (hi - lo).sign()
    })
}

/// The intersection point `X = l1 x l2` lies on both lines: `l . X = 0`.
fn incidence_holds(s: &RealSegment, t: &RealSegment) -> Result<bool> {
    let (a, b) = (&s.line, &t.line);
    let x = &a.1 * &b.2 - &a.2 * &b.1;
    let y = &a.2 * &b.0 - &a.0 * &b.2;
    let w = &a.0 * &b.1 - &a.1 * &b.0;
    for l in [a, b] {
        let dot = &l.0 * &x + &l.1 * &y + &l.2 * &w;
        if dot.sign()? != 0 {
            return Ok(false);
        }
    }
    Ok(w.sign()? != 0)
}

/// Classifies one pair with reals; crossings must also pass the incidence
/// check, otherwise the result is an error-free `None`.
pub fn intersect(ctx: &Rc<Context>, s: Segment, t: Segment) -> Result<Option<Intersection>> {
    let (rs, rt) = (RealSegment::new(ctx, s), RealSegment::new(ctx, t));
    let got = intersect_real(&rs, &rt, s.0 .0 == s.1 .0)?;
    if got == Intersection::Crossing && !incidence_holds(&rs, &rt)? {
        return Ok(None);
    }
    Ok(Some(got))
}

/// Number of segment pairs whose classification (and, for crossings, the
/// incidence of the homogeneous intersection point) agrees with the
/// integer oracle.
pub fn segments(ctx: &Rc<Context>, n: u64, seed: u64) -> Result<u64> {
    let raw = segment_instances(n, seed);
    let segs: Vec<RealSegment> = raw.iter().map(|&s| RealSegment::new(ctx, s)).collect();
    let mut agree = 0;
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            let expected = intersect_exact(raw[i], raw[j]);
            let vertical = raw[i].0 .0 == raw[i].1 .0;
            let got = intersect_real(&segs[i], &segs[j], vertical)?;
            let point_ok = got != Intersection::Crossing || incidence_holds(&segs[i], &segs[j])?;
            if got == expected && point_ok {
                agree += 1;
            }
        }
    }
    Ok(agree)
}
