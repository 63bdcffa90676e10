//! Accuracy-driven evaluation.
//!
//! Nodes are first approximated bottom-up at a small fixed precision. Sign
//! decisions then request absolute accuracies `2^q` top-down with `q`
//! shrinking geometrically, until zero leaves the error interval or the
//! separation bound proves the value zero.

use crate::bigfloat::{BigFloat, Precision, Rounded, RoundingMode};
use crate::dag::{filter_sign, Counters, Expr, FilterSign, NodeKind, Timestamp};
use crate::error::{Error, Result};
use crate::errorbound::{ErrorRep, RepKind};
use crate::sepbound;

/// Leaf-only subgraphs are evaluated without rounding while results stay
/// below this many significand bits.
pub const EXACT_BITS_LIMIT: u64 = 1 << 14;

const RED_ZONE: usize = 128 * 1024;
const STACK_CHUNK: usize = 4 * 1024 * 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StrategyConfig {
    /// Carrier of the per-node stored error.
    pub store_rep: RepKind,
    /// Carrier used during bottom-up initialization.
    pub init_rep: RepKind,
    pub sep_cache: bool,
    pub exact_ceil_log2: bool,
    pub q0: i64,
    pub growth: i64,
    pub init_precision_bits: u32,
}

impl StrategyConfig {
    fn with_rep(rep: RepKind) -> Self {
        StrategyConfig {
            store_rep: rep,
            init_rep: rep,
            sep_cache: false,
            exact_ceil_log2: false,
            q0: -26,
            growth: 2,
            init_precision_bits: 53,
        }
    }

    pub fn def() -> Self {
        Self::with_rep(RepKind::Direct)
    }

    pub fn lgi() -> Self {
        Self::with_rep(RepKind::LogInt)
    }

    pub fn lgd() -> Self {
        Self::with_rep(RepKind::LogFloat)
    }

    pub fn by_label(label: &str) -> Option<Self> {
        match label {
            "def" => Some(Self::def()),
            "lgi" => Some(Self::lgi()),
            "lgd" => Some(Self::lgd()),
            _ => None,
        }
    }

    pub fn with_sep_cache(mut self, on: bool) -> Self {
        self.sep_cache = on;
        self
    }

    pub fn with_exact_ceil_log2(mut self, on: bool) -> Self {
        self.exact_ceil_log2 = on;
        self
    }

    pub fn label(&self) -> &'static str {
        match self.store_rep {
            RepKind::Direct => "def",
            RepKind::LogInt => "lgi",
            RepKind::LogFloat => "lgd",
        }
    }

    /// The twelve combinations of strategy, cache and `ceil_log2` variant.
    pub fn matrix() -> Vec<StrategyConfig> {
        let mut out = Vec::with_capacity(12);
        for base in [Self::def(), Self::lgi(), Self::lgd()] {
            for cache in [false, true] {
                for exact in [false, true] {
                    out.push(base.with_sep_cache(cache).with_exact_ceil_log2(exact));
                }
            }
        }
        out
    }
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self::def()
    }
}

/// Strategy plus instrumentation for one family of expressions.
#[derive(Debug, Default)]
pub struct Context {
    pub config: StrategyConfig,
    pub counters: Counters,
}

impl Context {
    pub fn new(config: StrategyConfig) -> Self {
        Context {
            config,
            counters: Counters::default(),
        }
    }

    fn ceil_log2(&self, v: &BigFloat) -> Result<i64> {
        if self.config.exact_ceil_log2 {
            v.ceil_log2_exact()
        } else {
            v.ceil_log2_inexact()
        }
    }

    fn count_op(&self, p: Precision) {
        Counters::bump(&self.counters.bigfloat_ops, 1);
        self.counters.note_precision(p.bits() as u64);
    }
}

fn state(e: &Expr) -> (BigFloat, ErrorRep) {
    let n = e.borrow();
    (
        n.approx.clone().expect("initialized node"),
        n.error.clone().expect("initialized node"),
    )
}

fn store(e: &Expr, approx: BigFloat, error: ErrorRep) {
    let mut n = e.borrow_mut();
    n.approx = Some(approx);
    n.error = Some(error);
    n.init_done = true;
}

fn declare_zero(ctx: &Context, e: &Expr) -> Result<()> {
    store(e, BigFloat::zero(), ErrorRep::Exact);
    e.collapse(&ctx.counters)
}

fn ceil_half(a: i64) -> i64 {
    -((-a).div_euclid(2))
}

/// Precision making the round-to-nearest error of a result below `2^b`
/// at most `2^t`.
fn precision_for(b: i64, t: i64) -> Precision {
    Precision::saturating(b.saturating_sub(t).max(2))
}

fn exponent(v: &BigFloat) -> i64 {
    v.exponent().unwrap_or(i64::MIN / 4)
}

/// Computes an approximation and error for every node below `e` that has
/// none yet.
pub fn init_bottom_up(ctx: &Context, e: &Expr) -> Result<()> {
    if e.is_initialized() {
        return Ok(());
    }
    stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || init_node(ctx, e))
}

fn init_node(ctx: &Context, e: &Expr) -> Result<()> {
    let kind = e.kind();
    for c in kind.children() {
        init_bottom_up(ctx, &c)?;
    }
    if e.is_initialized() {
        return Ok(());
    }
    let cfg = &ctx.config;
    let p = Precision::saturating(cfg.init_precision_bits as i64);
    let rm = RoundingMode::ToNearest;
    let rep = cfg.init_rep;
    let get = |x: &Expr| {
        let (a, err) = state(x);
        (a, err.convert(rep, cfg.exact_ceil_log2))
    };
    let rounding = |r: &Rounded| ErrorRep::from_rounding(rep, r.error_log2);

    let (approx, error) = match &kind {
        NodeKind::Leaf(v) => (v.clone(), ErrorRep::Exact),
        NodeKind::Neg(x) => {
            let (a, ex) = get(x);
            (-a, ex)
        }
        NodeKind::Add(x, y) | NodeKind::Sub(x, y) => {
            let (a, ex) = get(x);
            let (b, ey) = get(y);
            let sub = matches!(kind, NodeKind::Sub(..));
            if ex.is_exact() && ey.is_exact() && a.exact_sum_bits(&b) <= EXACT_BITS_LIMIT {
                ctx.count_op(p);
                let v = if sub { a.sub_exact(&b) } else { a.add_exact(&b) };
                (v, ErrorRep::Exact)
            } else {
                ctx.count_op(p);
                let r = if sub { a.sub(&b, p, rm) } else { a.add(&b, p, rm) };
                let err = ex.combine3(&ey, &rounding(&r))?;
                (r.value, err)
            }
        }
        NodeKind::Mul(x, y) => {
            let (a, ex) = get(x);
            let (b, ey) = get(y);
            if (a.is_zero() && ex.is_exact()) || (b.is_zero() && ey.is_exact()) {
                (BigFloat::zero(), ErrorRep::Exact)
            } else if ex.is_exact()
                && ey.is_exact()
                && a.precision_bits() + b.precision_bits() <= EXACT_BITS_LIMIT
            {
                ctx.count_op(p);
                (a.mul_exact(&b), ErrorRep::Exact)
            } else {
                ctx.count_op(p);
                let r = a.mul(&b, p, rm);
                let err = ErrorRep::combine_all([
                    &ey.scale_by(&a, cfg.exact_ceil_log2)?,
                    &ex.scale_by(&b, cfg.exact_ceil_log2)?,
                    &ex.mul(&ey)?,
                    &rounding(&r),
                ])?;
                (r.value, err)
            }
        }
        NodeKind::Div(x, y) => {
            if ensure_nonzero(ctx, y)? == 0 {
                return Err(Error::DivisionByZero);
            }
            let ly = lower_bound(ctx, y)?;
            let (a, ex) = get(x);
            let (b, ey) = get(y);
            if a.is_zero() && ex.is_exact() {
                (BigFloat::zero(), ErrorRep::Exact)
            } else {
                ctx.count_op(p);
                let r = a.div(&b, p, rm)?;
                let err = ErrorRep::combine_all([
                    &ex.scale_pow2(-ly)?,
                    &ey.scale_by(&a, cfg.exact_ceil_log2)?
                        .scale_pow2(-2 * ly - 1)?,
                    &rounding(&r),
                ])?;
                (r.value, err)
            }
        }
        NodeKind::Root(x, k) => {
            let s = ensure_nonzero(ctx, x)?;
            if s < 0 && k % 2 == 0 {
                return Err(Error::NegativeEvenRoot);
            }
            if s == 0 {
                (BigFloat::zero(), ErrorRep::Exact)
            } else {
                let lx = lower_bound(ctx, x)?;
                let (a, ex) = get(x);
                ctx.count_op(p);
                let r = a.root(*k, p, rm)?;
                let shrink = (lx * (*k as i64 - 1)).div_euclid(*k as i64);
                let err = ex.scale_pow2(-shrink)?.combine(&rounding(&r))?;
                (r.value, err)
            }
        }
    };
    let exact = error.is_exact();
    store(e, approx, error);
    if exact {
        e.collapse(&ctx.counters)?;
    }
    Ok(())
}

/// Sign of an initialized node whose value must be separated from zero.
fn ensure_nonzero(ctx: &Context, e: &Expr) -> Result<i32> {
    let (a, err) = state(e);
    if !err.covers_zero(&a) {
        return Ok(a.signum());
    }
    sign(ctx, e)
}

/// `L` with `|val(e)| >= 2^L` and `|approx| >= 2^(L+1)`; `e` must be
/// known to be non-zero. Refines `e` as needed.
fn lower_bound(ctx: &Context, e: &Expr) -> Result<i64> {
    loop {
        let (a, err) = state(e);
        let q = if a.is_zero() {
            match err.log2_ceil(true) {
                Some(t) => t - 1,
                None => return Err(Error::DivisionByZero),
            }
        } else {
            let f = a.floor_log2()?;
            if err.leq_accuracy(f - 1) {
                return Ok(f - 1);
            }
            f - 1
        };
        request_accuracy(ctx, e, q)?;
    }
}

/// Upper bound `m` with `|val(e)| <= 2^m`; `None` if `e` is exactly zero.
fn magnitude_bound(ctx: &Context, e: &Expr) -> Result<Option<i64>> {
    let (a, err) = state(e);
    let c = if a.is_zero() {
        None
    } else {
        Some(ctx.ceil_log2(&a)?)
    };
    let t = err.log2_ceil(ctx.config.exact_ceil_log2);
    Ok(match (c, t) {
        (None, None) => None,
        (Some(c), None) => Some(c),
        (None, Some(t)) => Some(t),
        (Some(c), Some(t)) => Some(c.max(t) + 1),
    })
}

/// Whether the stored error of `e` already meets `2^q`.
fn accurate_enough(ctx: &Context, e: &Expr, q: i64) -> bool {
    let n = e.borrow();
    match &n.error {
        None => false,
        Some(ErrorRep::Direct(d)) if !ctx.config.exact_ceil_log2 => {
            // Compares through the stored exponent, which overestimates
            // powers of two by one.
            d.radius().is_zero() || d.radius().ceil_log2_inexact().map_or(true, |c| c <= q)
        }
        Some(err) => err.leq_accuracy(q),
    }
}

/// Ensures `|approx(e) - val(e)| <= 2^q`.
pub fn request_accuracy(ctx: &Context, e: &Expr, q: i64) -> Result<()> {
    init_bottom_up(ctx, e)?;
    if accurate_enough(ctx, e, q) {
        return Ok(());
    }
    stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || recompute(ctx, e, q))
}

fn recompute(ctx: &Context, e: &Expr, q: i64) -> Result<()> {
    let cfg = &ctx.config;
    let rm = RoundingMode::ToNearest;
    let kind = e.kind();
    let (approx, exact) = match &kind {
        NodeKind::Leaf(v) => (v.clone(), true),
        NodeKind::Neg(x) => {
            request_accuracy(ctx, x, q)?;
            let (a, ex) = state(x);
            (-a, ex.is_exact())
        }
        NodeKind::Add(x, y) | NodeKind::Sub(x, y) => {
            request_accuracy(ctx, x, q - 2)?;
            request_accuracy(ctx, y, q - 2)?;
            let (a, ex) = state(x);
            let (b, ey) = state(y);
            let sub = matches!(kind, NodeKind::Sub(..));
            let both_exact = ex.is_exact() && ey.is_exact();
            if both_exact && a.exact_sum_bits(&b) <= EXACT_BITS_LIMIT {
                let v = if sub { a.sub_exact(&b) } else { a.add_exact(&b) };
                ctx.count_op(Precision::saturating(v.precision_bits() as i64));
                (v, true)
            } else {
                let p = precision_for(exponent(&a).max(exponent(&b)) + 1, q - 2);
                ctx.count_op(p);
                let r = if sub { a.sub(&b, p, rm) } else { a.add(&b, p, rm) };
                (r.value, both_exact && r.error_log2.is_none())
            }
        }
        NodeKind::Mul(x, y) => {
            let (mx, my) = (magnitude_bound(ctx, x)?, magnitude_bound(ctx, y)?);
            match (mx, my) {
                (None, _) | (_, None) => (BigFloat::zero(), true),
                (Some(mx), Some(my)) => {
                    let floor = ceil_half(q - 2);
                    let (mx, my) = (mx.max(floor), my.max(floor));
                    request_accuracy(ctx, x, q - 2 - my)?;
                    request_accuracy(ctx, y, q - 2 - mx)?;
                    let (a, ex) = state(x);
                    let (b, ey) = state(y);
                    let both_exact = ex.is_exact() && ey.is_exact();
                    if a.is_zero() || b.is_zero() {
                        (BigFloat::zero(), both_exact)
                    } else if both_exact
                        && a.precision_bits() + b.precision_bits() <= EXACT_BITS_LIMIT
                    {
                        let v = a.mul_exact(&b);
                        ctx.count_op(Precision::saturating(v.precision_bits() as i64));
                        (v, true)
                    } else {
                        let p = precision_for(exponent(&a) + exponent(&b), q - 2);
                        ctx.count_op(p);
                        let r = a.mul(&b, p, rm);
                        (r.value, both_exact && r.error_log2.is_none())
                    }
                }
            }
        }
        NodeKind::Div(x, y) => {
            let ly = lower_bound(ctx, y)?;
            match magnitude_bound(ctx, x)? {
                None => (BigFloat::zero(), true),
                Some(mx) => {
                    let qx = q - 3 + ly;
                    let qy = (q - 3 - mx + 2 * ly).min(ly - 1);
                    request_accuracy(ctx, x, qx)?;
                    request_accuracy(ctx, y, qy)?;
                    let (a, ex) = state(x);
                    let (b, ey) = state(y);
                    let both_exact = ex.is_exact() && ey.is_exact();
                    if a.is_zero() {
                        (BigFloat::zero(), both_exact)
                    } else {
                        let p = precision_for(exponent(&a) - b.floor_log2()?, q - 2);
                        ctx.count_op(p);
                        let r = a.div(&b, p, rm)?;
                        (r.value, both_exact && r.error_log2.is_none())
                    }
                }
            }
        }
        NodeKind::Root(x, k) => {
            let k64 = *k as i64;
            let lx = lower_bound(ctx, x)?;
            let s = ((lx - 1) * (k64 - 1)).div_euclid(k64);
            request_accuracy(ctx, x, (q - 2 + s).min(lx - 1))?;
            let (a, ex) = state(x);
            let b = -((-exponent(&a)).div_euclid(k64));
            let p = precision_for(b, q - 2);
            ctx.count_op(p);
            let r = a.root(*k, p, rm)?;
            (r.value, ex.is_exact() && r.error_log2.is_none())
        }
    };
    Counters::bump(&ctx.counters.node_recomputations, 1);
    if exact {
        store(e, approx, ErrorRep::Exact);
        return e.collapse(&ctx.counters);
    }
    let error = ErrorRep::pow2(cfg.store_rep, q);
    let near_zero = error.covers_zero(&approx);
    store(e, approx, error.clone());
    if near_zero {
        let sep = sepbound::compute_sep(e, cfg.sep_cache, &ctx.counters);
        if error.leq_accuracy(sep.saturating_sub(1)) {
            declare_zero(ctx, e)?;
        }
    }
    Ok(())
}

/// Exact sign of `val(e)`.
pub fn sign(ctx: &Context, e: &Expr) -> Result<i32> {
    match filter_sign(e) {
        FilterSign::Positive => return Ok(1),
        FilterSign::Negative => return Ok(-1),
        FilterSign::Unknown => {}
    }
    init_bottom_up(ctx, e)?;
    let cfg = &ctx.config;
    let mut q = cfg.q0;
    let mut sep: Option<(i64, u64)> = None;
    loop {
        let (a, err) = state(e);
        if err.is_exact() || !err.covers_zero(&a) {
            return Ok(a.signum());
        }
        request_accuracy(ctx, e, q)?;
        let (a, err) = state(e);
        if err.is_exact() || !err.covers_zero(&a) {
            return Ok(a.signum());
        }
        let now = Timestamp::current();
        let s = match (sep, e.cached_sep()) {
            (Some((s, stamp)), _) if stamp == now => s,
            // Stored by the recomputation that just happened.
            (_, Some((s, stamp))) if stamp == now => s,
            _ => sepbound::compute_sep(e, cfg.sep_cache, &ctx.counters),
        };
        sep = Some((s, now));
        if err.leq_accuracy(s.saturating_sub(1)) {
            declare_zero(ctx, e)?;
            return Ok(0);
        }
        q = q.saturating_mul(cfg.growth).max(s.saturating_sub(1));
    }
}

/// Separation bound of `e` under the context's cache setting.
pub fn compute_sep(ctx: &Context, e: &Expr) -> i64 {
    sepbound::compute_sep(e, ctx.config.sep_cache, &ctx.counters)
}

/// Approximation of `val(e)` within `2^q` together with its error bound.
pub fn to_approx(ctx: &Context, e: &Expr, q: i64) -> Result<(BigFloat, ErrorRep)> {
    request_accuracy(ctx, e, q)?;
    Ok(state(e))
}
