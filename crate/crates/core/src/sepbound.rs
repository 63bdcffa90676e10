//! BFMSS separation bounds over the expression DAG, in log scale.
//!
//! For every node two parameters `u` and `l` (base-2 logarithms, rounded
//! upward) are derived bottom-up. With `D` the product of the indices of the
//! distinct radical nodes below the root, a non-zero value satisfies
//! `|val| >= 2^-(l + (D-1) u)`.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use crate::bigfloat::BigFloat;
use crate::dag::{Counters, Expr, NodeKind, Timestamp};
use crate::errorbound::{ErrorRep, LogFloatError};
use crate::fpu;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SepData {
    pub u_log: f64,
    pub l_log: f64,
}

impl SepData {
    /// Parameters of the value zero.
    pub const ZERO: SepData = SepData {
        u_log: f64::NEG_INFINITY,
        l_log: 0.0,
    };

    /// Used where no finite bound applies; leads to a useless (but valid)
    /// separation bound.
    const UNBOUNDED: SepData = SepData {
        u_log: f64::INFINITY,
        l_log: f64::INFINITY,
    };

    pub fn is_zero(&self) -> bool {
        self.u_log == f64::NEG_INFINITY
    }

    pub fn of_leaf(v: &BigFloat) -> SepData {
        if v.is_zero() {
            return SepData::ZERO;
        }
        let lsb = v.lsb_exponent();
        if lsb >= 0 {
            SepData { u_log: log2_up(v), l_log: 0.0 }
        } else {
            let m = BigFloat::from_parts(false, v.significand().clone(), 0);
            SepData {
                u_log: log2_up(&m),
                l_log: fpu::add_up(0.0, -(lsb as f64)),
            }
        }
    }
}

fn log2_up(v: &BigFloat) -> f64 {
    if v.is_power_of_two() {
        if let Ok(e) = v.floor_log2() {
            if e.unsigned_abs() < 1 << 53 {
                return e as f64;
            }
        }
    }
    v.log2_bounds().map_or(f64::INFINITY, |(_, hi)| hi)
}

fn log2_sum_up(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY || !a.is_finite() || !b.is_finite() {
        return a.max(b);
    }
    match ErrorRep::LogFloat(LogFloatError(a)).combine(&ErrorRep::LogFloat(LogFloatError(b))) {
        Ok(ErrorRep::LogFloat(c)) => c.0,
        _ => f64::INFINITY,
    }
}

/// One BFMSS step. `children` holds the operands' data in order; leaves
/// take their data from [`SepData::of_leaf`].
pub fn bfmss_step(kind: &NodeKind, children: &[SepData]) -> SepData {
    match kind {
        NodeKind::Leaf(v) => SepData::of_leaf(v),
        NodeKind::Neg(_) => children[0],
        NodeKind::Add(..) | NodeKind::Sub(..) => {
            let (a, b) = (children[0], children[1]);
            if a.is_zero() {
                return SepData { u_log: fpu::add_up(b.u_log, a.l_log), l_log: fpu::add_up(a.l_log, b.l_log) };
            }
            if b.is_zero() {
                return SepData { u_log: fpu::add_up(a.u_log, b.l_log), l_log: fpu::add_up(a.l_log, b.l_log) };
            }
            SepData {
                u_log: log2_sum_up(fpu::add_up(a.u_log, b.l_log), fpu::add_up(b.u_log, a.l_log)),
                l_log: fpu::add_up(a.l_log, b.l_log),
            }
        }
        NodeKind::Mul(..) => {
            let (a, b) = (children[0], children[1]);
            if a.is_zero() || b.is_zero() {
                return SepData::ZERO;
            }
            SepData {
                u_log: fpu::add_up(a.u_log, b.u_log),
                l_log: fpu::add_up(a.l_log, b.l_log),
            }
        }
        NodeKind::Div(..) => {
            let (a, b) = (children[0], children[1]);
            if b.is_zero() {
                return SepData::UNBOUNDED;
            }
            if a.is_zero() {
                return SepData::ZERO;
            }
            SepData {
                u_log: fpu::add_up(a.u_log, b.l_log),
                l_log: fpu::add_up(a.l_log, b.u_log),
            }
        }
        NodeKind::Root(_, k) => {
            let a = children[0];
            if a.is_zero() {
                return SepData::ZERO;
            }
            let k = *k as f64;
            let mix = |x: f64, y: f64| fpu::div_up(fpu::add_up(x, fpu::mul_up(k - 1.0, y)), k);
            if a.u_log >= a.l_log {
                SepData { u_log: mix(a.u_log, a.l_log), l_log: a.l_log }
            } else {
                SepData { u_log: a.u_log, l_log: mix(a.l_log, a.u_log) }
            }
        }
    }
}

/// `sep_log` from the root parameters and the degree bound `degree`.
pub fn sep_log_from(data: SepData, degree: f64) -> i64 {
    if data.is_zero() {
        return i64::MAX;
    }
    let t = if degree <= 1.0 {
        data.l_log
    } else {
        fpu::add_up(data.l_log, fpu::mul_up(degree - 1.0, data.u_log))
    };
    if t.is_nan() {
        return i64::MIN;
    }
    fpu::ceil_to_i64(t).saturating_neg().saturating_sub(1)
}

/// Result of one full traversal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Analysis {
    pub data: SepData,
    /// Product of root indices over distinct radical nodes (saturates to
    /// infinity).
    pub degree: f64,
    pub nodes: u64,
}

impl Analysis {
    pub fn sep_log(&self) -> i64 {
        sep_log_from(self.data, self.degree)
    }
}

/// Traverses the DAG below `root`, visiting each distinct node once.
pub fn analyze(root: &Expr) -> Analysis {
    let mut memo: HashMap<usize, SepData> = HashMap::new();
    let mut degree = 1.0f64;
    let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
    while let Some((e, expanded)) = stack.pop() {
        if memo.contains_key(&e.id()) {
            continue;
        }
        let kind = e.kind();
        let children = kind.children();
        if !expanded && children.iter().any(|c| !memo.contains_key(&c.id())) {
            stack.push((e, true));
            for c in children.into_iter().rev() {
                if !memo.contains_key(&c.id()) {
                    stack.push((c, false));
                }
            }
            continue;
        }
        let data: Vec<SepData> = children.iter().map(|c| memo[&c.id()]).collect();
        let d = bfmss_step(&kind, &data);
        if let Entry::Vacant(v) = memo.entry(e.id()) {
            v.insert(d);
            if let NodeKind::Root(_, k) = kind {
                degree = fpu::mul_up(degree, k as f64);
            }
        }
    }
    Analysis {
        data: memo[&root.id()],
        degree,
        nodes: memo.len() as u64,
    }
}

/// Separation bound of `e`: a non-zero value satisfies `|val| > 2^sep_log`.
///
/// With `use_cache`, a result stored under the current timestamp is reused
/// without traversal. Every traversal is counted and its result stored.
pub fn compute_sep(e: &Expr, use_cache: bool, counters: &Counters) -> i64 {
    let now = Timestamp::current();
    if use_cache {
        if let Some((sep, stamp)) = e.cached_sep() {
            if stamp == now {
                return sep;
            }
        }
    }
    let a = analyze(e);
    Counters::bump(&counters.sepbound_computations, 1);
    Counters::bump(&counters.sepbound_nodes_traversed, a.nodes);
    let sep = a.sep_log();
    e.borrow_mut().sep_cache = Some((sep, now));
    sep
}
