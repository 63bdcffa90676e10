//! Expression DAG: shared nodes, per-node cached state, collapse and
//! instrumentation.

use std::cell::{Cell, Ref, RefCell, RefMut};
use std::collections::HashSet;
use std::fmt;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::bigfloat::BigFloat;
use crate::error::{Error, Result};
use crate::errorbound::ErrorRep;
use crate::fpu;

static TIMESTAMP: AtomicU64 = AtomicU64::new(1);

/// Process-wide invalidation counter for cached separation bounds.
pub struct Timestamp;

impl Timestamp {
    pub fn current() -> u64 {
        TIMESTAMP.load(Ordering::SeqCst)
    }

    /// Invalidates every previously issued stamp.
    pub fn advance() -> u64 {
        TIMESTAMP.fetch_add(1, Ordering::SeqCst) + 1
    }
}

#[derive(Clone)]
pub enum NodeKind {
    Leaf(BigFloat),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    /// `k`-th root; square roots use `k = 2`.
    Root(Expr, u32),
}

impl NodeKind {
    pub fn children(&self) -> Vec<Expr> {
        match self {
            NodeKind::Leaf(_) => Vec::new(),
            NodeKind::Neg(x) | NodeKind::Root(x, _) => vec![x.clone()],
            NodeKind::Add(x, y) | NodeKind::Sub(x, y) | NodeKind::Mul(x, y) | NodeKind::Div(x, y) => {
                vec![x.clone(), y.clone()]
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Leaf(_) => "leaf",
            NodeKind::Neg(_) => "neg",
            NodeKind::Add(..) => "add",
            NodeKind::Sub(..) => "sub",
            NodeKind::Mul(..) => "mul",
            NodeKind::Div(..) => "div",
            NodeKind::Root(_, 2) => "sqrt",
            NodeKind::Root(..) => "root",
        }
    }
}

/// Closed interval of machine floats enclosing a node's value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const FULL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    fn new(lo: f64, hi: f64) -> Interval {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            Interval::FULL
        } else {
            Interval { lo, hi }
        }
    }

    pub fn point(v: &BigFloat) -> Interval {
        let (lo, hi) = v.to_f64_interval();
        Interval::new(lo, hi)
    }

    fn contains_zero(self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    fn add(self, o: Interval) -> Interval {
        Interval::new(fpu::add_down(self.lo, o.lo), fpu::add_up(self.hi, o.hi))
    }

    fn sub(self, o: Interval) -> Interval {
        Interval::new(fpu::sub_down(self.lo, o.hi), fpu::sub_up(self.hi, o.lo))
    }

    fn mul(self, o: Interval) -> Interval {
        let pairs = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in pairs {
            let (d, u) = (fpu::mul_down(a, b), fpu::mul_up(a, b));
            if d.is_nan() || u.is_nan() {
                // 0 * inf: the enclosure is lost.
                return Interval::FULL;
            }
            lo = lo.min(d);
            hi = hi.max(u);
        }
        Interval::new(lo, hi)
    }

    fn div(self, o: Interval) -> Interval {
        if o.contains_zero() {
            return Interval::FULL;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in [self.lo, self.hi] {
            for b in [o.lo, o.hi] {
                let (d, u) = (fpu::div_down(a, b), fpu::div_up(a, b));
                if d.is_nan() || u.is_nan() {
                    return Interval::FULL;
                }
                lo = lo.min(d);
                hi = hi.max(u);
            }
        }
        Interval::new(lo, hi)
    }

    fn root(self, k: u32) -> Interval {
        if k.is_multiple_of(2) && self.hi < 0.0 {
            return Interval::FULL;
        }
        if k == 2 {
            return Interval::new(fpu::sqrt_down(self.lo.max(0.0)), fpu::sqrt_up(self.hi));
        }
        let lo = if k.is_multiple_of(2) { self.lo.max(0.0) } else { self.lo };
        Interval::new(root_down(lo, k), root_up(self.hi, k))
    }
}

// powf is not correctly rounded; widen by a few ulps in the safe direction.
fn root_f64(v: f64, k: u32) -> f64 {
    let r = v.abs().powf(1.0 / k as f64);
    if v < 0.0 {
        -r
    } else {
        r
    }
}

fn root_up(v: f64, k: u32) -> f64 {
    if v.is_infinite() || v == 0.0 {
        return v;
    }
    let mut r = root_f64(v, k);
    for _ in 0..8 {
        r = r.next_up();
    }
    r
}

fn root_down(v: f64, k: u32) -> f64 {
    if v.is_infinite() || v == 0.0 {
        return v;
    }
    let mut r = root_f64(v, k);
    for _ in 0..8 {
        r = r.next_down();
    }
    r
}

pub struct Node {
    pub(crate) kind: NodeKind,
    pub(crate) approx: Option<BigFloat>,
    pub(crate) error: Option<ErrorRep>,
    pub(crate) filter: Interval,
    pub(crate) sep_cache: Option<(i64, u64)>,
    pub(crate) init_done: bool,
}

/// Shared handle to a DAG node. Cloning shares the node.
#[derive(Clone)]
pub struct Expr(Rc<RefCell<Node>>);

impl Expr {
    /// Leaf holding an exact value.
    pub fn leaf(v: BigFloat) -> Expr {
        let filter = Interval::point(&v);
        Expr(Rc::new(RefCell::new(Node {
            kind: NodeKind::Leaf(v.clone()),
            approx: Some(v),
            error: Some(ErrorRep::Exact),
            filter,
            sep_cache: None,
            init_done: true,
        })))
    }

    /// Inner node over existing handles; the filter is computed immediately.
    pub fn node(kind: NodeKind) -> Result<Expr> {
        let f = |e: &Expr| e.filter();
        let filter = match &kind {
            NodeKind::Leaf(v) => return Ok(Expr::leaf(v.clone())),
            NodeKind::Neg(x) => f(x).neg(),
            NodeKind::Add(x, y) => f(x).add(f(y)),
            NodeKind::Sub(x, y) => f(x).sub(f(y)),
            NodeKind::Mul(x, y) => f(x).mul(f(y)),
            NodeKind::Div(x, y) => f(x).div(f(y)),
            NodeKind::Root(x, k) => {
                if *k < 2 {
                    return Err(Error::InvalidRootIndex(*k));
                }
                f(x).root(*k)
            }
        };
        Ok(Expr(Rc::new(RefCell::new(Node {
            kind,
            approx: None,
            error: None,
            filter,
            sep_cache: None,
            init_done: false,
        }))))
    }

    pub(crate) fn borrow(&self) -> Ref<'_, Node> {
        self.0.borrow()
    }

    pub(crate) fn borrow_mut(&self) -> RefMut<'_, Node> {
        self.0.borrow_mut()
    }

    pub(crate) fn id(&self) -> usize {
        Rc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }

    pub fn filter(&self) -> Interval {
        self.0.borrow().filter
    }

    pub fn kind(&self) -> NodeKind {
        self.0.borrow().kind.clone()
    }

    pub fn children(&self) -> Vec<Expr> {
        self.0.borrow().kind.children()
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.0.borrow().kind, NodeKind::Leaf(_))
    }

    pub fn approx(&self) -> Option<BigFloat> {
        self.0.borrow().approx.clone()
    }

    pub fn error(&self) -> Option<ErrorRep> {
        self.0.borrow().error.clone()
    }

    pub fn is_initialized(&self) -> bool {
        self.0.borrow().init_done
    }

    pub fn cached_sep(&self) -> Option<(i64, u64)> {
        self.0.borrow().sep_cache
    }

    /// Distinct nodes reachable from this handle, including itself.
    pub fn node_count(&self) -> usize {
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if seen.insert(e.id()) {
                stack.extend(e.children());
            }
        }
        seen.len()
    }

    /// Replaces the subgraph by a leaf holding its exact approximation.
    pub fn collapse(&self, counters: &Counters) -> Result<()> {
        let mut node = self.0.borrow_mut();
        if !matches!(node.error, Some(ErrorRep::Exact)) {
            return Err(Error::Usage("collapse requires an exact approximation"));
        }
        let v = node
            .approx
            .clone()
            .ok_or(Error::Usage("collapse requires an approximation"))?;
        if let NodeKind::Leaf(_) = node.kind {
            return Ok(());
        }
        node.filter = Interval::point(&v);
        node.kind = NodeKind::Leaf(v);
        node.init_done = true;
        node.sep_cache = None;
        drop(node);
        Timestamp::advance();
        counters.collapses.set(counters.collapses.get() + 1);
        Ok(())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let node = self.0.borrow();
        match &node.kind {
            NodeKind::Leaf(v) => write!(f, "{v}"),
            NodeKind::Neg(x) => write!(f, "-({x:?})"),
            NodeKind::Add(x, y) => write!(f, "({x:?} + {y:?})"),
            NodeKind::Sub(x, y) => write!(f, "({x:?} - {y:?})"),
            NodeKind::Mul(x, y) => write!(f, "({x:?} * {y:?})"),
            NodeKind::Div(x, y) => write!(f, "({x:?} / {y:?})"),
            NodeKind::Root(x, k) => write!(f, "root{k}({x:?})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterSign {
    Negative,
    Positive,
    Unknown,
}

pub fn filter_sign(e: &Expr) -> FilterSign {
    let i = e.filter();
    if i.hi < 0.0 {
        FilterSign::Negative
    } else if i.lo > 0.0 {
        FilterSign::Positive
    } else {
        FilterSign::Unknown
    }
}

/// Instrumentation for one evaluation context.
#[derive(Default, Debug)]
pub struct Counters {
    pub node_recomputations: Cell<u64>,
    pub sepbound_computations: Cell<u64>,
    pub sepbound_nodes_traversed: Cell<u64>,
    pub bigfloat_ops: Cell<u64>,
    pub collapses: Cell<u64>,
    pub max_precision_bits: Cell<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CounterSnapshot {
    pub node_recomputations: u64,
    pub sepbound_computations: u64,
    pub sepbound_nodes_traversed: u64,
    pub bigfloat_ops: u64,
    pub collapses: u64,
    pub max_precision_bits: u64,
}

impl Counters {
    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            node_recomputations: self.node_recomputations.get(),
            sepbound_computations: self.sepbound_computations.get(),
            sepbound_nodes_traversed: self.sepbound_nodes_traversed.get(),
            bigfloat_ops: self.bigfloat_ops.get(),
            collapses: self.collapses.get(),
            max_precision_bits: self.max_precision_bits.get(),
        }
    }

    pub fn reset(&self) {
        for c in [
            &self.node_recomputations,
            &self.sepbound_computations,
            &self.sepbound_nodes_traversed,
            &self.bigfloat_ops,
            &self.collapses,
            &self.max_precision_bits,
        ] {
            c.set(0);
        }
    }

    pub(crate) fn bump(c: &Cell<u64>, by: u64) {
        c.set(c.get().saturating_add(by));
    }

    pub(crate) fn note_precision(&self, bits: u64) {
        if bits > self.max_precision_bits.get() {
            self.max_precision_bits.set(bits);
        }
    }
}
