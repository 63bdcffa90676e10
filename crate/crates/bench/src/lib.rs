//! Instrumented benchmark runs over the `lazy-real` strategies.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use lazy_real::{CounterSnapshot, Real, StrategyConfig};
use serde::Serialize;

pub mod workloads;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchId {
    Fib,
    Square,
    Orient,
    Incircle,
    Segments,
}

impl BenchId {
    pub const ALL: [BenchId; 5] = [
        BenchId::Fib,
        BenchId::Square,
        BenchId::Orient,
        BenchId::Incircle,
        BenchId::Segments,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchId::Fib => "fib",
            BenchId::Square => "square",
            BenchId::Orient => "orient",
            BenchId::Incircle => "incircle",
            BenchId::Segments => "segments",
        }
    }

    pub fn default_n(self) -> u64 {
        match self {
            BenchId::Fib => 500,
            BenchId::Square => 10,
            BenchId::Orient | BenchId::Incircle => 200,
            BenchId::Segments => 60,
        }
    }

    fn min_n(self) -> u64 {
        match self {
            BenchId::Fib | BenchId::Segments => 2,
            BenchId::Square => 1,
            BenchId::Orient | BenchId::Incircle => 3,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BenchSpec {
    pub bench: BenchId,
    pub n: u64,
    /// Requested accuracy `2^-q` for the squaring benchmark.
    pub q: i64,
    pub seed: u64,
    pub reps: u32,
}

impl BenchSpec {
    pub fn new(bench: BenchId) -> Self {
        BenchSpec {
            bench,
            n: bench.default_n(),
            q: 5000,
            seed: 1,
            reps: 1,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n < self.bench.min_n() {
            return Err(format!(
                "--n must be at least {} for {}",
                self.bench.min_n(),
                self.bench.name()
            ));
        }
        if self.bench == BenchId::Square && self.n > 20 {
            return Err("--n must be at most 20 for square".into());
        }
        if self.q < 1 {
            return Err("--q must be positive".into());
        }
        if self.reps < 1 {
            return Err("--reps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Bool(bool),
    Count(u64),
    Error(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Bool(b) => write!(f, "{b}"),
            Outcome::Count(c) => write!(f, "{c}"),
            Outcome::Error(e) => write!(f, "error: {e}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub bench: BenchId,
    pub n: u64,
    pub config: StrategyConfig,
    pub reps: u32,
    pub mean_time_s: f64,
    pub counters: CounterSnapshot,
    pub outcome: Outcome,
    pub failed: bool,
}

/// Flat record written as one CSV row or JSON object.
#[derive(Serialize)]
pub struct Record {
    pub bench: &'static str,
    pub n: u64,
    pub strategy: &'static str,
    pub sep_cache: bool,
    pub exact_ceil_log2: bool,
    pub reps: u32,
    pub mean_time_s: f64,
    pub recomputations: u64,
    pub sepbound_computations: u64,
    pub sepbound_nodes: u64,
    pub bigfloat_ops: u64,
    pub max_precision: u64,
    pub outcome: String,
}

impl RunResult {
    pub fn record(&self) -> Record {
        let outcome = if self.failed {
            format!("FAILED({})", self.outcome)
        } else {
            self.outcome.to_string()
        };
        Record {
            bench: self.bench.name(),
            n: self.n,
            strategy: self.config.label(),
            sep_cache: self.config.sep_cache,
            exact_ceil_log2: self.config.exact_ceil_log2,
            reps: self.reps,
            mean_time_s: self.mean_time_s,
            recomputations: self.counters.node_recomputations,
            sepbound_computations: self.counters.sepbound_computations,
            sepbound_nodes: self.counters.sepbound_nodes_traversed,
            bigfloat_ops: self.counters.bigfloat_ops,
            max_precision: self.counters.max_precision_bits,
            outcome,
        }
    }
}

/// Expected outcome, if the benchmark has one.
fn expected(spec: &BenchSpec) -> Option<Outcome> {
    match spec.bench {
        BenchId::Fib => Some(Outcome::Bool(true)),
        BenchId::Square => None,
        BenchId::Orient | BenchId::Incircle => Some(Outcome::Count(spec.n)),
        BenchId::Segments => Some(Outcome::Count(spec.n * (spec.n - 1) / 2)),
    }
}

fn run_once(spec: &BenchSpec, config: StrategyConfig) -> (Outcome, CounterSnapshot) {
    let ctx = Real::context(config);
    let result = match spec.bench {
        BenchId::Fib => workloads::fibonacci(&ctx, spec.n).map(Outcome::Bool),
        BenchId::Square => workloads::square(&ctx, spec.n, spec.q)
            .map(|()| Outcome::Count(ctx.counters.node_recomputations.get())),
        BenchId::Orient => workloads::orient(&ctx, spec.n, spec.seed).map(Outcome::Count),
        BenchId::Incircle => workloads::incircle(&ctx, spec.n, spec.seed).map(Outcome::Count),
        BenchId::Segments => workloads::segments(&ctx, spec.n, spec.seed).map(Outcome::Count),
    };
    let outcome = result.unwrap_or_else(|e| Outcome::Error(e.to_string()));
    (outcome, ctx.counters.snapshot())
}

/// Runs `spec.reps` repetitions, each in a fresh context. Counters are
/// those of the last repetition; runs are deterministic.
pub fn run(spec: &BenchSpec, config: StrategyConfig) -> RunResult {
    let mut total = 0.0;
    let mut last = None;
    for _ in 0..spec.reps.max(1) {
        let start = Instant::now();
        let r = run_once(spec, config);
        total += start.elapsed().as_secs_f64();
        last = Some(r);
    }
    let (outcome, counters) = last.expect("at least one repetition");
    let failed = match (&outcome, expected(spec)) {
        (Outcome::Error(_), _) => true,
        (_, None) => false,
        (got, Some(want)) => *got != want,
    };
    RunResult {
        bench: spec.bench,
        n: spec.n,
        config,
        reps: spec.reps.max(1),
        mean_time_s: total / spec.reps.max(1) as f64,
        counters,
        outcome,
        failed,
    }
}

pub fn write_csv<W: Write>(out: W, results: &[RunResult]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(out: W, results: &[RunResult]) -> serde_json::Result<()> {
    let records: Vec<Record> = results.iter().map(RunResult::record).collect();
    serde_json::to_writer_pretty(out, &records)
}
