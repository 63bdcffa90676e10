use std::io;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use lazy_real::StrategyConfig;
use lazy_real_bench::{run, write_csv, write_json, BenchId, BenchSpec, RunResult};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BenchArg {
    Fib,
    Square,
    Orient,
    Incircle,
    Segments,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Def,
    Lgi,
    Lgd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Benchmarks for exact-decision reals under different error-bound
/// strategies.
#[derive(Parser, Debug)]
#[command(name = "real-bench", version)]
struct Args {
    #[arg(long, value_enum)]
    bench: BenchArg,
    /// Problem size (default depends on the benchmark).
    #[arg(long)]
    n: Option<u64>,
    /// Target accuracy 2^-q for the squaring benchmark.
    #[arg(long, default_value_t = 5000)]
    q: i64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long, value_enum)]
    sep_cache: Option<Switch>,
    #[arg(long, value_enum)]
    exact_ceil_log2: Option<Switch>,
    #[arg(long, default_value_t = 25)]
    reps: u32,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Run all twelve strategy / cache / ceil_log2 combinations.
    #[arg(long)]
    matrix: bool,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}\n\nFor more information, try '--help'.");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };

    let configs = if args.matrix {
        if args.strategy.is_some() || args.sep_cache.is_some() || args.exact_ceil_log2.is_some() {
            return usage_error(
                "--matrix cannot be combined with --strategy, --sep-cache or --exact-ceil-log2",
            );
        }
        StrategyConfig::matrix()
    } else {
        let base = match args.strategy.unwrap_or(StrategyArg::Def) {
            StrategyArg::Def => StrategyConfig::def(),
            StrategyArg::Lgi => StrategyConfig::lgi(),
            StrategyArg::Lgd => StrategyConfig::lgd(),
        };
        let on = |s: Option<Switch>| matches!(s, Some(Switch::On));
        vec![base
            .with_sep_cache(on(args.sep_cache))
            .with_exact_ceil_log2(on(args.exact_ceil_log2))]
    };

    let benches: Vec<BenchId> = match args.bench {
        BenchArg::Fib => vec![BenchId::Fib],
        BenchArg::Square => vec![BenchId::Square],
        BenchArg::Orient => vec![BenchId::Orient],
        BenchArg::Incircle => vec![BenchId::Incircle],
        BenchArg::Segments => vec![BenchId::Segments],
        BenchArg::All => BenchId::ALL.to_vec(),
    };

    let mut specs = Vec::new();
    for bench in benches {
        let spec = BenchSpec {
            n: args.n.unwrap_or(bench.default_n()),
            q: args.q,
            seed: args.seed,
            reps: args.reps,
            ..BenchSpec::new(bench)
        };
        if let Err(msg) = spec.validate() {
            return usage_error(&msg);
        }
        specs.push(spec);
    }

    let mut results: Vec<RunResult> = Vec::new();
    for spec in &specs {
        for &config in &configs {
            results.push(run(spec, config));
        }
    }

    let stdout = io::stdout().lock();
    let written = match args.format {
        Format::Csv => write_csv(stdout, &results).map_err(|e| e.to_string()),
        Format::Json => write_json(stdout, &results).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if args.format == Format::Json {
        println!();
    }
    if results.iter().any(|r| r.failed) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
