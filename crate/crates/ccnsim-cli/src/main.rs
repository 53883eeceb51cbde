//! Command-line front end for the caching simulator: single runs, seeded
//! batches, cache-size sweeps, CSV reporting, and standalone evaluation of
//! decision programs.

mod aggregate;
mod plot;
mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use ccnsim::metrics::MetricsReport;
use ccnsim::scenario::{ScenarioConfig, Strategy};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "ccnsim", version, about = "Content-centric caching simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario name (lhl-desk, hlh-desk, lhl-paper, hlh-paper)
    /// or a TOML file path
    #[arg(long)]
    scenario: String,
    /// Override the scenario's strategy (random|lru|fifo|lfu|admin|ica)
    #[arg(long)]
    strategy: Option<String>,
    /// Override the scenario's seed
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the built-in decision rules with a program file
    #[arg(long)]
    program: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario; write run.csv (per second) and summary.csv
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run strategy x seed combinations; write batch.csv and quartile
    /// summaries normalized to the random baseline
    Batch {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated strategies
        #[arg(long, default_value = "random,lfu,admin,ica")]
        strategies: String,
        /// Number of seeds, starting at --seed (default 1)
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run lfu and random across cache sizes; write sweep.csv and per-cell
    /// means
    CacheSweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated cache sizes as percent of the catalog
        #[arg(long, default_value = "0.1,0.5,1,4,10")]
        percents: String,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Render a batch/summary CSV (and optionally a run CSV) as a text
    /// table and SVG plots
    Report {
        /// summary.csv or batch.csv to aggregate
        #[arg(long)]
        summary: String,
        /// Optional run.csv for a per-second line plot
        #[arg(long)]
        run: Option<String>,
        /// Vertical marks for the line plot, comma-separated seconds
        #[arg(long)]
        marks: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate a decision program against a stream file and print its
    /// answer stream
    LarsEval {
        #[arg(long)]
        program: String,
        #[arg(long)]
        stream: String,
        /// Evaluation time point
        #[arg(long)]
        at: u64,
        /// Use the exhaustive solver instead of the stratified one
        #[arg(long)]
        oracle: bool,
    },
    /// Check a scenario file and print what it resolves to
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CCNSIM_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: CCNSIM_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Configuration mistakes exit with code 2; everything else with 1.
enum Failure {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<ccnsim::SimError> for Failure {
    fn from(e: ccnsim::SimError) -> Failure {
        Failure::Config(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::Runtime(e)
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, out } => cmd_run(&scenario, &out),
        Command::Batch { scenario, strategies, seeds, out } => {
            cmd_batch(&scenario, &strategies, seeds, &out)
        }
        Command::CacheSweep { scenario, percents, seeds, out } => {
            cmd_cache_sweep(&scenario, &percents, seeds, &out)
        }
        Command::Report { summary, run, marks, out } => {
            let marks = match marks.as_deref() {
                None => Vec::new(),
                Some(list) => parse_list::<f64>(list, "marks")?,
            };
            std::fs::create_dir_all(&out).context("creating output directory")?;
            Ok(report::cmd_report(&summary, run.as_deref(), &marks, &out)?)
        }
        Command::LarsEval { program, stream, at, oracle } => {
            cmd_lars_eval(&program, &stream, at, oracle)
        }
        Command::Validate { scenario } => cmd_validate(&scenario),
    }
}

fn load_scenario(args: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::load(&args.scenario)?;
    if let Some(strategy) = &args.strategy {
        cfg.strategy = strategy.parse()?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(program) = &args.program {
        cfg.program = Some(program.clone());
    }
    cfg.resolve()?; // surface configuration problems before running
    Ok(cfg)
}

fn cmd_run(args: &ScenarioArgs, out: &Path) -> Result<(), Failure> {
    let cfg = load_scenario(args)?;
    let report = ccnsim::run(&cfg)?;
    std::fs::create_dir_all(out).context("creating output directory")?;
    write_atomic(&out.join("run.csv"), &report.run_csv())?;
    let mut summary = MetricsReport::summary_csv_header().to_string();
    summary.push_str(&report.summary_csv_row(&cfg.scenario_hash(), cfg.strategy.name()));
    write_atomic(&out.join("summary.csv"), &summary)?;
    println!(
        "scenario {} strategy {} seed {}: hit_ratio {:.4}, hit_distance {}, {} requests",
        cfg.scenario_hash(),
        cfg.strategy,
        cfg.seed,
        report.hit_ratio(),
        report
            .mean_hit_distance()
            .map(|d| format!("{d:.3}"))
            .unwrap_or_else(|| "-".into()),
        report.total_requests,
    );
    Ok(())
}

fn cmd_batch(
    args: &ScenarioArgs,
    strategies: &str,
    seeds: u64,
    out: &Path,
) -> Result<(), Failure> {
    if seeds == 0 {
        return Err(Failure::Config("seeds must be >= 1".into()));
    }
    let strategies: Vec<Strategy> = parse_list(strategies, "strategies")?;
    let base = load_scenario(args)?;
    let seed_base = args.seed.unwrap_or(base.seed);

    let combos: Vec<(Strategy, u64)> = strategies
        .iter()
        .flat_map(|&s| (0..seeds).map(move |i| (s, seed_base + i)))
        .collect();
    let results: Vec<(Strategy, u64, Result<MetricsReport, ccnsim::SimError>)> = combos
        .par_iter()
        .map(|&(strategy, seed)| {
            let mut cfg = base.clone();
            cfg.strategy = strategy;
            cfg.seed = seed;
            (strategy, seed, ccnsim::run(&cfg))
        })
        .collect();

    // keep every finished row even if some run failed
    let hash = base.scenario_hash();
    let mut csv = MetricsReport::summary_csv_header().to_string();
    let mut first_error = None;
    for (strategy, seed, result) in results {
        match result {
            Ok(report) => csv.push_str(&report.summary_csv_row(&hash, strategy.name())),
            Err(e) => {
                first_error.get_or_insert(format!("{strategy} seed {seed}: {e}"));
            }
        }
    }
    std::fs::create_dir_all(out).context("creating output directory")?;
    write_atomic(&out.join("batch.csv"), &csv)?;
    if let Some(error) = first_error {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "batch aborted, partial results in batch.csv: {error}"
        )));
    }

    let rows = aggregate::parse_summary_csv(&csv).context("aggregating batch")?;
    let mut agg = String::from(
        "strategy,runs,hit_ratio_mean,hit_ratio_q1,hit_ratio_median,hit_ratio_q3,\
         hit_ratio_vs_random_pct,hit_distance_mean,hit_distance_vs_random_pct\n",
    );
    for s in aggregate::summarize(&rows) {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        let _ = writeln!(
            agg,
            "{},{},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            s.strategy,
            s.runs,
            s.hit_ratio_mean,
            s.hit_ratio_q1,
            s.hit_ratio_median,
            s.hit_ratio_q3,
            opt(s.vs_random_pct),
            opt(s.hit_distance_mean),
            opt(s.dist_vs_random_pct),
        );
    }
    write_atomic(&out.join("batch_summary.csv"), &agg)?;
    println!("{} runs -> {}", rows.len(), out.join("batch.csv").display());
    Ok(())
}

fn cmd_cache_sweep(
    args: &ScenarioArgs,
    percents: &str,
    seeds: u64,
    out: &Path,
) -> Result<(), Failure> {
    if seeds == 0 {
        return Err(Failure::Config("seeds must be >= 1".into()));
    }
    let percents: Vec<f64> = parse_list(percents, "percents")?;
    if percents.iter().any(|&p| !(p > 0.0)) {
        return Err(Failure::Config("percents must be positive".into()));
    }
    let base = load_scenario(args)?;
    let seed_base = args.seed.unwrap_or(base.seed);

    let combos: Vec<(f64, Strategy, u64)> = percents
        .iter()
        .flat_map(|&p| {
            [Strategy::Lfu, Strategy::Random]
                .into_iter()
                .flat_map(move |s| (0..seeds).map(move |i| (p, s, seed_base + i)))
        })
        .collect();
    let results: Vec<(f64, Strategy, u64, Result<MetricsReport, ccnsim::SimError>)> = combos
        .par_iter()
        .map(|&(percent, strategy, seed)| {
            let mut cfg = base.clone();
            cfg.cache_percent = Some(percent);
            cfg.cache_chunks = None;
            cfg.strategy = strategy;
            cfg.seed = seed;
            (percent, strategy, seed, ccnsim::run(&cfg))
        })
        .collect();

    let mut csv = String::from("cache_percent,strategy,seed,requests,hits,hit_ratio\n");
    let mut cells: Vec<(f64, Strategy, Vec<f64>)> = Vec::new();
    let mut first_error = None;
    for (percent, strategy, seed, result) in results {
        match result {
            Ok(r) => {
                let _ = writeln!(
                    csv,
                    "{percent},{strategy},{seed},{},{},{:.6}",
                    r.total_requests,
                    r.total_hits,
                    r.hit_ratio()
                );
                match cells.last_mut() {
                    Some(cell) if cell.0 == percent && cell.1 == strategy => {
                        cell.2.push(r.hit_ratio())
                    }
                    _ => cells.push((percent, strategy, vec![r.hit_ratio()])),
                }
            }
            Err(e) => {
                first_error
                    .get_or_insert(format!("{strategy} {percent}% seed {seed}: {e}"));
            }
        }
    }
    std::fs::create_dir_all(out).context("creating output directory")?;
    write_atomic(&out.join("sweep.csv"), &csv)?;
    if let Some(error) = first_error {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "sweep aborted, partial results in sweep.csv: {error}"
        )));
    }

    let mut agg = String::from("cache_percent,strategy,seeds,hit_ratio_mean\n");
    for (percent, strategy, ratios) in &cells {
        let _ = writeln!(
            agg,
            "{percent},{strategy},{},{:.6}",
            ratios.len(),
            aggregate::mean(ratios)
        );
    }
    write_atomic(&out.join("sweep_summary.csv"), &agg)?;
    println!("{} cells -> {}", cells.len(), out.join("sweep_summary.csv").display());
    Ok(())
}

fn cmd_lars_eval(program: &str, stream: &str, at: u64, oracle: bool) -> Result<(), Failure> {
    let program_text = std::fs::read_to_string(program)
        .with_context(|| format!("reading {program}"))
        .map_err(Failure::Runtime)?;
    let stream_text = std::fs::read_to_string(stream)
        .with_context(|| format!("reading {stream}"))
        .map_err(Failure::Runtime)?;
    let program = lars::parse_program(&program_text).map_err(lars_failure)?;
    let data = lars::parse_stream(&stream_text).map_err(lars_failure)?;
    if oracle {
        let streams = lars::answer_streams_bruteforce(&program, &data, at, 1 << 20)
            .map_err(lars_failure)?;
        for (i, s) in streams.iter().enumerate() {
            if i > 0 {
                println!("---");
            }
            print!("{}", lars::print_stream(s));
        }
    } else {
        let answer =
            lars::answer_stream_stratified(&program, &data, at).map_err(lars_failure)?;
        print!("{}", lars::print_stream(&answer));
    }
    Ok(())
}

fn lars_failure(e: lars::LarsError) -> Failure {
    Failure::Runtime(anyhow::anyhow!("{e}"))
}

fn cmd_validate(args: &ScenarioArgs) -> Result<(), Failure> {
    let cfg = load_scenario(args)?;
    let resolved = cfg.resolve()?;
    println!(
        "ok: {} routers, {} consumers, {} chunks total, cache {} chunks/router, \
         {} phases over {} s, strategy {}",
        resolved.topology.len(),
        cfg.consumers,
        resolved.catalog.total_chunks(),
        resolved.cache_capacity,
        resolved.phases.len(),
        resolved.horizon_s,
        cfg.strategy,
    );
    Ok(())
}

fn parse_list<T: std::str::FromStr>(list: &str, what: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    let items: Result<Vec<T>, Failure> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Failure::Config(format!("bad {what} entry {s:?}: {e}")))
        })
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(Failure::Config(format!("{what} must be nonempty")));
    }
    Ok(items)
}

/// Writes via a sibling temp file and rename, so readers never observe a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}
