//! Parsing and aggregation of per-run summary rows: quartiles and
//! normalization against the random baseline.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};

/// One run, as stored in a summary/batch CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub scenario: String,
    pub strategy: String,
    pub seed: u64,
    pub requests: u64,
    pub hits: u64,
    pub hit_ratio: f64,
    pub hit_distance: Option<f64>,
    pub satisfied: u64,
    pub expired: u64,
    pub stray_data: u64,
}

pub const SUMMARY_COLUMNS: &str =
    "scenario,strategy,seed,requests,hits,hit_ratio,hit_distance,satisfied,expired,stray_data";

pub fn parse_summary_csv(text: &str) -> Result<Vec<RunRow>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().context("empty input: missing header")?;
    if header.trim() != SUMMARY_COLUMNS {
        bail!("line 1: expected header `{SUMMARY_COLUMNS}`, got `{header}`");
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 10 {
            bail!("line {line_no}: expected 10 fields, got {}", cells.len());
        }
        let field = |k: usize, what: &str| -> Result<u64> {
            cells[k]
                .parse()
                .with_context(|| format!("line {line_no}: bad {what} `{}`", cells[k]))
        };
        rows.push(RunRow {
            scenario: cells[0].to_string(),
            strategy: cells[1].to_string(),
            seed: field(2, "seed")?,
            requests: field(3, "requests")?,
            hits: field(4, "hits")?,
            hit_ratio: cells[5]
                .parse()
                .with_context(|| format!("line {line_no}: bad hit_ratio `{}`", cells[5]))?,
            hit_distance: if cells[6].is_empty() {
                None
            } else {
                Some(
                    cells[6].parse().with_context(|| {
                        format!("line {line_no}: bad hit_distance `{}`", cells[6])
                    })?,
                )
            },
            satisfied: field(7, "satisfied")?,
            expired: field(8, "expired")?,
            stray_data: field(9, "stray_data")?,
        });
    }
    if rows.is_empty() {
        bail!("no data rows");
    }
    Ok(rows)
}

/// Linear-interpolation quartiles of an unsorted sample.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let at = |p: f64| {
        let x = p * (v.len() - 1) as f64;
        let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (x - lo as f64)
    };
    (at(0.25), at(0.5), at(0.75))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Aggregate of one strategy across seeds. The `vs_random` figures are
/// medians of per-seed ratios against the random strategy's run with the
/// same seed, as a percentage; absent when random runs are missing.
#[derive(Debug, Clone)]
pub struct StrategySummary {
    pub strategy: String,
    pub runs: usize,
    pub hit_ratio_mean: f64,
    pub hit_ratio_q1: f64,
    pub hit_ratio_median: f64,
    pub hit_ratio_q3: f64,
    pub vs_random_pct: Option<f64>,
    pub hit_distance_mean: Option<f64>,
    pub dist_vs_random_pct: Option<f64>,
}

/// Canonical strategy ordering for presentation.
pub fn strategy_order(name: &str) -> usize {
    ["random", "lru", "fifo", "lfu", "admin", "ica"]
        .iter()
        .position(|s| *s == name)
        .unwrap_or(usize::MAX)
}

pub fn summarize(rows: &[RunRow]) -> Vec<StrategySummary> {
    let baseline: BTreeMap<u64, &RunRow> = rows
        .iter()
        .filter(|r| r.strategy == "random")
        .map(|r| (r.seed, r))
        .collect();

    let mut by_strategy: BTreeMap<&str, Vec<&RunRow>> = BTreeMap::new();
    for row in rows {
        by_strategy.entry(&row.strategy).or_default().push(row);
    }

    let mut out: Vec<StrategySummary> = by_strategy
        .into_iter()
        .map(|(strategy, runs)| {
            let ratios: Vec<f64> = runs.iter().map(|r| r.hit_ratio).collect();
            let (q1, median, q3) = quartiles(&ratios);
            let vs_random: Vec<f64> = runs
                .iter()
                .filter_map(|r| {
                    let base = baseline.get(&r.seed)?;
                    (base.hit_ratio > 0.0).then(|| r.hit_ratio / base.hit_ratio * 100.0)
                })
                .collect();
            let distances: Vec<f64> = runs.iter().filter_map(|r| r.hit_distance).collect();
            let dist_vs_random: Vec<f64> = runs
                .iter()
                .filter_map(|r| {
                    let d = r.hit_distance?;
                    let base = baseline.get(&r.seed)?.hit_distance?;
                    (base > 0.0).then(|| d / base * 100.0)
                })
                .collect();
            StrategySummary {
                strategy: strategy.to_string(),
                runs: runs.len(),
                hit_ratio_mean: mean(&ratios),
                hit_ratio_q1: q1,
                hit_ratio_median: median,
                hit_ratio_q3: q3,
                vs_random_pct: (!vs_random.is_empty()).then(|| quartiles(&vs_random).1),
                hit_distance_mean: (!distances.is_empty()).then(|| mean(&distances)),
                dist_vs_random_pct: (!dist_vs_random.is_empty())
                    .then(|| quartiles(&dist_vs_random).1),
            }
        })
        .collect();
    out.sort_by_key(|s| strategy_order(&s.strategy));
    out
}
