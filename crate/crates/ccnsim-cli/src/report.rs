//! The `report` subcommand: turns run/batch CSVs into a plain-text
//! median/IQR table, a per-strategy box plot, and a per-second line plot.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::aggregate::{parse_summary_csv, strategy_order, summarize, RunRow};
use crate::{plot, write_atomic};

pub fn cmd_report(
    summary_path: &str,
    run_path: Option<&str>,
    marks: &[f64],
    out_dir: &Path,
) -> Result<()> {
    let text = std::fs::read_to_string(summary_path)
        .with_context(|| format!("reading {summary_path}"))?;
    let rows = parse_summary_csv(&text).with_context(|| format!("{summary_path}"))?;

    write_atomic(&out_dir.join("report.txt"), &render_table(&rows))?;
    write_atomic(&out_dir.join("hit_ratio_box.svg"), &render_box(&rows))?;

    if let Some(run_path) = run_path {
        let text =
            std::fs::read_to_string(run_path).with_context(|| format!("reading {run_path}"))?;
        let points = parse_run_series(&text).with_context(|| format!("{run_path}"))?;
        let svg = plot::line_plot("Cache hits per second", "hits", &points, marks);
        write_atomic(&out_dir.join("hits_timeline.svg"), &svg)?;
    }
    Ok(())
}

fn render_table(rows: &[RunRow]) -> String {
    let mut out = String::from(
        "strategy    runs  hit_ratio median [q1, q3]          vs random (median)\n",
    );
    for s in summarize(rows) {
        let vs = s
            .vs_random_pct
            .map(|p| format!("{p:.1}%"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<10} {:>5}  {:.4} [{:.4}, {:.4}]          {}",
            s.strategy, s.runs, s.hit_ratio_median, s.hit_ratio_q1, s.hit_ratio_q3, vs
        );
    }
    out
}

/// Box-plot series per strategy: hit ratios normalized per seed against
/// the random baseline (= 100%) when random runs are present, raw hit
/// ratios otherwise.
fn render_box(rows: &[RunRow]) -> String {
    let baseline: BTreeMap<u64, f64> = rows
        .iter()
        .filter(|r| r.strategy == "random" && r.hit_ratio > 0.0)
        .map(|r| (r.seed, r.hit_ratio))
        .collect();

    let mut by_strategy: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let normalized = !baseline.is_empty();
    for row in rows {
        let value = if normalized {
            match baseline.get(&row.seed) {
                Some(base) => row.hit_ratio / base * 100.0,
                None => continue,
            }
        } else {
            row.hit_ratio
        };
        by_strategy.entry(&row.strategy).or_default().push(value);
    }
    let mut series: Vec<(String, Vec<f64>)> = by_strategy
        .into_iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    series.sort_by_key(|(name, _)| strategy_order(name));
    let (title, label) = if normalized {
        ("Cache hit ratio vs random baseline", "% of random")
    } else {
        ("Cache hit ratio", "hit ratio")
    };
    plot::box_plot(title, label, &series)
}

/// Extracts (second, hits) from a per-second run CSV.
fn parse_run_series(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().context("empty input: missing header")?;
    if !header.starts_with("second,requests,hits,active_downloads") {
        bail!("line 1: not a per-second run CSV");
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let second: f64 = cells
            .next()
            .unwrap_or_default()
            .parse()
            .with_context(|| format!("line {}: bad second", i + 1))?;
        let hits: f64 = cells
            .nth(1)
            .unwrap_or_default()
            .parse()
            .with_context(|| format!("line {}: bad hits", i + 1))?;
        points.push((second, hits));
    }
    if points.is_empty() {
        bail!("no data rows");
    }
    Ok(points)
}
