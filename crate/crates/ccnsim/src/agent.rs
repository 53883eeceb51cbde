//! The per-router decision agent: a ring of per-second observations, a
//! popularity-exponent estimator, and periodic evaluation of a rule
//! program that picks the cache replacement policy.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use lars::{answer_stream_stratified, parse_program, Atom, Program, SchemaFormula, Stream, Term, Timeline};

use crate::cache::Policy;
use crate::error::SimError;

/// The default decision rules: estimate bands high (α̂ ≥ 1.8), mid
/// (1.2 ≤ α̂ < 1.8), low (α̂ < 1.2) per second, then require a full 30 s
/// window in one band before committing to LFU/LRU/FIFO; otherwise Random.
pub const DEFAULT_PROGRAM_TEXT: &str = include_str!("../../../programs/ica_default.rules");

pub fn default_program() -> Program {
    parse_program(DEFAULT_PROGRAM_TEXT).expect("default rules parse")
}

/// Observations for one completed second. `alpha10` is the estimated
/// popularity exponent ×10, absent when too little traffic was seen;
/// `rtm50` flags a second where at least half the arriving Interests
/// referenced real-time content.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecondRecord {
    pub second: u64,
    pub alpha10: Option<i64>,
    pub rtm50: bool,
}

/// Ring of per-second records for one router. Retention must cover the
/// largest window of the decision program.
#[derive(Debug, Clone)]
pub struct EventDB {
    records: VecDeque<SecondRecord>,
    retention_s: u64,
}

impl EventDB {
    pub fn new(retention_s: u64) -> Self {
        EventDB {
            records: VecDeque::new(),
            retention_s,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn latest_second(&self) -> Option<u64> {
        self.records.back().map(|r| r.second)
    }

    /// Appends (or overwrites) the record for a second; seconds must be
    /// recorded in nondecreasing order.
    pub fn record_tick(
        &mut self,
        second: u64,
        alpha10: Option<i64>,
        rtm50: bool,
    ) -> Result<(), SimError> {
        if let Some(last) = self.latest_second() {
            if second < last {
                return Err(SimError::OutOfOrderTick { second, last });
            }
            if second == last {
                self.records.pop_back();
            }
        }
        self.records.push_back(SecondRecord { second, alpha10, rtm50 });
        while let Some(front) = self.records.front() {
            if front.second + self.retention_s < second {
                self.records.pop_front();
            } else {
                break;
            }
        }
        Ok(())
    }

    pub fn records(&self) -> impl Iterator<Item = &SecondRecord> {
        self.records.iter()
    }

    /// The most recent recorded estimate, if any.
    pub fn latest_alpha(&self) -> Option<i64> {
        self.records.back().and_then(|r| r.alpha10)
    }
}

#[derive(Debug, Clone)]
pub struct DecisionConfig {
    pub program: Program,
    pub reasoner_period_s: u64,
    pub estimation_window_s: u64,
    pub min_interests: u64,
    pub initial_policy: Policy,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        DecisionConfig {
            program: default_program(),
            reasoner_period_s: 10,
            estimation_window_s: 30,
            min_interests: 50,
            initial_policy: Policy::Lfu,
        }
    }
}

/// Largest window size appearing in the program's rule bodies; the data
/// stream handed to the solver spans exactly this much history.
pub fn max_window_s(program: &Program) -> u64 {
    fn walk(f: &SchemaFormula, max: &mut u64) {
        match f {
            SchemaFormula::Atom(_) => {}
            SchemaFormula::Not(g)
            | SchemaFormula::Diamond(g)
            | SchemaFormula::Always(g)
            | SchemaFormula::At(_, g) => walk(g, max),
            SchemaFormula::And(a, b) | SchemaFormula::Or(a, b) => {
                walk(a, max);
                walk(b, max);
            }
            SchemaFormula::Window(k, g) => {
                *max = (*max).max(*k);
                walk(g, max);
            }
        }
    }
    let mut max = 0;
    for rule in &program.rules {
        for lit in &rule.body {
            if let lars::BodyLiteral::Formula { formula, .. } = lit {
                walk(formula, &mut max);
            }
        }
    }
    max
}

/// Popularity-exponent estimate from per-content Interest counts:
/// count-weighted least-squares slope of log(count) against log(rank),
/// negated and clamped to [0, 5], carried as an integer ×10. Absent when
/// traffic is below `min_interests` or fewer than two contents were seen.
pub fn estimate_alpha(counts: &BTreeMap<String, u64>, min_interests: u64) -> Option<i64> {
    let mut items: Vec<(&str, u64)> = counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(name, &c)| (name.as_str(), c))
        .collect();
    let total: u64 = items.iter().map(|(_, c)| c).sum();
    if total < min_interests || items.len() < 2 {
        return None;
    }
    items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

    let points: Vec<(f64, f64, f64)> = items
        .iter()
        .enumerate()
        .map(|(i, &(_, c))| ((i as f64 + 1.0).ln(), (c as f64).ln(), c as f64))
        .collect();
    let wsum: f64 = points.iter().map(|p| p.2).sum();
    let xm: f64 = points.iter().map(|(x, _, w)| w * x).sum::<f64>() / wsum;
    let ym: f64 = points.iter().map(|(_, y, w)| w * y).sum::<f64>() / wsum;
    let cov: f64 = points.iter().map(|(x, y, w)| w * (x - xm) * (y - ym)).sum();
    let var: f64 = points.iter().map(|(x, _, w)| w * (x - xm) * (x - xm)).sum();
    let slope = if var > 0.0 { cov / var } else { 0.0 };
    let alpha = (-slope).clamp(0.0, 5.0);
    Some((alpha * 10.0).round() as i64)
}

/// Data stream over the last `history_s` seconds ending at `now_s`, with
/// an alpha(V) atom per second carrying a recorded estimate and an rtm50
/// atom per flagged second.
pub fn build_stream(db: &EventDB, now_s: u64, history_s: u64) -> Stream {
    let timeline = Timeline::new(now_s.saturating_sub(history_s), now_s).expect("valid timeline");
    let mut stream = Stream::empty(timeline);
    for rec in db.records() {
        if !timeline.contains(rec.second) {
            continue;
        }
        if let Some(v) = rec.alpha10 {
            stream
                .insert(rec.second, Atom::new("alpha", vec![Term::Int(v)]))
                .expect("within timeline");
        }
        if rec.rtm50 {
            stream
                .insert(rec.second, Atom::prop("rtm50"))
                .expect("within timeline");
        }
    }
    stream
}

/// Outcome of one solver invocation: the chosen policy and every use(_)
/// atom the program derived at decision time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub policy: Policy,
    pub derived: Vec<Policy>,
}

fn use_policy(atom: &Atom) -> Option<Policy> {
    if atom.predicate != "use" || atom.args.len() != 1 {
        return None;
    }
    match &atom.args[0] {
        Term::Sym(s) => s.parse().ok(),
        Term::Int(_) => None,
    }
}

/// Runs the decision program against the router's recorded history. The
/// evaluation point is the latest recorded second not after `now_s`, so a
/// tick racing the current second's bookkeeping still sees a complete
/// window. With no usable records the decision is the fail-safe Random.
pub fn decide(db: &EventDB, now_s: u64, cfg: &DecisionConfig) -> Result<Decision, SimError> {
    let t = db.latest_second().map_or(now_s, |latest| latest.min(now_s));
    let stream = build_stream(db, t, max_window_s(&cfg.program));
    let answer = answer_stream_stratified(&cfg.program, &stream, t)?;
    let derived: BTreeSet<Policy> = answer.at(t).filter_map(use_policy).collect();
    let policy = [Policy::Lfu, Policy::Lru, Policy::Fifo, Policy::Random]
        .into_iter()
        .find(|p| derived.contains(p))
        .unwrap_or(Policy::Random);
    Ok(Decision {
        policy,
        derived: derived.into_iter().collect(),
    })
}
