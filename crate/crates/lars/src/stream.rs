use std::collections::{BTreeMap, BTreeSet};

use crate::atom::Atom;
use crate::error::LarsError;

/// Simulation time in whole seconds.
pub type TimePoint = u64;

/// A closed interval of time points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timeline {
    pub start: TimePoint,
    pub end: TimePoint,
}

impl Timeline {
    pub fn new(start: TimePoint, end: TimePoint) -> Result<Self, LarsError> {
        if start > end {
            return Err(LarsError::InvalidTimeline { start, end });
        }
        Ok(Timeline { start, end })
    }

    pub fn contains(&self, t: TimePoint) -> bool {
        self.start <= t && t <= self.end
    }

    /// Containment as intervals.
    pub fn is_within(&self, other: &Timeline) -> bool {
        other.start <= self.start && self.end <= other.end
    }

    pub fn iter(&self) -> impl Iterator<Item = TimePoint> {
        self.start..=self.end
    }

    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Evaluation map: time point to set of atoms, stored sparsely.
/// Time points without an entry evaluate to the empty set.
pub type Evaluation = BTreeMap<TimePoint, BTreeSet<Atom>>;

/// A timeline plus its evaluation. The evaluation is empty outside the
/// timeline; construction enforces this.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Stream {
    timeline: Timeline,
    eval: Evaluation,
}

impl Stream {
    /// Builds a stream, dropping evaluation entries outside the timeline
    /// and empty atom sets.
    pub fn new(timeline: Timeline, eval: Evaluation) -> Self {
        let eval = eval
            .into_iter()
            .filter(|(t, atoms)| timeline.contains(*t) && !atoms.is_empty())
            .collect();
        Stream { timeline, eval }
    }

    pub fn empty(timeline: Timeline) -> Self {
        Stream {
            timeline,
            eval: Evaluation::new(),
        }
    }

    pub fn timeline(&self) -> Timeline {
        self.timeline
    }

    pub fn eval(&self) -> &Evaluation {
        &self.eval
    }

    /// Atoms holding at `t`; empty for time points without entries.
    pub fn at(&self, t: TimePoint) -> impl Iterator<Item = &Atom> {
        self.eval.get(&t).into_iter().flatten()
    }

    pub fn holds_at(&self, t: TimePoint, atom: &Atom) -> bool {
        self.eval.get(&t).is_some_and(|s| s.contains(atom))
    }

    /// Adds an atom at a time point. Errors if `t` lies outside the timeline.
    pub fn insert(&mut self, t: TimePoint, atom: Atom) -> Result<bool, LarsError> {
        if !self.timeline.contains(t) {
            return Err(LarsError::HeadOutsideTimeline {
                t,
                start: self.timeline.start,
                end: self.timeline.end,
            });
        }
        Ok(self.eval.entry(t).or_default().insert(atom))
    }

    /// All (time, atom) pairs in ascending order.
    /// Removes one atom occurrence; returns whether it was present.
    pub fn remove(&mut self, t: TimePoint, atom: &Atom) -> bool {
        let Some(atoms) = self.eval.get_mut(&t) else {
            return false;
        };
        let removed = atoms.remove(atom);
        if atoms.is_empty() {
            self.eval.remove(&t);
        }
        removed
    }

    pub fn entries(&self) -> impl Iterator<Item = (TimePoint, &Atom)> {
        self.eval
            .iter()
            .flat_map(|(t, atoms)| atoms.iter().map(move |a| (*t, a)))
    }

    pub fn atom_count(&self) -> usize {
        self.eval.values().map(|s| s.len()).sum()
    }
}

/// Restricts an evaluation map to a timeline: entries outside `sub` are
/// dropped.
pub fn restrict(eval: &Evaluation, sub: Timeline) -> Evaluation {
    eval.range(sub.start..=sub.end)
        .map(|(t, atoms)| (*t, atoms.clone()))
        .collect()
}

/// The sliding time-based window of size `k` at `t`: the substream over
/// `[max(start, t - k), t]`.
pub fn window_time(s: &Stream, t: TimePoint, k: u64) -> Result<Stream, LarsError> {
    let tl = s.timeline();
    if !tl.contains(t) {
        return Err(LarsError::TimeOutsideTimeline {
            t,
            start: tl.start,
            end: tl.end,
        });
    }
    let start = tl.start.max(t.saturating_sub(k));
    let sub = Timeline { start, end: t };
    Ok(Stream {
        timeline: sub,
        eval: restrict(&s.eval, sub),
    })
}

/// True iff `a`'s timeline is contained in `b`'s and `a`'s atoms are a
/// pointwise subset of `b`'s.
pub fn is_substream(a: &Stream, b: &Stream) -> bool {
    a.timeline.is_within(&b.timeline)
        && a.eval.iter().all(|(t, atoms)| {
            atoms.is_empty()
                || b.eval
                    .get(t)
                    .is_some_and(|bigger| atoms.is_subset(bigger))
        })
}
