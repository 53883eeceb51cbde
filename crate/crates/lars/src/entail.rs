use std::collections::BTreeSet;

use crate::atom::Atom;
use crate::error::LarsError;
use crate::stream::{window_time, Stream, TimePoint};

/// A formula over atoms, propositional connectives, sliding time-based
/// windows and the temporal operators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Holds at some time point of the current timeline.
    Diamond(Box<Formula>),
    /// Holds at all time points of the current timeline.
    Always(Box<Formula>),
    /// Holds at the given time point, which must lie in the current timeline.
    At(TimePoint, Box<Formula>),
    /// Restricts evaluation to the sliding time-based window of the given
    /// size in seconds.
    Window(u64, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn diamond(f: Formula) -> Self {
        Formula::Diamond(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    pub fn at(t: TimePoint, f: Formula) -> Self {
        Formula::At(t, Box::new(f))
    }

    pub fn window(k: u64, f: Formula) -> Self {
        Formula::Window(k, Box::new(f))
    }
}

/// An interpretation stream together with time-independent background atoms.
/// Only the sliding time-based window family is available to formulas, so
/// no explicit set of window functions is carried.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub interpretation: Stream,
    pub background: BTreeSet<Atom>,
}

impl Structure {
    pub fn new(interpretation: Stream) -> Self {
        Structure {
            interpretation,
            background: BTreeSet::new(),
        }
    }

    pub fn with_background(interpretation: Stream, background: BTreeSet<Atom>) -> Self {
        Structure {
            interpretation,
            background,
        }
    }

    /// Entailment against the full interpretation stream.
    pub fn satisfies(&self, t: TimePoint, f: &Formula) -> Result<bool, LarsError> {
        let s = self.interpretation.clone();
        entails(self, &s, t, f)
    }
}

/// Evaluates `f` at time `t` relative to the substream `s` of
/// `m.interpretation`. An atom holds if it is in `s` at `t` or in the
/// background data. `Diamond`/`Always` quantify over `s`'s timeline,
/// `At` fails for targets outside it, and `Window` recurses on the
/// corresponding sliding window of `s`.
pub fn entails(m: &Structure, s: &Stream, t: TimePoint, f: &Formula) -> Result<bool, LarsError> {
    let tl = s.timeline();
    if !tl.contains(t) {
        return Err(LarsError::TimeOutsideTimeline {
            t,
            start: tl.start,
            end: tl.end,
        });
    }
    Ok(match f {
        Formula::Atom(a) => s.holds_at(t, a) || m.background.contains(a),
        Formula::Not(g) => !entails(m, s, t, g)?,
        Formula::And(a, b) => entails(m, s, t, a)? && entails(m, s, t, b)?,
        Formula::Or(a, b) => entails(m, s, t, a)? || entails(m, s, t, b)?,
        Formula::Implies(a, b) => !entails(m, s, t, a)? || entails(m, s, t, b)?,
        Formula::Diamond(g) => {
            let mut found = false;
            for u in tl.iter() {
                if entails(m, s, u, g)? {
                    found = true;
                    break;
                }
            }
            found
        }
        Formula::Always(g) => {
            let mut all = true;
            for u in tl.iter() {
                if !entails(m, s, u, g)? {
                    all = false;
                    break;
                }
            }
            all
        }
        // Out-of-window @ targets make the formula false rather than an error.
        Formula::At(u, g) => tl.contains(*u) && entails(m, s, *u, g)?,
        Formula::Window(k, g) => {
            let w = window_time(s, t, *k)?;
            entails(m, &w, t, g)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{Evaluation, Timeline};

    fn high_stream() -> Stream {
        // high holds on [600,1200] within [0,1800]
        let mut eval = Evaluation::new();
        for t in 600..=1200 {
            eval.insert(t, [Atom::prop("high")].into());
        }
        Stream::new(Timeline::new(0, 1800).unwrap(), eval)
    }

    fn window_always_high() -> Formula {
        Formula::window(30, Formula::always(Formula::atom(Atom::prop("high"))))
    }

    #[test]
    fn always_high_in_window_at_750() {
        let m = Structure::new(high_stream());
        assert!(m.satisfies(750, &window_always_high()).unwrap());
    }

    #[test]
    fn always_high_fails_at_window_edge() {
        // window [580,610] includes points without high
        let m = Structure::new(high_stream());
        assert!(!m.satisfies(610, &window_always_high()).unwrap());
    }

    #[test]
    fn diamond_high_at_610() {
        let m = Structure::new(high_stream());
        let f = Formula::window(30, Formula::diamond(Formula::atom(Atom::prop("high"))));
        assert!(m.satisfies(610, &f).unwrap());
        assert!(!m.satisfies(500, &f).unwrap());
    }

    #[test]
    fn background_atoms_ignore_windows() {
        let s = Stream::empty(Timeline::new(0, 100).unwrap());
        let m = Structure::with_background(s, [Atom::prop("b")].into());
        let f = Formula::window(
            0,
            Formula::window(5, Formula::always(Formula::atom(Atom::prop("b")))),
        );
        assert!(m.satisfies(50, &f).unwrap());
        assert!(m.satisfies(0, &Formula::atom(Atom::prop("b"))).unwrap());
    }

    #[test]
    fn at_outside_window_is_false() {
        let m = Structure::new(high_stream());
        let f = Formula::window(30, Formula::at(600, Formula::atom(Atom::prop("high"))));
        // 600 is not in [720,750]
        assert!(!m.satisfies(750, &f).unwrap());
        let g = Formula::at(600, Formula::atom(Atom::prop("high")));
        assert!(m.satisfies(750, &g).unwrap());
    }

    #[test]
    fn entails_outside_timeline_is_an_error() {
        let m = Structure::new(high_stream());
        assert!(m.satisfies(5000, &Formula::atom(Atom::prop("high"))).is_err());
    }

    #[test]
    fn implication_from_running_example() {
        // (window 30 always high) -> use(lfu), evaluated at 750
        let mut m = Structure::new(high_stream());
        let f = Formula::implies(
            window_always_high(),
            Formula::atom(Atom::new("use", vec![crate::Term::Sym("lfu".into())])),
        );
        assert!(!m.satisfies(750, &f).unwrap());
        m.interpretation
            .insert(750, Atom::new("use", vec![crate::Term::Sym("lfu".into())]))
            .unwrap();
        assert!(m.satisfies(750, &f).unwrap());
    }
}
