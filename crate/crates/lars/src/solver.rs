//! Program semantics: reduct, model checking, a brute-force answer-stream
//! enumeration (the oracle), and a stratified fixpoint evaluator.

use std::collections::{BTreeMap, BTreeSet};

use crate::atom::Atom;
use crate::entail::{entails, Formula, Structure};
use crate::error::LarsError;
use crate::ground::ground;
use crate::program::{GroundProgram, GroundRule, Program};
use crate::stream::{Stream, TimePoint};

/// Default candidate budget for the brute-force oracle.
pub const DEFAULT_BUDGET: u128 = 1 << 20;

fn body_satisfied(rule: &GroundRule, m: &Structure, t: TimePoint) -> Result<bool, LarsError> {
    for lit in &rule.body {
        let holds = entails(m, &m.interpretation, t, &lit.formula)?;
        if holds == lit.naf {
            return Ok(false);
        }
    }
    Ok(true)
}

fn head_satisfied(rule: &GroundRule, m: &Structure, t: TimePoint) -> Result<bool, LarsError> {
    entails(m, &m.interpretation, t, &rule.head.formula())
}

/// The FLP reduct: the rules whose bodies are satisfied by `m` at `t`.
pub fn reduct(g: &GroundProgram, m: &Structure, t: TimePoint) -> Result<GroundProgram, LarsError> {
    let mut rules = BTreeSet::new();
    for rule in &g.rules {
        if body_satisfied(rule, m, t)? {
            rules.insert(rule.clone());
        }
    }
    Ok(GroundProgram::new(rules))
}

/// True iff `m` satisfies every rule of `g` at `t` (body satisfaction
/// implies head satisfaction).
pub fn check_model(g: &GroundProgram, m: &Structure, t: TimePoint) -> Result<bool, LarsError> {
    for rule in &g.rules {
        if body_satisfied(rule, m, t)? && !head_satisfied(rule, m, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn collect_formula_atoms(f: &Formula, out: &mut BTreeSet<Atom>) {
    match f {
        Formula::Atom(a) => {
            out.insert(a.clone());
        }
        Formula::Not(g) | Formula::Diamond(g) | Formula::Always(g) => {
            collect_formula_atoms(g, out)
        }
        Formula::At(_, g) | Formula::Window(_, g) => collect_formula_atoms(g, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_formula_atoms(a, out);
            collect_formula_atoms(b, out);
        }
    }
}

fn stream_with(d: &Stream, pairs: &[(TimePoint, Atom)], mask: u128) -> Stream {
    let mut s = d.clone();
    for (i, (t, atom)) in pairs.iter().enumerate() {
        if mask & (1u128 << i) != 0 {
            // pairs are built from the timeline, so insert cannot fail
            s.insert(*t, atom.clone()).expect("pair within timeline");
        }
    }
    s
}

/// Enumerates all answer streams of `p` for data stream `d` at `t` by
/// exhausting every interpretation stream that extends `d` with
/// intensional atoms, and keeping the minimal models of the reduct.
///
/// The candidate space is `2^(|intensional ground atoms| * |timeline|)`;
/// if it exceeds `budget` a capacity error is returned and the caller
/// must use [`answer_stream_stratified`] instead.
pub fn answer_streams_bruteforce(
    p: &Program,
    d: &Stream,
    t: TimePoint,
    budget: u128,
) -> Result<Vec<Stream>, LarsError> {
    let g = ground(p, d, t)?;
    let mut atoms = BTreeSet::new();
    for rule in &g.rules {
        atoms.insert(rule.head.atom().clone());
        for lit in &rule.body {
            collect_formula_atoms(&lit.formula, &mut atoms);
        }
    }
    atoms.retain(|a| !p.is_extensional(&a.predicate));

    let pairs: Vec<(TimePoint, Atom)> = d
        .timeline()
        .iter()
        .flat_map(|u| atoms.iter().map(move |a| (u, a.clone())))
        .collect();
    let n = pairs.len();
    if n >= 127 || (1u128 << n) > budget {
        return Err(LarsError::BudgetExceeded {
            candidates: if n >= 127 { u128::MAX } else { 1u128 << n },
            budget,
        });
    }

    let mut results = Vec::new();
    for mask in 0..(1u128 << n) {
        let m = Structure::new(stream_with(d, &pairs, mask));
        let red = reduct(&g, &m, t)?;
        if !check_model(&red, &m, t)? {
            continue;
        }
        let mut minimal = true;
        if mask != 0 {
            let mut sub = (mask - 1) & mask;
            loop {
                let m2 = Structure::new(stream_with(d, &pairs, sub));
                if check_model(&red, &m2, t)? {
                    minimal = false;
                    break;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
        if minimal {
            results.push(m.interpretation);
        }
    }
    Ok(results)
}

fn literal_dependencies(f: &Formula, negated: bool, out: &mut Vec<(Atom, bool)>) {
    match f {
        Formula::Atom(a) => out.push((a.clone(), negated)),
        Formula::Not(g) => literal_dependencies(g, !negated, out),
        Formula::Diamond(g) | Formula::Always(g) | Formula::At(_, g) | Formula::Window(_, g) => {
            literal_dependencies(g, negated, out)
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            literal_dependencies(a, negated, out);
            literal_dependencies(b, negated, out);
        }
        Formula::Implies(a, b) => {
            literal_dependencies(a, !negated, out);
            literal_dependencies(b, negated, out);
        }
    }
}

/// Evaluates a stratified program by a layered least fixpoint and returns
/// its unique answer stream. Errors on programs whose ground dependency
/// graph has a cycle through negation; never silently approximates.
pub fn answer_stream_stratified(
    p: &Program,
    d: &Stream,
    t: TimePoint,
) -> Result<Stream, LarsError> {
    let g = ground(p, d, t)?;

    // Stratify over ground atoms (time points disregarded).
    let mut edges: Vec<(Atom, Atom, bool)> = Vec::new();
    let mut strata: BTreeMap<Atom, usize> = BTreeMap::new();
    for rule in &g.rules {
        let head = rule.head.atom().clone();
        strata.entry(head.clone()).or_insert(0);
        for lit in &rule.body {
            let mut deps = Vec::new();
            literal_dependencies(&lit.formula, lit.naf, &mut deps);
            for (atom, negative) in deps {
                if !p.is_extensional(&atom.predicate) {
                    edges.push((head.clone(), atom, negative));
                }
            }
        }
    }
    let bound = strata.len() + 1;
    loop {
        let mut changed = false;
        for (head, body, negative) in &edges {
            let sb = strata.get(body).copied().unwrap_or(0);
            let required = sb + usize::from(*negative);
            let sh = strata.entry(head.clone()).or_insert(0);
            if *sh < required {
                if required > bound {
                    return Err(LarsError::NotStratified {
                        atom: head.to_string(),
                    });
                }
                *sh = required;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let max_stratum = strata.values().copied().max().unwrap_or(0);

    // Layered fixpoint: within each stratum, apply rules against a
    // snapshot until nothing new is derived.
    let mut interp = d.clone();
    for level in 0..=max_stratum {
        loop {
            let snapshot = Structure::new(interp.clone());
            let mut additions: Vec<(TimePoint, Atom)> = Vec::new();
            for rule in &g.rules {
                if strata.get(rule.head.atom()).copied().unwrap_or(0) != level {
                    continue;
                }
                if body_satisfied(rule, &snapshot, t)? {
                    let target = rule.head.target_time(t);
                    if !interp.holds_at(target, rule.head.atom()) {
                        additions.push((target, rule.head.atom().clone()));
                    }
                }
            }
            if additions.is_empty() {
                break;
            }
            for (u, atom) in additions {
                interp.insert(u, atom)?;
            }
        }
    }

    debug_assert!(
        interp
            .entries()
            .all(|(u, a)| !p.is_extensional(&a.predicate) || d.holds_at(u, a)),
        "answer stream must coincide with the data stream on extensional atoms"
    );
    Ok(interp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::Term;
    use crate::parser::parse_program;
    use crate::stream::{Evaluation, Timeline};

    fn sym(s: &str) -> Term {
        Term::Sym(s.into())
    }

    fn use_atom(policy: &str) -> Atom {
        Atom::new("use", vec![sym(policy)])
    }

    /// The data stream of the running example: exactly one alpha value
    /// >= 18 at every second of [600,1200] on the [0,1800] timeline.
    fn example_data_stream() -> Stream {
        let mut eval = Evaluation::new();
        for t in 600..=1200 {
            eval.entry(t)
                .or_default()
                .insert(Atom::new("alpha", vec![Term::Int(20)]));
        }
        Stream::new(Timeline::new(0, 1800).unwrap(), eval)
    }

    fn default_program() -> Program {
        parse_program(include_str!("../../../programs/ica_default.rules")).unwrap()
    }

    #[test]
    fn reduct_drops_blocked_naf_rule() {
        let p = parse_program("a :- not b.").unwrap();
        let d = Stream::empty(Timeline::new(0, 0).unwrap());
        let g = ground(&p, &d, 0).unwrap();

        let mut with_b = d.clone();
        with_b.insert(0, Atom::prop("b")).unwrap();
        let blocked = reduct(&g, &Structure::new(with_b), 0).unwrap();
        assert!(blocked.is_empty());

        let open = reduct(&g, &Structure::new(d), 0).unwrap();
        assert_eq!(open.len(), 1);
    }

    #[test]
    fn check_model_basics() {
        let d = Stream::empty(Timeline::new(0, 0).unwrap());
        let empty = GroundProgram::default();
        assert!(check_model(&empty, &Structure::new(d.clone()), 0).unwrap());

        let p = parse_program("a.").unwrap();
        let g = ground(&p, &d, 0).unwrap();
        assert!(!check_model(&g, &Structure::new(d.clone()), 0).unwrap());
        let mut with_a = d;
        with_a.insert(0, Atom::prop("a")).unwrap();
        assert!(check_model(&g, &Structure::new(with_a), 0).unwrap());
    }

    #[test]
    fn reduct_is_subset_of_ground_program() {
        let p = default_program();
        let d = example_data_stream();
        let g = ground(&p, &d, 750).unwrap();
        let m = Structure::new(answer_stream_stratified(&p, &d, 750).unwrap());
        let red = reduct(&g, &m, 750).unwrap();
        assert!(red.rules.is_subset(&g.rules));
    }

    #[test]
    fn bruteforce_empty_program_returns_data_stream() {
        let p = Program::empty();
        let mut eval = Evaluation::new();
        eval.insert(1, [Atom::prop("e")].into());
        let d = Stream::new(Timeline::new(0, 2).unwrap(), eval);
        let streams = answer_streams_bruteforce(&p, &d, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(streams, vec![d]);
    }

    #[test]
    fn bruteforce_default_negation() {
        let p = parse_program("a :- not b.").unwrap();
        let d = Stream::empty(Timeline::new(0, 0).unwrap());
        let streams = answer_streams_bruteforce(&p, &d, 0, DEFAULT_BUDGET).unwrap();
        assert_eq!(streams.len(), 1);
        assert!(streams[0].holds_at(0, &Atom::prop("a")));
        assert!(!streams[0].holds_at(0, &Atom::prop("b")));
    }

    #[test]
    fn bruteforce_budget_error() {
        let p = parse_program("a :- not b.\nb :- not a.").unwrap();
        let d = Stream::empty(Timeline::new(0, 3).unwrap());
        let err = answer_streams_bruteforce(&p, &d, 0, 4).unwrap_err();
        assert!(matches!(err, LarsError::BudgetExceeded { .. }));
    }

    #[test]
    fn running_example_unique_answer_stream() {
        // Unique answer stream at t=750: high on [720,750], use(lfu) and
        // done at 750, and nothing else beyond the data stream.
        let p = default_program();
        let d = example_data_stream();
        let result = answer_stream_stratified(&p, &d, 750).unwrap();

        for u in 720..=750 {
            assert!(result.holds_at(u, &Atom::prop("high")));
        }
        assert!(result.holds_at(750, &use_atom("lfu")));
        assert!(result.holds_at(750, &Atom::prop("done")));
        assert!(!result.holds_at(750, &use_atom("random")));
        assert!(!result.holds_at(719, &Atom::prop("high")));
        let added = result.atom_count() - d.atom_count();
        assert_eq!(added, 31 + 2);

        // It is a model of its reduct and the reduct keeps r4's instance
        // while dropping r8's.
        let g = ground(&p, &d, 750).unwrap();
        let m = Structure::new(result);
        let red = reduct(&g, &m, 750).unwrap();
        assert!(check_model(&red, &m, 750).unwrap());
        assert!(red
            .rules
            .iter()
            .any(|r| *r.head.atom() == use_atom("lfu")));
        assert!(!red
            .rules
            .iter()
            .any(|r| *r.head.atom() == use_atom("random")));
    }

    #[test]
    fn low_alpha_without_rtm50_selects_random() {
        let p = default_program();
        let mut eval = Evaluation::new();
        for t in 720..=750 {
            eval.entry(t)
                .or_default()
                .insert(Atom::new("alpha", vec![Term::Int(5)]));
        }
        let d = Stream::new(Timeline::new(0, 1800).unwrap(), eval);
        let result = answer_stream_stratified(&p, &d, 750).unwrap();
        assert!(result.holds_at(750, &use_atom("random")));
        assert!(!result.holds_at(750, &Atom::prop("done")));
        assert!(result.holds_at(750, &Atom::prop("low")));
    }

    #[test]
    fn mid_alpha_selects_lru() {
        let p = default_program();
        let mut eval = Evaluation::new();
        for t in 720..=750 {
            eval.entry(t)
                .or_default()
                .insert(Atom::new("alpha", vec![Term::Int(15)]));
        }
        let d = Stream::new(Timeline::new(0, 1800).unwrap(), eval);
        let result = answer_stream_stratified(&p, &d, 750).unwrap();
        assert!(result.holds_at(750, &use_atom("lru")));
        assert!(result.holds_at(750, &Atom::prop("done")));
        assert!(!result.holds_at(750, &use_atom("random")));
    }

    #[test]
    fn low_alpha_with_recent_rtm50_selects_fifo() {
        let p = default_program();
        let mut eval = Evaluation::new();
        for t in 720..=750 {
            eval.entry(t)
                .or_default()
                .insert(Atom::new("alpha", vec![Term::Int(5)]));
        }
        eval.entry(735).or_default().insert(Atom::prop("rtm50"));
        let d = Stream::new(Timeline::new(0, 1800).unwrap(), eval);
        let result = answer_stream_stratified(&p, &d, 750).unwrap();
        assert!(result.holds_at(750, &use_atom("fifo")));
        assert!(!result.holds_at(750, &use_atom("random")));
    }

    #[test]
    fn non_stratified_program_is_rejected() {
        let p = parse_program("a :- not b.\nb :- not a.").unwrap();
        let d = Stream::empty(Timeline::new(0, 0).unwrap());
        let err = answer_stream_stratified(&p, &d, 0).unwrap_err();
        assert!(matches!(err, LarsError::NotStratified { .. }));
    }

    #[test]
    fn stratified_matches_bruteforce_on_example() {
        let p = default_program();
        // Tiny timeline so the oracle stays within budget: 8 intensional
        // ground atoms x 2 time points = 2^16 candidates.
        let mut eval = Evaluation::new();
        for t in 0..=1 {
            eval.entry(t)
                .or_default()
                .insert(Atom::new("alpha", vec![Term::Int(20)]));
        }
        let d = Stream::new(Timeline::new(0, 1).unwrap(), eval);
        let stratified = answer_stream_stratified(&p, &d, 1).unwrap();
        let brute = answer_streams_bruteforce(&p, &d, 1, 1 << 20).unwrap();
        assert_eq!(brute.len(), 1);
        assert_eq!(brute[0], stratified);
    }
}
