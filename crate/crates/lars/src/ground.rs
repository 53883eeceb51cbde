//! Grounding of schematic rules against a data stream.
//!
//! Variable bindings are harvested from matches of positive body atom
//! templates against the data stream, with time variables ranging over
//! the timeline of the innermost enclosing window evaluated at the
//! grounding time. Comparison literals are evaluated per binding and
//! instances with unsatisfied comparisons are dropped.

use std::collections::{BTreeMap, BTreeSet};

use crate::atom::{Atom, Term};
use crate::entail::Formula;
use crate::error::LarsError;
use crate::program::{
    BodyLiteral, GroundHead, GroundLiteral, GroundProgram, GroundRule, Head, Program, Rule,
    SchemaAtom, SchemaFormula, SchemaTerm,
};
use crate::stream::{Stream, TimePoint, Timeline};

type Subst = BTreeMap<String, Term>;

/// Where a subformula is evaluated while harvesting bindings.
#[derive(Debug, Clone, Copy)]
enum EvalTime {
    Fixed(TimePoint),
    AnyIn(Timeline),
}

pub fn ground(p: &Program, d: &Stream, t: TimePoint) -> Result<GroundProgram, LarsError> {
    let tl = d.timeline();
    if !tl.contains(t) {
        return Err(LarsError::TimeOutsideTimeline {
            t,
            start: tl.start,
            end: tl.end,
        });
    }
    let mut rules = BTreeSet::new();
    for rule in &p.rules {
        for subst in rule_bindings(rule, d, t) {
            if let Some(ground_rule) = instantiate(rule, &subst) {
                rules.insert(ground_rule);
            }
        }
    }
    Ok(GroundProgram::new(rules))
}

fn rule_bindings(rule: &Rule, d: &Stream, t: TimePoint) -> Vec<Subst> {
    let mut substs = vec![Subst::new()];
    for lit in &rule.body {
        if let BodyLiteral::Formula { naf: false, formula } = lit {
            substs = expand(formula, d, d.timeline(), EvalTime::Fixed(t), substs);
            if substs.is_empty() {
                return substs;
            }
        }
    }
    substs
}

fn expand(
    f: &SchemaFormula,
    d: &Stream,
    tl: Timeline,
    time: EvalTime,
    substs: Vec<Subst>,
) -> Vec<Subst> {
    match f {
        SchemaFormula::Atom(sa) => substs
            .into_iter()
            .flat_map(|s| match_atom(sa, d, tl, time, s))
            .collect(),
        // Negated subformulas never bind.
        SchemaFormula::Not(_) => substs,
        SchemaFormula::And(a, b) => {
            let substs = expand(a, d, tl, time, substs);
            expand(b, d, tl, time, substs)
        }
        SchemaFormula::Or(a, b) => {
            let mut out: Vec<Subst> = expand(a, d, tl, time, substs.clone());
            for s in expand(b, d, tl, time, substs) {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
            out
        }
        SchemaFormula::Diamond(g) | SchemaFormula::Always(g) => {
            expand(g, d, tl, EvalTime::AnyIn(tl), substs)
        }
        SchemaFormula::At(st, g) => substs
            .into_iter()
            .flat_map(|s| {
                let mut out = Vec::new();
                match resolve_time(st, &s) {
                    Resolved::Time(u) => {
                        if tl.contains(u) {
                            out.extend(expand(g, d, tl, EvalTime::Fixed(u), vec![s]));
                        }
                    }
                    Resolved::Unbound(v) => {
                        for u in tl.iter() {
                            let mut s2 = s.clone();
                            s2.insert(v.clone(), Term::Int(u as i64));
                            out.extend(expand(g, d, tl, EvalTime::Fixed(u), vec![s2]));
                        }
                    }
                    Resolved::Invalid => {}
                }
                out
            })
            .collect(),
        SchemaFormula::Window(k, g) => substs
            .into_iter()
            .flat_map(|s| {
                let times: Vec<TimePoint> = match time {
                    EvalTime::Fixed(u) => vec![u],
                    EvalTime::AnyIn(tlc) => tlc.iter().collect(),
                };
                let mut out = Vec::new();
                for u in times {
                    let sub = Timeline {
                        start: tl.start.max(u.saturating_sub(*k)),
                        end: u,
                    };
                    for s2 in expand(g, d, sub, EvalTime::Fixed(u), vec![s.clone()]) {
                        if !out.contains(&s2) {
                            out.push(s2);
                        }
                    }
                }
                out
            })
            .collect(),
    }
}

enum Resolved {
    Time(TimePoint),
    Unbound(String),
    Invalid,
}

fn resolve_time(st: &SchemaTerm, subst: &Subst) -> Resolved {
    let term = match st {
        SchemaTerm::Const(c) => Some(c.clone()),
        SchemaTerm::Var(v) => match subst.get(v) {
            Some(c) => Some(c.clone()),
            None => return Resolved::Unbound(v.clone()),
        },
    };
    match term {
        Some(Term::Int(n)) if n >= 0 => Resolved::Time(n as u64),
        _ => Resolved::Invalid,
    }
}

fn match_atom(
    sa: &SchemaAtom,
    d: &Stream,
    tl: Timeline,
    time: EvalTime,
    subst: Subst,
) -> Vec<Subst> {
    if sa.args.iter().all(|a| resolve(a, &subst).is_some()) {
        // Fully ground already; nothing to bind.
        return vec![subst];
    }
    let times: Vec<TimePoint> = match time {
        EvalTime::Fixed(u) => vec![u],
        EvalTime::AnyIn(tlc) => d
            .eval()
            .range(tlc.start..=tlc.end)
            .map(|(u, _)| *u)
            .collect(),
    };
    let _ = tl;
    let mut out = Vec::new();
    for u in times {
        for atom in d.at(u) {
            if atom.predicate == sa.predicate && atom.args.len() == sa.args.len() {
                if let Some(s2) = unify(sa, atom, &subst) {
                    if !out.contains(&s2) {
                        out.push(s2);
                    }
                }
            }
        }
    }
    out
}

fn unify(sa: &SchemaAtom, atom: &Atom, subst: &Subst) -> Option<Subst> {
    let mut s = subst.clone();
    for (pat, val) in sa.args.iter().zip(&atom.args) {
        match pat {
            SchemaTerm::Const(c) => {
                if c != val {
                    return None;
                }
            }
            SchemaTerm::Var(v) => match s.get(v) {
                Some(bound) if bound != val => return None,
                Some(_) => {}
                None => {
                    s.insert(v.clone(), val.clone());
                }
            },
        }
    }
    Some(s)
}

fn resolve(st: &SchemaTerm, subst: &Subst) -> Option<Term> {
    match st {
        SchemaTerm::Const(c) => Some(c.clone()),
        SchemaTerm::Var(v) => subst.get(v).cloned(),
    }
}

fn instantiate(rule: &Rule, subst: &Subst) -> Option<GroundRule> {
    let head = match &rule.head {
        Head::Plain(sa) => GroundHead::Plain(ground_atom(sa, subst)?),
        Head::At(st, sa) => match resolve_time(st, subst) {
            Resolved::Time(u) => GroundHead::At(u, ground_atom(sa, subst)?),
            _ => return None,
        },
    };
    let mut body = Vec::new();
    for lit in &rule.body {
        match lit {
            BodyLiteral::Comparison { left, op, right } => {
                let (Some(Term::Int(l)), Some(Term::Int(r))) =
                    (resolve(left, subst), resolve(right, subst))
                else {
                    return None;
                };
                if !op.eval(l, r) {
                    return None;
                }
            }
            BodyLiteral::Formula { naf, formula } => body.push(GroundLiteral {
                naf: *naf,
                formula: ground_formula(formula, subst)?,
            }),
        }
    }
    Some(GroundRule { head, body })
}

fn ground_atom(sa: &SchemaAtom, subst: &Subst) -> Option<Atom> {
    let args = sa
        .args
        .iter()
        .map(|a| resolve(a, subst))
        .collect::<Option<Vec<_>>>()?;
    Some(Atom::new(sa.predicate.clone(), args))
}

fn ground_formula(sf: &SchemaFormula, subst: &Subst) -> Option<Formula> {
    Some(match sf {
        SchemaFormula::Atom(sa) => Formula::Atom(ground_atom(sa, subst)?),
        SchemaFormula::Not(g) => Formula::not(ground_formula(g, subst)?),
        SchemaFormula::And(a, b) => {
            Formula::and(ground_formula(a, subst)?, ground_formula(b, subst)?)
        }
        SchemaFormula::Or(a, b) => {
            Formula::or(ground_formula(a, subst)?, ground_formula(b, subst)?)
        }
        SchemaFormula::Diamond(g) => Formula::diamond(ground_formula(g, subst)?),
        SchemaFormula::Always(g) => Formula::always(ground_formula(g, subst)?),
        SchemaFormula::At(st, g) => match resolve_time(st, subst) {
            Resolved::Time(u) => Formula::at(u, ground_formula(g, subst)?),
            _ => return None,
        },
        SchemaFormula::Window(k, g) => Formula::window(*k, ground_formula(g, subst)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;
    use crate::stream::Evaluation;

    fn alpha_stream(values: &[(u64, i64)]) -> Stream {
        let mut eval = Evaluation::new();
        for (t, v) in values {
            eval.entry(*t)
                .or_default()
                .insert(Atom::new("alpha", vec![Term::Int(*v)]));
        }
        Stream::new(Timeline::new(0, 1800).unwrap(), eval)
    }

    const R1: &str = "at(T) high :- in[30 s] at(T) alpha(V), V >= 18.";

    #[test]
    fn atom_outside_window_yields_no_instance() {
        let p = parse_program(R1).unwrap();
        let d = alpha_stream(&[(700, 20)]);
        let g = ground(&p, &d, 750).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn one_instance_per_window_time_point() {
        let p = parse_program(R1).unwrap();
        let values: Vec<(u64, i64)> = (720..=750).map(|t| (t, 20)).collect();
        let d = alpha_stream(&values);
        let g = ground(&p, &d, 750).unwrap();
        assert_eq!(g.len(), 31);
        for u in 720..=750 {
            assert!(g.rules.iter().any(|r| matches!(
                &r.head,
                GroundHead::At(t, a) if *t == u && a.predicate == "high"
            )));
        }
    }

    #[test]
    fn failed_comparison_drops_instance() {
        let p = parse_program(R1).unwrap();
        let d = alpha_stream(&[(740, 5)]);
        let g = ground(&p, &d, 750).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn ground_program_is_fixpoint_on_ground_rules() {
        let text = "use(random) :- not done.\ndone :- use(lfu) or use(lru).";
        let p = parse_program(text).unwrap();
        let d = Stream::empty(Timeline::new(0, 10).unwrap());
        let g = ground(&p, &d, 5).unwrap();
        assert_eq!(g.len(), 2);
        let g2 = ground(&p, &d, 5).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn grounding_outside_timeline_is_an_error() {
        let p = parse_program(R1).unwrap();
        let d = alpha_stream(&[(5, 20)]);
        assert!(ground(&p, &d, 5000).is_err());
    }
}
