//! Randomized cross-check of the stratified evaluator against brute-force
//! enumeration of answer streams.
//!
//! Programs are generated stratified by construction: predicate `e` is
//! extensional, `p` may depend negatively only on `e`, and `q` may depend
//! negatively only on `e` and `p`. Every such program has exactly one
//! answer stream, and the stratified fixpoint must find it.

use std::collections::BTreeMap;

use lars::{
    answer_stream_stratified, answer_streams_bruteforce, check_model, ground, reduct, Atom,
    BodyLiteral, Head, Program, Rule, SchemaAtom, SchemaFormula, SchemaTerm, Stream, Structure,
    Term, Timeline,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prop(name: &str) -> SchemaAtom {
    SchemaAtom {
        predicate: name.to_string(),
        args: Vec::new(),
    }
}

/// Random body formula whose atoms respect a stratification contract:
/// under an even number of negations only `pos` predicates may appear,
/// under an odd number only `neg` predicates may.
fn gen_formula(
    rng: &mut ChaCha8Rng,
    depth: u32,
    pos: &[&str],
    neg: &[&str],
    tl: Timeline,
) -> SchemaFormula {
    if depth == 0 || rng.gen_bool(0.4) {
        let name = pos[rng.gen_range(0..pos.len())];
        return SchemaFormula::Atom(prop(name));
    }
    match rng.gen_range(0..7) {
        0 if !neg.is_empty() => SchemaFormula::Not(Box::new(gen_formula(
            rng,
            depth - 1,
            neg,
            pos,
            tl,
        ))),
        1 => SchemaFormula::And(
            Box::new(gen_formula(rng, depth - 1, pos, neg, tl)),
            Box::new(gen_formula(rng, depth - 1, pos, neg, tl)),
        ),
        2 => SchemaFormula::Or(
            Box::new(gen_formula(rng, depth - 1, pos, neg, tl)),
            Box::new(gen_formula(rng, depth - 1, pos, neg, tl)),
        ),
        3 => SchemaFormula::Diamond(Box::new(gen_formula(rng, depth - 1, pos, neg, tl))),
        4 => SchemaFormula::Always(Box::new(gen_formula(rng, depth - 1, pos, neg, tl))),
        5 => SchemaFormula::At(
            SchemaTerm::Const(Term::Int(rng.gen_range(tl.start..=tl.end) as i64)),
            Box::new(gen_formula(rng, depth - 1, pos, neg, tl)),
        ),
        _ => SchemaFormula::Window(
            rng.gen_range(0..=3),
            Box::new(gen_formula(rng, depth - 1, pos, neg, tl)),
        ),
    }
}

fn gen_rule(rng: &mut ChaCha8Rng, tl: Timeline) -> Rule {
    let head_pred = if rng.gen_bool(0.5) { "p" } else { "q" };
    // Strata: e < p < q. Negation may only reach strictly below the head.
    let (pos, neg): (&[&str], &[&str]) = if head_pred == "p" {
        (&["e", "p"], &["e"])
    } else {
        (&["e", "p", "q"], &["e", "p"])
    };
    let head_atom = prop(head_pred);
    let head = if rng.gen_bool(0.3) {
        Head::At(
            SchemaTerm::Const(Term::Int(rng.gen_range(tl.start..=tl.end) as i64)),
            head_atom,
        )
    } else {
        Head::Plain(head_atom)
    };
    let body = (0..rng.gen_range(1..=2))
        .map(|_| {
            let naf = rng.gen_bool(0.3);
            // `not` in front of the literal flips polarity for everything
            // inside it.
            let formula = if naf {
                gen_formula(rng, 3, neg, pos, tl)
            } else {
                gen_formula(rng, 3, pos, neg, tl)
            };
            BodyLiteral::Formula { naf, formula }
        })
        .collect();
    Rule { head, body, line: 0 }
}

fn gen_data(rng: &mut ChaCha8Rng, tl: Timeline) -> Stream {
    let mut eval: BTreeMap<u64, std::collections::BTreeSet<Atom>> = BTreeMap::new();
    for t in tl.iter() {
        if rng.gen_bool(0.5) {
            eval.entry(t).or_default().insert(Atom::prop("e"));
        }
    }
    Stream::new(tl, eval)
}

#[test]
fn stratified_agrees_with_bruteforce_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0A5E_57A7);
    let cases = 150;
    for case in 0..cases {
        let tl = Timeline::new(0, rng.gen_range(0..4)).unwrap();
        let rules = (0..rng.gen_range(1..=4)).map(|_| gen_rule(&mut rng, tl)).collect();
        let program = Program::new(rules).expect("generated rules are ground and safe");
        let data = gen_data(&mut rng, tl);
        let t = rng.gen_range(tl.start..=tl.end);

        let expected = answer_streams_bruteforce(&program, &data, t, 1 << 20)
            .unwrap_or_else(|e| panic!("case {case}: brute force failed: {e}"));
        assert_eq!(
            expected.len(),
            1,
            "case {case}: stratified program must have exactly one answer stream"
        );

        let got = answer_stream_stratified(&program, &data, t)
            .unwrap_or_else(|e| panic!("case {case}: stratified solve failed: {e}"));
        assert_eq!(got, expected[0], "case {case}: evaluators disagree");

        // Spot-check minimality: dropping any single derived atom breaks
        // modelhood of the reduct.
        let g = ground(&program, &data, t).unwrap();
        let m = Structure::new(got.clone());
        let r = reduct(&g, &m, t).unwrap();
        assert!(check_model(&r, &m, t).unwrap(), "case {case}: not a model");
        let derived: Vec<_> = got
            .entries()
            .filter(|(u, a)| !data.holds_at(*u, a))
            .map(|(u, a)| (u, a.clone()))
            .collect();
        for (u, atom) in derived {
            let mut smaller = got.clone();
            smaller.remove(u, &atom);
            let m2 = Structure::new(smaller);
            assert!(
                !check_model(&r, &m2, t).unwrap(),
                "case {case}: dropping {atom} at {u} still models the reduct"
            );
        }
    }
}
