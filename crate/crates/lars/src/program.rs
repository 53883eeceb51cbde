use std::collections::BTreeSet;
use std::fmt;

use crate::atom::{Atom, Term};
use crate::entail::Formula;
use crate::error::LarsError;
use crate::stream::TimePoint;

/// A term in a schematic rule: a constant or a variable.
/// Variables are spelled with an uppercase first letter in the text syntax.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SchemaTerm {
    Var(String),
    Const(Term),
}

impl fmt::Display for SchemaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaTerm::Var(v) => write!(f, "{v}"),
            SchemaTerm::Const(c) => write!(f, "{c}"),
        }
    }
}

/// An atom template with possibly-variable arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SchemaAtom {
    pub predicate: String,
    pub args: Vec<SchemaTerm>,
}

impl SchemaAtom {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            SchemaTerm::Var(v) => Some(v.as_str()),
            SchemaTerm::Const(_) => None,
        })
    }
}

impl fmt::Display for SchemaAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A schematic body formula. Mirrors [`Formula`] minus implication, with
/// variables allowed in atom arguments and @ time positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SchemaFormula {
    Atom(SchemaAtom),
    Not(Box<SchemaFormula>),
    And(Box<SchemaFormula>, Box<SchemaFormula>),
    Or(Box<SchemaFormula>, Box<SchemaFormula>),
    Diamond(Box<SchemaFormula>),
    Always(Box<SchemaFormula>),
    At(SchemaTerm, Box<SchemaFormula>),
    Window(u64, Box<SchemaFormula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Ge,
    Gt,
    Eq,
}

impl CmpOp {
    pub fn eval(self, l: i64, r: i64) -> bool {
        match self {
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Ge => l >= r,
            CmpOp::Gt => l > r,
            CmpOp::Eq => l == r,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
        })
    }
}

/// One body element: a (possibly negated) formula, or a comparison.
/// Comparisons are evaluated away during grounding and never bind
/// variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum BodyLiteral {
    Formula { naf: bool, formula: SchemaFormula },
    Comparison { left: SchemaTerm, op: CmpOp, right: SchemaTerm },
}

/// Head shapes: a plain atom or an @-prefixed atom. Full formula heads
/// are rejected at parse time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Head {
    Plain(SchemaAtom),
    At(SchemaTerm, SchemaAtom),
}

impl Head {
    pub fn atom(&self) -> &SchemaAtom {
        match self {
            Head::Plain(a) | Head::At(_, a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rule {
    pub head: Head,
    pub body: Vec<BodyLiteral>,
    /// Source line, for error reporting.
    pub line: usize,
}

/// A validated set of rules. Predicates occurring in some head are
/// intensional; all others are extensional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub intensional: BTreeSet<String>,
}

impl Program {
    /// Validates safety and head restrictions, deriving the signature
    /// from head predicates.
    pub fn new(rules: Vec<Rule>) -> Result<Self, LarsError> {
        let intensional: BTreeSet<String> = rules
            .iter()
            .map(|r| r.head.atom().predicate.clone())
            .collect();
        for rule in &rules {
            check_safety(rule)?;
        }
        Ok(Program { rules, intensional })
    }

    pub fn empty() -> Self {
        Program {
            rules: Vec::new(),
            intensional: BTreeSet::new(),
        }
    }

    pub fn is_extensional(&self, predicate: &str) -> bool {
        !self.intensional.contains(predicate)
    }
}

/// Safety: every variable of the rule must occur in a positive body
/// literal, inside an atom template (argument or @ time position) that is
/// not under negation.
fn check_safety(rule: &Rule) -> Result<(), LarsError> {
    let mut bound = BTreeSet::new();
    for lit in &rule.body {
        if let BodyLiteral::Formula { naf: false, formula } = lit {
            collect_binding_vars(formula, false, &mut bound);
        }
    }
    let mut used = BTreeSet::new();
    match &rule.head {
        Head::Plain(a) => used.extend(a.variables().map(str::to_string)),
        Head::At(t, a) => {
            if let SchemaTerm::Var(v) = t {
                used.insert(v.clone());
            }
            used.extend(a.variables().map(str::to_string));
        }
    }
    for lit in &rule.body {
        match lit {
            BodyLiteral::Formula { formula, .. } => collect_all_vars(formula, &mut used),
            BodyLiteral::Comparison { left, right, .. } => {
                for t in [left, right] {
                    if let SchemaTerm::Var(v) = t {
                        used.insert(v.clone());
                    }
                }
            }
        }
    }
    for v in used {
        if !bound.contains(&v) {
            return Err(LarsError::UnsafeRule {
                line: rule.line,
                variable: v,
            });
        }
    }
    Ok(())
}

fn collect_binding_vars(f: &SchemaFormula, negated: bool, out: &mut BTreeSet<String>) {
    match f {
        SchemaFormula::Atom(a) => {
            if !negated {
                out.extend(a.variables().map(str::to_string));
            }
        }
        SchemaFormula::Not(g) => collect_binding_vars(g, !negated, out),
        SchemaFormula::And(a, b) | SchemaFormula::Or(a, b) => {
            collect_binding_vars(a, negated, out);
            collect_binding_vars(b, negated, out);
        }
        SchemaFormula::Diamond(g) | SchemaFormula::Always(g) | SchemaFormula::Window(_, g) => {
            collect_binding_vars(g, negated, out)
        }
        SchemaFormula::At(t, g) => {
            if !negated {
                if let SchemaTerm::Var(v) = t {
                    out.insert(v.clone());
                }
            }
            collect_binding_vars(g, negated, out);
        }
    }
}

fn collect_all_vars(f: &SchemaFormula, out: &mut BTreeSet<String>) {
    match f {
        SchemaFormula::Atom(a) => out.extend(a.variables().map(str::to_string)),
        SchemaFormula::Not(g)
        | SchemaFormula::Diamond(g)
        | SchemaFormula::Always(g)
        | SchemaFormula::Window(_, g) => collect_all_vars(g, out),
        SchemaFormula::And(a, b) | SchemaFormula::Or(a, b) => {
            collect_all_vars(a, out);
            collect_all_vars(b, out);
        }
        SchemaFormula::At(t, g) => {
            if let SchemaTerm::Var(v) = t {
                out.insert(v.clone());
            }
            collect_all_vars(g, out);
        }
    }
}

/// A variable-free rule head.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroundHead {
    Plain(Atom),
    At(TimePoint, Atom),
}

impl GroundHead {
    pub fn atom(&self) -> &Atom {
        match self {
            GroundHead::Plain(a) | GroundHead::At(_, a) => a,
        }
    }

    /// The formula this head asserts, relative to evaluation time `t`.
    pub fn formula(&self) -> Formula {
        match self {
            GroundHead::Plain(a) => Formula::Atom(a.clone()),
            GroundHead::At(u, a) => Formula::at(*u, Formula::Atom(a.clone())),
        }
    }

    /// The time point the head atom is asserted at, for evaluation time `t`.
    pub fn target_time(&self, t: TimePoint) -> TimePoint {
        match self {
            GroundHead::Plain(_) => t,
            GroundHead::At(u, _) => *u,
        }
    }
}

/// A variable-free body literal; comparisons have been evaluated away.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundLiteral {
    pub naf: bool,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundRule {
    pub head: GroundHead,
    pub body: Vec<GroundLiteral>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundProgram {
    pub rules: BTreeSet<GroundRule>,
}

impl GroundProgram {
    pub fn new(rules: BTreeSet<GroundRule>) -> Self {
        GroundProgram { rules }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}
