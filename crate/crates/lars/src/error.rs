use thiserror::Error;

#[derive(Debug, Error)]
pub enum LarsError {
    #[error("time point {t} outside timeline [{start},{end}]")]
    TimeOutsideTimeline { t: u64, start: u64, end: u64 },

    #[error("timeline start {start} exceeds end {end}")]
    InvalidTimeline { start: u64, end: u64 },

    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("unsafe rule (line {line}): variable {variable} does not occur in a positive body atom")]
    UnsafeRule { line: usize, variable: String },

    #[error("extensional predicate {predicate} used in a rule head (line {line})")]
    ExtensionalHead { line: usize, predicate: String },

    #[error("comparison over unbound term in rule grounding: {term}")]
    UnboundComparison { term: String },

    #[error("candidate space of {candidates} interpretation streams exceeds budget {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },

    #[error("program is not stratified: negative cycle through atom {atom}")]
    NotStratified { atom: String },

    #[error("rule head targets time {t} outside the stream timeline [{start},{end}]")]
    HeadOutsideTimeline { t: u64, start: u64, end: u64 },

    #[error("stream format error at line {line}: {message}")]
    StreamFormat { line: usize, message: String },
}
