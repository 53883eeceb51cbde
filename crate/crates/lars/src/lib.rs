//! Rule-based reasoning over timed atom streams.
//!
//! The data model is a timeline (a closed integer interval, in seconds)
//! together with a sparse evaluation map from time points to sets of atoms.
//! Formulas combine propositional connectives with sliding time-based
//! windows and the temporal operators "sometime", "always" and "at".
//! Programs are sets of rules whose bodies are such formulas under
//! negation-as-failure; they are evaluated either by a brute-force
//! enumeration of candidate answer streams or by a stratified fixpoint.

mod atom;
mod entail;
mod error;
mod ground;
mod parser;
mod program;
mod solver;
mod stream;
mod text;

pub use atom::{Atom, Term};
pub use entail::{entails, Formula, Structure};
pub use error::LarsError;
pub use ground::ground;
pub use parser::parse_program;
pub use program::{
    BodyLiteral, CmpOp, GroundHead, GroundLiteral, GroundProgram, GroundRule, Head, Program, Rule,
    SchemaAtom, SchemaFormula, SchemaTerm,
};
pub use solver::{
    answer_stream_stratified, answer_streams_bruteforce, check_model, reduct, DEFAULT_BUDGET,
};
pub use stream::{is_substream, restrict, window_time, Stream, TimePoint, Timeline};
pub use text::{parse_stream, print_stream};
