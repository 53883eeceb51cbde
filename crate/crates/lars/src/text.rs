//! Line-oriented stream format.
//!
//! The first line is `timeline <start> <end>`; every following non-empty
//! line is `<t> <atom>`, e.g. `42 rtm50` or `700 alpha(20)`. Printing
//! emits entries sorted by time and atom, which is the canonical form;
//! parsing then printing reproduces canonical input byte for byte.

use crate::atom::{Atom, Term};
use crate::error::LarsError;
use crate::stream::{Evaluation, Stream, Timeline};

pub fn print_stream(s: &Stream) -> String {
    let tl = s.timeline();
    let mut out = format!("timeline {} {}\n", tl.start, tl.end);
    for (t, atom) in s.entries() {
        out.push_str(&format!("{t} {atom}\n"));
    }
    out
}

pub fn parse_stream(text: &str) -> Result<Stream, LarsError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines.next().ok_or(LarsError::StreamFormat {
        line: 1,
        message: "missing timeline header".into(),
    })?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("timeline") {
        return Err(LarsError::StreamFormat {
            line: line_no,
            message: "expected `timeline <start> <end>`".into(),
        });
    }
    let start = parse_u64(parts.next(), line_no)?;
    let end = parse_u64(parts.next(), line_no)?;
    if parts.next().is_some() {
        return Err(LarsError::StreamFormat {
            line: line_no,
            message: "trailing tokens after timeline header".into(),
        });
    }
    let timeline = Timeline::new(start, end).map_err(|_| LarsError::StreamFormat {
        line: line_no,
        message: format!("timeline start {start} exceeds end {end}"),
    })?;

    let mut eval = Evaluation::new();
    for (line_no, line) in lines {
        let (t_str, atom_str) = line.split_once(' ').ok_or_else(|| LarsError::StreamFormat {
            line: line_no,
            message: "expected `<t> <atom>`".into(),
        })?;
        let t: u64 = t_str.parse().map_err(|_| LarsError::StreamFormat {
            line: line_no,
            message: format!("invalid time point `{t_str}`"),
        })?;
        if !timeline.contains(t) {
            return Err(LarsError::StreamFormat {
                line: line_no,
                message: format!("time point {t} outside timeline [{start},{end}]"),
            });
        }
        let atom = parse_atom(atom_str.trim(), line_no)?;
        eval.entry(t).or_default().insert(atom);
    }
    Ok(Stream::new(timeline, eval))
}

fn parse_u64(tok: Option<&str>, line: usize) -> Result<u64, LarsError> {
    tok.and_then(|s| s.parse().ok())
        .ok_or(LarsError::StreamFormat {
            line,
            message: "expected a non-negative integer".into(),
        })
}

fn parse_atom(s: &str, line: usize) -> Result<Atom, LarsError> {
    let bad = |message: String| LarsError::StreamFormat { line, message };
    let (name, args) = match s.split_once('(') {
        None => (s, Vec::new()),
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| bad(format!("unterminated argument list in `{s}`")))?;
            let args = inner
                .split(',')
                .map(|a| parse_term(a.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| bad(m))?;
            (name, args)
        }
    };
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(bad(format!("invalid predicate name `{name}`")));
    }
    Ok(Atom::new(name, args))
}

fn parse_term(s: &str) -> Result<Term, String> {
    if s.is_empty() {
        return Err("empty term".into());
    }
    if s.chars().next().unwrap().is_ascii_digit() || s.starts_with('-') {
        s.parse()
            .map(Term::Int)
            .map_err(|_| format!("invalid integer term `{s}`"))
    } else if s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(Term::Sym(s.to_string()))
    } else {
        Err(format!("invalid term `{s}`"))
    }
}
