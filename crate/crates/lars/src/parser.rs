//! Rule text syntax, one rule per line:
//!
//! ```text
//! at(T) high  :- in[30 s] at(T) alpha(V), V >= 18.
//! use(lfu)    :- in[30 s] always high.
//! use(fifo)   :- in[30 s] always low, in[20 s] sometime rtm50.
//! done        :- use(lfu) or use(lru) or use(fifo).
//! use(random) :- not done.
//! ```
//!
//! `in[k s]` is the sliding time-based window of `k` seconds, `always`
//! and `sometime` quantify over the current window, and `at(T)` jumps to
//! a time point. Identifiers starting with an uppercase letter are
//! variables. `%` and `#` start comments.

use crate::error::LarsError;
use crate::program::{
    BodyLiteral, CmpOp, Head, Program, Rule, SchemaAtom, SchemaFormula, SchemaTerm,
};
use crate::Term;

const KEYWORDS: &[&str] = &["not", "or", "in", "always", "sometime", "at", "s"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Arrow, // :-
    Dot,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Cmp(CmpOp),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, LarsError> {
    let mut out = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let err = |message: String| LarsError::Syntax {
                line: line_no,
                col,
                message,
            };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '%' || c == '#' {
                break;
            }
            let push = |out: &mut Vec<Spanned>, tok: Tok| {
                out.push(Spanned {
                    tok,
                    line: line_no,
                    col,
                })
            };
            match c {
                '.' => {
                    push(&mut out, Tok::Dot);
                    i += 1;
                }
                ',' => {
                    push(&mut out, Tok::Comma);
                    i += 1;
                }
                '(' => {
                    push(&mut out, Tok::LParen);
                    i += 1;
                }
                ')' => {
                    push(&mut out, Tok::RParen);
                    i += 1;
                }
                '[' => {
                    push(&mut out, Tok::LBracket);
                    i += 1;
                }
                ']' => {
                    push(&mut out, Tok::RBracket);
                    i += 1;
                }
                ':' => {
                    if chars.get(i + 1) == Some(&'-') {
                        push(&mut out, Tok::Arrow);
                        i += 2;
                    } else {
                        return Err(err("expected `:-`".into()));
                    }
                }
                '<' => {
                    if chars.get(i + 1) == Some(&'=') {
                        push(&mut out, Tok::Cmp(CmpOp::Le));
                        i += 2;
                    } else {
                        push(&mut out, Tok::Cmp(CmpOp::Lt));
                        i += 1;
                    }
                }
                '>' => {
                    if chars.get(i + 1) == Some(&'=') {
                        push(&mut out, Tok::Cmp(CmpOp::Ge));
                        i += 2;
                    } else {
                        push(&mut out, Tok::Cmp(CmpOp::Gt));
                        i += 1;
                    }
                }
                '=' => {
                    push(&mut out, Tok::Cmp(CmpOp::Eq));
                    i += 1;
                }
                _ if c.is_ascii_digit() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    let n = s.parse().map_err(|_| err(format!("invalid integer `{s}`")))?;
                    push(&mut out, Tok::Int(n));
                }
                _ if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                }
                _ => return Err(err(format!("unexpected character `{c}`"))),
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, message: impl Into<String>) -> LarsError {
        let (line, col) = self.here();
        LarsError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LarsError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_program(&mut self) -> Result<Program, LarsError> {
        let mut rules = Vec::new();
        while self.peek().is_some() {
            rules.push(self.parse_rule()?);
        }
        Program::new(rules)
    }

    fn parse_rule(&mut self) -> Result<Rule, LarsError> {
        let line = self.here().0;
        let head = self.parse_head()?;
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            loop {
                body.push(self.parse_literal()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "`.` at end of rule")?;
        Ok(Rule { head, body, line })
    }

    fn parse_head(&mut self) -> Result<Head, LarsError> {
        if self.at_keyword("at") {
            self.pos += 1;
            self.expect(Tok::LParen, "`(` after `at`")?;
            let t = self.parse_term()?;
            self.expect(Tok::RParen, "`)` closing `at`")?;
            let atom = self.parse_schema_atom()?;
            Ok(Head::At(t, atom))
        } else {
            Ok(Head::Plain(self.parse_schema_atom()?))
        }
    }

    fn parse_literal(&mut self) -> Result<BodyLiteral, LarsError> {
        // A literal starting with a variable or integer is a comparison.
        let starts_comparison = match self.peek() {
            Some(Tok::Int(_)) => true,
            Some(Tok::Ident(s)) => is_variable(s),
            _ => false,
        } && matches!(self.peek2(), Some(Tok::Cmp(_)));
        if starts_comparison {
            let left = self.parse_term()?;
            let op = match self.next() {
                Some(Tok::Cmp(op)) => op,
                _ => return Err(self.err("expected comparison operator")),
            };
            let right = self.parse_term()?;
            return Ok(BodyLiteral::Comparison { left, op, right });
        }
        let naf = self.eat_keyword("not");
        let formula = self.parse_formula()?;
        Ok(BodyLiteral::Formula { naf, formula })
    }

    fn parse_formula(&mut self) -> Result<SchemaFormula, LarsError> {
        let mut f = self.parse_prefix()?;
        while self.eat_keyword("or") {
            let rhs = self.parse_prefix()?;
            f = SchemaFormula::Or(Box::new(f), Box::new(rhs));
        }
        Ok(f)
    }

    fn parse_prefix(&mut self) -> Result<SchemaFormula, LarsError> {
        if self.eat_keyword("in") {
            self.expect(Tok::LBracket, "`[` after `in`")?;
            let k = match self.next() {
                Some(Tok::Int(n)) if n >= 0 => n as u64,
                _ => return Err(self.err("expected window size in seconds")),
            };
            if !self.eat_keyword("s") {
                return Err(self.err("expected unit `s` in window"));
            }
            self.expect(Tok::RBracket, "`]` closing window")?;
            let inner = self.parse_prefix()?;
            return Ok(SchemaFormula::Window(k, Box::new(inner)));
        }
        if self.eat_keyword("always") {
            return Ok(SchemaFormula::Always(Box::new(self.parse_prefix()?)));
        }
        if self.eat_keyword("sometime") {
            return Ok(SchemaFormula::Diamond(Box::new(self.parse_prefix()?)));
        }
        if self.eat_keyword("not") {
            return Ok(SchemaFormula::Not(Box::new(self.parse_prefix()?)));
        }
        if self.at_keyword("at") {
            self.pos += 1;
            self.expect(Tok::LParen, "`(` after `at`")?;
            let t = self.parse_term()?;
            self.expect(Tok::RParen, "`)` closing `at`")?;
            let inner = self.parse_prefix()?;
            return Ok(SchemaFormula::At(t, Box::new(inner)));
        }
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let f = self.parse_formula()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(f);
        }
        Ok(SchemaFormula::Atom(self.parse_schema_atom()?))
    }

    fn parse_schema_atom(&mut self) -> Result<SchemaAtom, LarsError> {
        let name = match self.peek() {
            Some(Tok::Ident(s)) if !is_variable(s) && !KEYWORDS.contains(&s.as_str()) => s.clone(),
            Some(Tok::Ident(s)) if is_variable(s) => {
                return Err(self.err(format!("predicate `{s}` must start lowercase")))
            }
            _ => return Err(self.err("expected an atom")),
        };
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                args.push(self.parse_term()?);
                match self.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    _ => return Err(self.err("expected `,` or `)` in argument list")),
                }
            }
        }
        Ok(SchemaAtom { predicate: name, args })
    }

    fn parse_term(&mut self) -> Result<SchemaTerm, LarsError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(SchemaTerm::Const(Term::Int(n))),
            Some(Tok::Ident(s)) if is_variable(&s) => Ok(SchemaTerm::Var(s)),
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                Ok(SchemaTerm::Const(Term::Sym(s)))
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected a term"))
            }
        }
    }
}

fn is_variable(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

/// Parses and validates a program from its textual syntax.
pub fn parse_program(text: &str) -> Result<Program, LarsError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.parse_program()
}
