//! Monotone (non-contracting) grammars: data model, validation and the
//! plain-text grammar format.
//!
//! ```text
//! # comment lines start with '#'
//! nonterminals: A B C D E
//! terminals: b c d e
//! start: A
//! rules:
//! A -> B C
//! B D -> D B
//! B -> b
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::symbol::{name_problem, Form, Name, Symbol};

/// A rewriting rule `lhs -> rhs` over plain symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: Form,
    pub rhs: Form,
}

impl Rule {
    pub fn new(lhs: Form, rhs: Form) -> Self {
        Rule { lhs, rhs }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &Form| s.iter().map(plain_token).collect::<Vec<_>>().join(" ");
        write!(f, "{} -> {}", side(&self.lhs), side(&self.rhs))
    }
}

fn plain_token(s: &Symbol) -> String {
    match s {
        Symbol::Terminal(n) => n.to_string(),
        Symbol::Nonterminal(m) if m.is_unmarked() && !m.prime => m.base.to_string(),
        other => other.to_string(),
    }
}

/// A grammar whose rules never shrink the sentential form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneGrammar {
    pub nonterminals: Vec<Name>,
    pub terminals: Vec<Name>,
    pub start: Name,
    pub rules: Vec<Rule>,
}

impl MonotoneGrammar {
    pub fn nonterminal_set(&self) -> BTreeSet<Name> {
        self.nonterminals.iter().cloned().collect()
    }

    pub fn terminal_set(&self) -> BTreeSet<Name> {
        self.terminals.iter().cloned().collect()
    }

    /// Total length of all rule sides.
    pub fn size(&self) -> usize {
        self.rules.iter().map(|r| r.lhs.len() + r.rhs.len()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    InvalidName,
    DuplicateSymbol,
    Overlap,
    BadStart,
    NoRules,
    EmptyLhs,
    EmptyRhs,
    NoNonterminalInLhs,
    Contracting,
    UndeclaredSymbol,
    MarkedSymbol,
}

/// One broken invariant, pointing at the offending rule when there is one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Zero-based rule index.
    pub rule: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Some(i) => write!(f, "rule {}: {}", i + 1, self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks every grammar invariant; an empty report means the grammar is valid.
pub fn validate_grammar(g: &MonotoneGrammar) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, rule, message: String| out.push(Violation { kind, rule, message });

    for names in [&g.nonterminals, &g.terminals] {
        let mut seen = BTreeSet::new();
        for name in names {
            if let Some(p) = name_problem(name) {
                push(ViolationKind::InvalidName, None, p);
            }
            if !seen.insert(name.clone()) {
                push(ViolationKind::DuplicateSymbol, None, format!("symbol `{name}` declared twice"));
            }
        }
    }
    let n = g.nonterminal_set();
    let t = g.terminal_set();
    for both in n.intersection(&t) {
        push(
            ViolationKind::Overlap,
            None,
            format!("N ∩ T ≠ ∅: `{both}` is declared as both nonterminal and terminal"),
        );
    }
    if !n.contains(&g.start) {
        push(ViolationKind::BadStart, None, format!("start symbol `{}` is not a declared nonterminal", g.start));
    }
    if g.rules.is_empty() {
        push(ViolationKind::NoRules, None, "no rules".into());
    }

    for (i, rule) in g.rules.iter().enumerate() {
        if rule.lhs.is_empty() {
            push(ViolationKind::EmptyLhs, Some(i), format!("empty left-hand side in `{rule}`"));
        } else if !rule.lhs.iter().any(|s| matches!(s, Symbol::Nonterminal(_))) {
            push(ViolationKind::NoNonterminalInLhs, Some(i), format!("left-hand side of `{rule}` has no nonterminal"));
        }
        if rule.rhs.is_empty() {
            push(ViolationKind::EmptyRhs, Some(i), format!("empty right-hand side in `{rule}`"));
        }
        if rule.lhs.len() > rule.rhs.len() {
            push(ViolationKind::Contracting, Some(i), format!("contracting rule `{rule}`"));
        }
        for s in rule.lhs.iter().chain(&rule.rhs) {
            match s {
                Symbol::Terminal(name) if !t.contains(name) => {
                    push(ViolationKind::UndeclaredSymbol, Some(i), format!("undeclared terminal `{name}` in `{rule}`"));
                }
                Symbol::Nonterminal(m) if !m.is_unmarked() || m.prime => {
                    push(ViolationKind::MarkedSymbol, Some(i), format!("marked symbol `{m}` in `{rule}`"));
                }
                Symbol::Nonterminal(m) if !n.contains(&m.base) => {
                    push(ViolationKind::UndeclaredSymbol, Some(i), format!("undeclared nonterminal `{}` in `{rule}`", m.base));
                }
                Symbol::Blocker => {
                    push(ViolationKind::MarkedSymbol, Some(i), format!("blocking symbol in `{rule}`"));
                }
                _ => {}
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("empty left-hand side")]
    EmptyLhs,
    #[error("empty right-hand side")]
    EmptyRhs,
    #[error("no rules")]
    NoRules,
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
    #[error("{0}")]
    Symbol(#[from] crate::symbol::EncodingError),
}

pub(crate) fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

/// One non-comment line with its 1-based number.
pub(crate) struct Line<'a> {
    pub number: usize,
    pub text: &'a str,
}

impl<'a> Line<'a> {
    /// 1-based character column of `part`, which must be a subslice of the line.
    pub fn column_of(&self, part: &str) -> usize {
        let offset = part.as_ptr() as usize - self.text.as_ptr() as usize;
        self.text[..offset].chars().count() + 1
    }

    /// Whitespace-separated tokens with their columns.
    pub fn tokens(&self, part: &'a str) -> Vec<(&'a str, usize)> {
        part.split_whitespace().map(|tok| (tok, self.column_of(tok))).collect()
    }
}

/// Non-empty, non-comment lines. Trailing `# ...` comments are kept.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let trimmed = l.trim();
        (!trimmed.is_empty() && !trimmed.starts_with('#')).then_some(Line { number: i + 1, text: l })
    })
}

/// Splits `key: value` header lines.
pub(crate) fn header<'a>(line: &Line<'a>, key: &str) -> Option<&'a str> {
    let t = line.text.trim_start();
    let rest = t.strip_prefix(key)?;
    rest.trim_start().strip_prefix(':')
}

pub(crate) struct Headers<'a> {
    pub nonterminals: Vec<Name>,
    pub terminals: Vec<Name>,
    pub start: Option<(&'a str, usize, usize)>,
}

/// Parses the `nonterminals:`/`terminals:`/`start:` block and returns the
/// remaining lines.
pub(crate) fn parse_headers<'a>(
    lines: &mut std::iter::Peekable<impl Iterator<Item = Line<'a>>>,
) -> Result<Headers<'a>, ParseError> {
    let mut h = Headers { nonterminals: Vec::new(), terminals: Vec::new(), start: None };
    let mut seen_n = false;
    let mut seen_t = false;
    while let Some(line) = lines.peek() {
        let names = |part: &'a str, line: &Line<'a>| -> Result<Vec<Name>, ParseError> {
            line.tokens(part)
                .into_iter()
                .map(|(tok, col)| match name_problem(tok) {
                    Some(p) => Err(err(line.number, col, ParseErrorKind::Syntax(p))),
                    None => Ok(Name::from(tok)),
                })
                .collect()
        };
        if let Some(rest) = header(line, "nonterminals") {
            h.nonterminals.extend(names(rest, line)?);
            seen_n = true;
        } else if let Some(rest) = header(line, "terminals") {
            h.terminals.extend(names(rest, line)?);
            seen_t = true;
        } else if let Some(rest) = header(line, "start") {
            let toks = line.tokens(rest);
            if toks.len() != 1 {
                return Err(err(line.number, line.column_of(rest), ParseErrorKind::Syntax("expected exactly one start symbol".into())));
            }
            h.start = Some((toks[0].0, line.number, toks[0].1));
        } else {
            break;
        }
        lines.next();
    }
    if !seen_n {
        return Err(err(1, 1, ParseErrorKind::MissingHeader("nonterminals")));
    }
    if !seen_t {
        return Err(err(1, 1, ParseErrorKind::MissingHeader("terminals")));
    }
    if h.start.is_none() {
        return Err(err(1, 1, ParseErrorKind::MissingHeader("start")));
    }
    Ok(h)
}

/// Parses the grammar text format.
pub fn parse_grammar(text: &str) -> Result<MonotoneGrammar, ParseError> {
    let mut lines = content_lines(text).peekable();
    let h = parse_headers(&mut lines)?;
    let n: BTreeSet<Name> = h.nonterminals.iter().cloned().collect();
    let t: BTreeSet<Name> = h.terminals.iter().cloned().collect();
    let (start_tok, sl, sc) = h.start.expect("checked by parse_headers");
    if !n.contains(start_tok) {
        return Err(err(sl, sc, ParseErrorKind::UndeclaredSymbol(start_tok.into())));
    }

    let last_line = text.lines().count().max(1);
    match lines.next() {
        Some(line) if header(&line, "rules").is_some_and(|r| r.trim().is_empty()) => {}
        Some(line) => {
            return Err(err(line.number, 1, ParseErrorKind::Syntax("expected `rules:`".into())));
        }
        None => return Err(err(last_line, 1, ParseErrorKind::MissingHeader("rules"))),
    }

    let lookup = |tok: &str, line: usize, col: usize| -> Result<Symbol, ParseError> {
        if n.contains(tok) {
            Ok(Symbol::nonterminal(tok))
        } else if t.contains(tok) {
            Ok(Symbol::terminal(tok))
        } else {
            Err(err(line, col, ParseErrorKind::UndeclaredSymbol(tok.into())))
        }
    };

    let mut rules = Vec::new();
    for line in lines {
        let Some((lhs, rhs)) = line.text.split_once("->") else {
            return Err(err(line.number, 1, ParseErrorKind::Syntax("expected `->`".into())));
        };
        let lhs_toks = line.tokens(lhs);
        let rhs_toks = line.tokens(rhs);
        if lhs_toks.is_empty() {
            return Err(err(line.number, 1, ParseErrorKind::EmptyLhs));
        }
        if rhs_toks.is_empty() {
            return Err(err(line.number, line.column_of(rhs), ParseErrorKind::EmptyRhs));
        }
        let side = |toks: Vec<(&str, usize)>| -> Result<Form, ParseError> {
            toks.into_iter().map(|(tok, col)| lookup(tok, line.number, col)).collect()
        };
        rules.push(Rule::new(side(lhs_toks)?, side(rhs_toks)?));
    }
    if rules.is_empty() {
        return Err(err(last_line, 1, ParseErrorKind::NoRules));
    }
    Ok(MonotoneGrammar {
        nonterminals: h.nonterminals,
        terminals: h.terminals,
        start: start_tok.into(),
        rules,
    })
}

pub fn serialize_grammar(g: &MonotoneGrammar) -> String {
    let mut out = String::new();
    let join = |names: &[Name]| names.iter().map(|n| n.as_ref()).collect::<Vec<_>>().join(" ");
    out.push_str(&format!("nonterminals: {}\n", join(&g.nonterminals)));
    out.push_str(&format!("terminals: {}\n", join(&g.terminals)));
    out.push_str(&format!("start: {}\n", g.start));
    out.push_str("rules:\n");
    for r in &g.rules {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

/// The grammar used as the running example throughout the test suite:
/// `A -> B C`, `C -> C D`, `B D -> D B`, `C D -> E D` plus one terminal rule
/// per nonterminal other than `A`.
pub fn example_grammar() -> MonotoneGrammar {
    parse_grammar(EXAMPLE_GRAMMAR).expect("example grammar parses")
}

pub const EXAMPLE_GRAMMAR: &str = "\
nonterminals: A B C D E
terminals: b c d e
start: A
rules:
A -> B C
C -> C D
B D -> D B
C D -> E D
B -> b
C -> c
D -> d
E -> e
";
