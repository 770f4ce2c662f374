//! Scattered context rules and cooperating distributed grammar systems.
//!
//! System files share the grammar header and add one section per component:
//!
//! ```text
//! nonterminals: A B C
//! terminals: b c
//! start: [+.A...]
//! component 1:
//! ([+.A...]) -> ([-.B..|] [.|C..|])   # P1_AtoBC {A -> B C}
//! component 2:
//! ([-.B..|]) -> ([+.B.^|])            # P2_init
//! ```
//!
//! A rule is written `(L1, L2) -> (R1a R1b, R2a)`: the k-th left-hand symbol
//! is rewritten to the k-th comma-separated right-hand fragment.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::grammar::{content_lines, err, header, parse_headers, ParseError, ParseErrorKind};
use crate::symbol::{decode_symbol, display_form, Form, Name, Symbol};

/// The rule family a generated rule belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subset {
    /// `(△X) -> (◇X)`
    TerminalStart,
    /// `(◇X, a′) -> (◇X, a)`
    TerminalLetter,
    /// `(◇a′) -> (a)`
    TerminalEnd,
    AtoBC,
    AtoB,
    Atoa,
    ABtoCD,
    Phase2,
    /// First of the three degree-2 rules replacing one degree-3 rule.
    ReducedOpen,
    ReducedPair,
    ReducedClose,
    Init,
    Check,
    CheckFirst,
    End,
    Block,
    /// Blocking of stranded context-sensitive symbols `|X<`, `>X|`.
    BlockContext,
    Other(String),
}

impl Subset {
    pub fn name(&self) -> &str {
        match self {
            Subset::TerminalStart => "P1_T1",
            Subset::TerminalLetter => "P1_T2",
            Subset::TerminalEnd => "P1_T3",
            Subset::AtoBC => "P1_AtoBC",
            Subset::AtoB => "P1_AtoB",
            Subset::Atoa => "P1_Atoa",
            Subset::ABtoCD => "P1_ABtoCD",
            Subset::Phase2 => "P1_phase2",
            Subset::ReducedOpen => "P1_ABtoCD_r1",
            Subset::ReducedPair => "P1_ABtoCD_r2",
            Subset::ReducedClose => "P1_ABtoCD_r3",
            Subset::Init => "P2_init",
            Subset::Check => "P2_check",
            Subset::CheckFirst => "P2_checkf",
            Subset::End => "P2_end",
            Subset::Block => "P2_block",
            Subset::BlockContext => "P2_block_cs",
            Subset::Other(s) => s,
        }
    }

    pub fn is_terminal_phase(&self) -> bool {
        matches!(self, Subset::TerminalStart | Subset::TerminalLetter | Subset::TerminalEnd)
    }

    /// Rules that perform (or open) the simulation of one source rule.
    pub fn is_simulation(&self) -> bool {
        matches!(
            self,
            Subset::AtoBC | Subset::AtoB | Subset::Atoa | Subset::ABtoCD | Subset::ReducedOpen
        )
    }
}

impl FromStr for Subset {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        const ALL: [Subset; 17] = [
            Subset::TerminalStart,
            Subset::TerminalLetter,
            Subset::TerminalEnd,
            Subset::AtoBC,
            Subset::AtoB,
            Subset::Atoa,
            Subset::ABtoCD,
            Subset::Phase2,
            Subset::ReducedOpen,
            Subset::ReducedPair,
            Subset::ReducedClose,
            Subset::Init,
            Subset::Check,
            Subset::CheckFirst,
            Subset::End,
            Subset::Block,
            Subset::BlockContext,
        ];
        Ok(ALL.into_iter().find(|k| k.name() == s).unwrap_or_else(|| Subset::Other(s.to_string())))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Provenance of a rule: its family and, when it simulates one, the source
/// grammar rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleLabel {
    pub subset: Subset,
    pub source: Option<String>,
}

impl RuleLabel {
    pub fn new(subset: Subset) -> Self {
        RuleLabel { subset, source: None }
    }

    pub fn simulating(subset: Subset, source: impl fmt::Display) -> Self {
        RuleLabel { subset, source: Some(source.to_string()) }
    }

    fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if text.is_empty() {
            return None;
        }
        let (subset, rest) = match text.split_once(char::is_whitespace) {
            Some((s, r)) => (s, r.trim()),
            None => (text, ""),
        };
        let source = rest
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .map(|s| s.trim().to_string());
        Some(RuleLabel { subset: subset.parse().unwrap_or_else(|e| match e {}), source })
    }
}

impl fmt::Display for RuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Some(src) => write!(f, "{} {{{}}}", self.subset, src),
            None => write!(f, "{}", self.subset),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule has an empty left-hand side")]
    EmptyLhs,
    #[error("left-hand side has {lhs} symbols but right-hand side has {rhs} fragments")]
    ArityMismatch { lhs: usize, rhs: usize },
    #[error("right-hand fragment {0} is empty")]
    EmptyFragment(usize),
    #[error("left-hand symbol `{0}` is not a nonterminal")]
    NotNonterminal(String),
}

/// `(A1, …, An) -> (α1, …, αn)` with every `αi` nonempty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScatteredRule {
    lhs: Form,
    rhs: Vec<Form>,
    label: RuleLabel,
}

impl ScatteredRule {
    pub fn new(lhs: Form, rhs: Vec<Form>, label: RuleLabel) -> Result<Self, RuleError> {
        if lhs.is_empty() {
            return Err(RuleError::EmptyLhs);
        }
        if lhs.len() != rhs.len() {
            return Err(RuleError::ArityMismatch { lhs: lhs.len(), rhs: rhs.len() });
        }
        if let Some(i) = rhs.iter().position(|f| f.is_empty()) {
            return Err(RuleError::EmptyFragment(i));
        }
        if let Some(s) = lhs.iter().find(|s| !matches!(s, Symbol::Nonterminal(_))) {
            return Err(RuleError::NotNonterminal(s.to_string()));
        }
        Ok(ScatteredRule { lhs, rhs, label })
    }

    pub fn lhs(&self) -> &[Symbol] {
        &self.lhs
    }

    pub fn rhs(&self) -> &[Form] {
        &self.rhs
    }

    pub fn label(&self) -> &RuleLabel {
        &self.label
    }

    pub fn degree(&self) -> usize {
        self.lhs.len()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.lhs.iter().chain(self.rhs.iter().flatten())
    }
}

impl fmt::Display for ScatteredRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<String> = self.lhs.iter().map(|s| s.to_string()).collect();
        let rhs: Vec<String> = self.rhs.iter().map(|frag| display_form(frag)).collect();
        write!(f, "({}) -> ({})", lhs.join(", "), rhs.join(", "))
    }
}

/// A CD grammar system working in t-mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarSystem {
    /// Base nonterminal names; marked variants are derived from these.
    pub nonterminals: Vec<Name>,
    pub terminals: Vec<Name>,
    pub start: Symbol,
    pub components: Vec<Vec<ScatteredRule>>,
}

impl GrammarSystem {
    pub fn rules(&self) -> impl Iterator<Item = &ScatteredRule> {
        self.components.iter().flatten()
    }

    pub fn max_degree(&self) -> usize {
        self.rules().map(ScatteredRule::degree).max().unwrap_or(0)
    }

    pub fn terminal_set(&self) -> BTreeSet<Name> {
        self.terminals.iter().cloned().collect()
    }

    pub fn nonterminal_set(&self) -> BTreeSet<Name> {
        self.nonterminals.iter().cloned().collect()
    }
}

/// Structural checks on a system; returns one message per violation.
pub fn validate_system(sys: &GrammarSystem) -> Vec<String> {
    let mut out = Vec::new();
    let n = sys.nonterminal_set();
    let t = sys.terminal_set();
    for both in n.intersection(&t) {
        out.push(format!("N ∩ T ≠ ∅: `{both}`"));
    }
    if sys.components.is_empty() {
        out.push("system has no components".into());
    }
    for (i, comp) in sys.components.iter().enumerate() {
        if comp.is_empty() {
            out.push(format!("component {} is empty", i + 1));
        }
    }
    let declared = |s: &Symbol| match s {
        Symbol::Terminal(name) => t.contains(name),
        Symbol::Nonterminal(m) if m.prime => t.contains(&m.base),
        Symbol::Nonterminal(m) => n.contains(&m.base),
        Symbol::Blocker => true,
    };
    if !matches!(sys.start, Symbol::Nonterminal(_)) || !declared(&sys.start) {
        out.push(format!("start symbol `{}` is not a declared nonterminal", sys.start));
    }
    for (ci, comp) in sys.components.iter().enumerate() {
        for rule in comp {
            if let Some(s) = rule.symbols().find(|s| !declared(s)) {
                out.push(format!("component {}: rule `{rule}` uses undeclared symbol `{s}`", ci + 1));
            }
        }
    }
    out
}

/// Parses the grammar-system text format.
pub fn parse_system(text: &str) -> Result<GrammarSystem, ParseError> {
    let mut lines = content_lines(text).peekable();
    let h = parse_headers(&mut lines)?;
    let terminals: BTreeSet<Name> = h.terminals.iter().cloned().collect();
    let (start_tok, sl, sc) = h.start.expect("checked by parse_headers");
    let start = decode_symbol(start_tok, &terminals).map_err(|e| err(sl, sc, e.into()))?;

    let mut components: Vec<Vec<ScatteredRule>> = Vec::new();
    for line in lines {
        let trimmed = line.text.trim_start();
        if let Some(rest) = trimmed.strip_prefix("component") {
            let idx = rest.trim().strip_suffix(':').map(str::trim).and_then(|d| d.parse::<usize>().ok());
            match idx {
                Some(k) if k == components.len() + 1 => components.push(Vec::new()),
                _ => {
                    return Err(err(
                        line.number,
                        1,
                        ParseErrorKind::Syntax(format!("expected `component {}:`", components.len() + 1)),
                    ))
                }
            }
            continue;
        }
        if header(&line, "rules").is_some() {
            return Err(err(line.number, 1, ParseErrorKind::Syntax("system files use `component k:` sections".into())));
        }
        let Some(current) = components.last_mut() else {
            return Err(err(line.number, 1, ParseErrorKind::Syntax("rule outside of a component section".into())));
        };
        current.push(parse_rule_line(&line, &terminals)?);
    }
    if components.iter().all(Vec::is_empty) {
        return Err(err(text.lines().count().max(1), 1, ParseErrorKind::NoRules));
    }
    Ok(GrammarSystem { nonterminals: h.nonterminals, terminals: h.terminals, start, components })
}

fn parse_rule_line(line: &crate::grammar::Line<'_>, terminals: &BTreeSet<Name>) -> Result<ScatteredRule, ParseError> {
    let syntax = |col: usize, msg: &str| err(line.number, col, ParseErrorKind::Syntax(msg.into()));
    let text = line.text;
    let (body, comment) = match text.find(" #").or_else(|| text.find("\t#")) {
        Some(i) => (&text[..i], Some(&text[i + 2..])),
        None => (text, None),
    };
    let open_l = body.find('(').ok_or_else(|| syntax(1, "expected `(`"))?;
    let close_l = body[open_l..].find(')').map(|i| i + open_l).ok_or_else(|| syntax(open_l + 1, "unclosed `(`"))?;
    let after = &body[close_l + 1..];
    let after_trim = after.trim_start();
    let arrow = after_trim.strip_prefix("->").ok_or_else(|| syntax(line.column_of(after), "expected `->`"))?;
    let arrow_off = body.len() - arrow.len();
    let open_r = arrow.find('(').map(|i| i + arrow_off).ok_or_else(|| syntax(arrow_off + 1, "expected `(`"))?;
    let close_r = body[open_r..].find(')').map(|i| i + open_r).ok_or_else(|| syntax(open_r + 1, "unclosed `(`"))?;
    if !body[close_r + 1..].trim().is_empty() {
        return Err(syntax(close_r + 2, "unexpected text after rule"));
    }

    let decode = |tok: &str, col: usize| decode_symbol(tok, terminals).map_err(|e| err(line.number, col, e.into()));
    let fragments = |inner: &str| -> Result<Vec<Form>, ParseError> {
        inner
            .split(',')
            .map(|frag| line.tokens(frag).into_iter().map(|(tok, col)| decode(tok, col)).collect())
            .collect()
    };
    let lhs_frags = fragments(&body[open_l + 1..close_l])?;
    let mut lhs = Vec::new();
    for frag in lhs_frags {
        if frag.len() != 1 {
            return Err(syntax(open_l + 1, "each left-hand position holds exactly one symbol"));
        }
        lhs.extend(frag);
    }
    let rhs = fragments(&body[open_r + 1..close_r])?;
    let label = comment.and_then(RuleLabel::parse).unwrap_or_else(|| RuleLabel::new(Subset::Other("rule".into())));
    ScatteredRule::new(lhs, rhs, label).map_err(|e| syntax(1, &e.to_string()))
}

pub fn serialize_system(sys: &GrammarSystem) -> String {
    let mut out = String::new();
    let join = |names: &[Name]| names.iter().map(|n| n.as_ref()).collect::<Vec<_>>().join(" ");
    out.push_str(&format!("nonterminals: {}\n", join(&sys.nonterminals)));
    out.push_str(&format!("terminals: {}\n", join(&sys.terminals)));
    out.push_str(&format!("start: {}\n", sys.start));
    for (i, comp) in sys.components.iter().enumerate() {
        out.push_str(&format!("component {}:\n", i + 1));
        for rule in comp {
            out.push_str(&format!("{rule}  # {}\n", rule.label()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{MarkedSymbol, RightMark, TopMark};

    fn s(name: &str) -> Symbol {
        Symbol::nonterminal(name)
    }

    #[test]
    fn rule_shape_is_checked() {
        let l = RuleLabel::new(Subset::Other("x".into()));
        assert_eq!(ScatteredRule::new(vec![], vec![], l.clone()), Err(RuleError::EmptyLhs));
        assert_eq!(
            ScatteredRule::new(vec![s("A")], vec![vec![s("B")], vec![s("C")]], l.clone()),
            Err(RuleError::ArityMismatch { lhs: 1, rhs: 2 })
        );
        assert_eq!(ScatteredRule::new(vec![s("A")], vec![vec![]], l.clone()), Err(RuleError::EmptyFragment(0)));
        assert!(matches!(
            ScatteredRule::new(vec![Symbol::terminal("a")], vec![vec![s("B")]], l),
            Err(RuleError::NotNonterminal(_))
        ));
    }

    #[test]
    fn parses_canonical_rule_syntax() {
        let text = "nonterminals: A B C D\nterminals: a\nstart: [+.A...]\ncomponent 1:\n([+.A...], [.>D..|]) -> ([-.B..|] [.|C..|], a)  # P1_AtoBC {A -> B C}\ncomponent 2:\n([-.B..|]) -> ([+.B.^|])\n";
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.components.len(), 2);
        let r = &sys.components[0][0];
        assert_eq!(r.degree(), 2);
        assert_eq!(r.rhs()[0].len(), 2);
        assert_eq!(r.rhs()[1], vec![Symbol::terminal("a")]);
        assert_eq!(r.label().subset, Subset::AtoBC);
        assert_eq!(r.label().source.as_deref(), Some("A -> B C"));
        assert_eq!(
            sys.start,
            Symbol::Nonterminal(MarkedSymbol::plain("A").with_top(TopMark::Plus))
        );
        assert_eq!(
            sys.components[1][0].lhs()[0],
            Symbol::Nonterminal(MarkedSymbol::plain("B").with_top(TopMark::Minus).with_right(RightMark::Bar))
        );
        assert!(validate_system(&sys).is_empty());
        assert_eq!(parse_system(&serialize_system(&sys)).unwrap(), sys);
    }

    #[test]
    fn rejects_out_of_order_components() {
        let text = "nonterminals: S\nterminals: a\nstart: S\ncomponent 2:\n(S) -> (a)\n";
        assert!(matches!(parse_system(text).unwrap_err().kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn validation_finds_undeclared_bases() {
        let text = "nonterminals: S\nterminals: a\nstart: S\ncomponent 1:\n(S) -> ([+.Q...])\n";
        let sys = parse_system(text).unwrap();
        assert_eq!(validate_system(&sys).len(), 1);
    }
}
