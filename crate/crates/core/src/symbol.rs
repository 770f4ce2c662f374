//! Symbols and the mark calculus of the grammar-system alphabet.
//!
//! A [`MarkedSymbol`] is a base name decorated with up to five marks: a top
//! mark (`△`, `▽`, `◇` and the auxiliary `~`, `1`, `2`), a left side mark
//! (`|` or `>`), a right side mark (`|` or `<`), the caret `∧` that tags the
//! current symbol of a checking pass, and the prime `′` that turns a terminal
//! `a` into the nonterminal stand-in `a′`. Unmarked, unprimed symbols are the
//! plain nonterminals of the source grammar.
//!
//! Every symbol has a compact text form used by the file formats and traces:
//! `[t l BASE p c r]` written without spaces, `.` standing for "no mark".

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Shared, immutable symbol name.
pub type Name = Arc<str>;

/// Characters that may not appear in user symbol names.
pub const RESERVED_CHARS: &[char] = &[
    '[', ']', '(', ')', ',', '!', '\'', '^', '|', '<', '>', '+', '-', '*', '~', '.', ':',
];

/// Returns `None` when `name` is usable as a symbol name, otherwise a short
/// reason.
pub fn name_problem(name: &str) -> Option<String> {
    if name.is_empty() {
        return Some("empty symbol name".into());
    }
    if name.starts_with('#') {
        return Some(format!("symbol name `{name}` starts with `#`"));
    }
    if let Some(c) = name.chars().find(|c| c.is_whitespace() || RESERVED_CHARS.contains(c)) {
        return Some(format!("symbol name `{name}` contains reserved character `{c}`"));
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Nonterminal,
    Terminal,
}

/// A declared grammar symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseSymbol {
    pub name: Name,
    pub kind: SymbolKind,
}

/// Top mark. `One` and `Two` carry the identity of the degree-3 rule they
/// were introduced for, so that two half-finished reductions cannot swap
/// partners.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopMark {
    #[default]
    None,
    /// `△`: the next source rule may be simulated.
    Plus,
    /// `▽`: the remaining symbols are being switched to their context-free variants.
    Minus,
    /// `◇`: terminal phase.
    Star,
    /// `~`: first symbol while a reduced degree-3 rule is in progress.
    Tilde,
    One(u32),
    Two(u32),
}

impl TopMark {
    /// `△`, `▽` or `◇`.
    pub fn is_first(self) -> bool {
        matches!(self, TopMark::Plus | TopMark::Minus | TopMark::Star)
    }

    pub fn is_auxiliary(self) -> bool {
        matches!(self, TopMark::Tilde | TopMark::One(_) | TopMark::Two(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LeftMark {
    #[default]
    None,
    Bar,
    Gt,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RightMark {
    #[default]
    None,
    Bar,
    Lt,
}

/// A nonterminal of a grammar system: a base name plus marks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarkedSymbol {
    pub base: Name,
    /// Set for `a′`, the nonterminal stand-in of terminal `a`.
    pub prime: bool,
    pub top: TopMark,
    pub left: LeftMark,
    pub right: RightMark,
    pub caret: bool,
}

impl MarkedSymbol {
    pub fn plain(base: impl Into<Name>) -> Self {
        MarkedSymbol {
            base: base.into(),
            prime: false,
            top: TopMark::None,
            left: LeftMark::None,
            right: RightMark::None,
            caret: false,
        }
    }

    pub fn primed(terminal: impl Into<Name>) -> Self {
        MarkedSymbol { prime: true, ..MarkedSymbol::plain(terminal) }
    }

    pub fn with_top(mut self, top: TopMark) -> Self {
        self.top = top;
        self
    }

    pub fn with_left(mut self, left: LeftMark) -> Self {
        self.left = left;
        self
    }

    pub fn with_right(mut self, right: RightMark) -> Self {
        self.right = right;
        self
    }

    pub fn with_caret(mut self) -> Self {
        self.caret = true;
        self
    }

    /// `|X|`
    pub fn barred(self) -> Self {
        self.with_left(LeftMark::Bar).with_right(RightMark::Bar)
    }

    /// The symbol with all marks removed (prime kept).
    pub fn unmarked(&self) -> Self {
        MarkedSymbol { base: self.base.clone(), prime: self.prime, ..MarkedSymbol::plain("") }
    }

    /// No marks at all; a plain nonterminal or a prime terminal.
    pub fn is_unmarked(&self) -> bool {
        self.top == TopMark::None
            && self.left == LeftMark::None
            && self.right == RightMark::None
            && !self.caret
    }
}

/// One position of a sentential form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Terminal(Name),
    Nonterminal(MarkedSymbol),
    /// The blocking symbol `!`; no rule rewrites it.
    Blocker,
}

impl Symbol {
    pub fn terminal(name: impl Into<Name>) -> Self {
        Symbol::Terminal(name.into())
    }

    /// A plain (unmarked) nonterminal.
    pub fn nonterminal(name: impl Into<Name>) -> Self {
        Symbol::Nonterminal(MarkedSymbol::plain(name))
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Symbol::Terminal(_))
    }

    pub fn as_marked(&self) -> Option<&MarkedSymbol> {
        match self {
            Symbol::Nonterminal(m) => Some(m),
            _ => None,
        }
    }

    /// Name of the underlying base symbol; `None` for the blocker.
    pub fn base_name(&self) -> Option<&Name> {
        match self {
            Symbol::Terminal(n) => Some(n),
            Symbol::Nonterminal(m) => Some(&m.base),
            Symbol::Blocker => None,
        }
    }
}

impl From<MarkedSymbol> for Symbol {
    fn from(m: MarkedSymbol) -> Self {
        Symbol::Nonterminal(m)
    }
}

/// A sentential form.
pub type Form = Vec<Symbol>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("invalid base: {0}")]
    Base(String),
    #[error("invalid {field} mark `{found}` in `{token}`")]
    Mark { field: &'static str, found: String, token: String },
    #[error("malformed symbol token `{0}`")]
    Malformed(String),
}

/// Encodes a symbol into its token form.
pub fn encode_symbol(sym: &Symbol) -> Result<String, EncodingError> {
    match sym {
        Symbol::Blocker => Ok("!".into()),
        Symbol::Terminal(n) => {
            if let Some(p) = name_problem(n) {
                return Err(EncodingError::Base(p));
            }
            Ok(n.to_string())
        }
        Symbol::Nonterminal(m) => encode_marked_symbol(m),
    }
}

pub fn encode_marked_symbol(m: &MarkedSymbol) -> Result<String, EncodingError> {
    if let Some(p) = name_problem(&m.base) {
        return Err(EncodingError::Base(p));
    }
    if m.is_unmarked() && !m.prime {
        return Ok(m.base.to_string());
    }
    let mut out = String::with_capacity(m.base.len() + 8);
    out.push('[');
    match m.top {
        TopMark::None => out.push('.'),
        TopMark::Plus => out.push('+'),
        TopMark::Minus => out.push('-'),
        TopMark::Star => out.push('*'),
        TopMark::Tilde => out.push('~'),
        TopMark::One(tag) => out.push_str(&format!("1:{tag}")),
        TopMark::Two(tag) => out.push_str(&format!("2:{tag}")),
    }
    out.push(match m.left {
        LeftMark::None => '.',
        LeftMark::Bar => '|',
        LeftMark::Gt => '>',
    });
    out.push_str(&m.base);
    out.push(if m.prime { '\'' } else { '.' });
    out.push(if m.caret { '^' } else { '.' });
    out.push(match m.right {
        RightMark::None => '.',
        RightMark::Bar => '|',
        RightMark::Lt => '<',
    });
    out.push(']');
    Ok(out)
}

/// Decodes a token. Bare names are looked up in `terminals`; anything not
/// listed there is a plain nonterminal.
pub fn decode_symbol(token: &str, terminals: &BTreeSet<Name>) -> Result<Symbol, EncodingError> {
    if token == "!" {
        return Ok(Symbol::Blocker);
    }
    if token.starts_with('[') {
        return decode_marked_symbol(token).map(Symbol::Nonterminal);
    }
    if let Some(p) = name_problem(token) {
        return Err(EncodingError::Base(p));
    }
    if terminals.contains(token) {
        Ok(Symbol::Terminal(token.into()))
    } else {
        Ok(Symbol::nonterminal(token))
    }
}

pub fn decode_marked_symbol(token: &str) -> Result<MarkedSymbol, EncodingError> {
    let malformed = || EncodingError::Malformed(token.to_string());
    let inner = token
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(malformed)?;
    let chars: Vec<char> = inner.chars().collect();
    if chars.len() < 6 {
        return Err(malformed());
    }
    let mark_err = |field: &'static str, c: char| EncodingError::Mark {
        field,
        found: c.to_string(),
        token: token.to_string(),
    };

    let (top, mut i) = match chars[0] {
        '.' => (TopMark::None, 1),
        '+' => (TopMark::Plus, 1),
        '-' => (TopMark::Minus, 1),
        '*' => (TopMark::Star, 1),
        '~' => (TopMark::Tilde, 1),
        c @ ('1' | '2') => {
            if chars.get(1) != Some(&':') {
                return Err(mark_err("top", c));
            }
            let digits: String = chars[2..].iter().take_while(|c| c.is_ascii_digit()).collect();
            let tag: u32 = digits.parse().map_err(|_| mark_err("top", c))?;
            let top = if c == '1' { TopMark::One(tag) } else { TopMark::Two(tag) };
            (top, 2 + digits.len())
        }
        c => return Err(mark_err("top", c)),
    };
    let left = match chars.get(i).copied().ok_or_else(malformed)? {
        '.' => LeftMark::None,
        '|' => LeftMark::Bar,
        '>' => LeftMark::Gt,
        c => return Err(mark_err("left", c)),
    };
    i += 1;
    if chars.len() < i + 4 {
        return Err(malformed());
    }
    let tail = &chars[chars.len() - 3..];
    let base: String = chars[i..chars.len() - 3].iter().collect();
    if let Some(p) = name_problem(&base) {
        return Err(EncodingError::Base(p));
    }
    let prime = match tail[0] {
        '.' => false,
        '\'' => true,
        c => return Err(mark_err("prime", c)),
    };
    let caret = match tail[1] {
        '.' => false,
        '^' => true,
        c => return Err(mark_err("caret", c)),
    };
    let right = match tail[2] {
        '.' => RightMark::None,
        '|' => RightMark::Bar,
        '<' => RightMark::Lt,
        c => return Err(mark_err("right", c)),
    };
    Ok(MarkedSymbol { base: base.into(), prime, top, left, right, caret })
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match encode_symbol(self) {
            Ok(s) => f.write_str(&s),
            Err(_) => write!(f, "<invalid {self:?}>"),
        }
    }
}

impl fmt::Display for MarkedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Symbol::Nonterminal(self.clone()).fmt(f)
    }
}

/// Renders a form as space-separated tokens.
pub fn display_form(form: &[Symbol]) -> String {
    let parts: Vec<String> = form.iter().map(|s| s.to_string()).collect();
    parts.join(" ")
}

/// Which part of the grammar-system alphabet a symbol belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolClass {
    /// `X`, a nonterminal of the source grammar.
    Plain,
    /// `a′`
    PrimeTerminal,
    /// `△X`, `▽X`, `◇X`
    First(TopMark),
    /// `|X|`, or `X|` under a first mark.
    ContextFree(TopMark),
    /// `|X<`, `>X|`, or `X<` under a first mark.
    ContextSensitive(TopMark),
    /// Caret-carrying current symbols, with or without a first mark.
    Current(TopMark),
    /// `~|X|`, `1|X<`, `2>X|` of the degree-2 reduction.
    Auxiliary,
    Blocker,
    Invalid,
}

/// Classifies `sym` against the source alphabets `nonterminals` and
/// `terminals`. Terminals themselves are not part of the nonterminal
/// alphabet and classify as `Invalid`.
pub fn classify(
    sym: &Symbol,
    nonterminals: &BTreeSet<Name>,
    terminals: &BTreeSet<Name>,
) -> SymbolClass {
    let m = match sym {
        Symbol::Blocker => return SymbolClass::Blocker,
        Symbol::Terminal(_) => return SymbolClass::Invalid,
        Symbol::Nonterminal(m) => m,
    };
    let base_ok = if m.prime {
        terminals.contains(&m.base)
    } else {
        nonterminals.contains(&m.base)
    };
    if !base_ok {
        return SymbolClass::Invalid;
    }
    use LeftMark as L;
    use RightMark as R;
    if m.top.is_auxiliary() {
        let shape_ok = !m.caret
            && match m.top {
                TopMark::Tilde => m.left == L::Bar && m.right == R::Bar,
                TopMark::One(_) => !m.prime && m.left == L::Bar && m.right == R::Lt,
                TopMark::Two(_) => !m.prime && m.left == L::Gt && m.right == R::Bar,
                _ => false,
            };
        return if shape_ok { SymbolClass::Auxiliary } else { SymbolClass::Invalid };
    }
    let top = m.top;
    let first = top.is_first();
    if m.caret {
        return match (m.left, m.right) {
            (L::None, R::Bar | R::Lt) => SymbolClass::Current(top),
            (L::None, R::None) if top == TopMark::Plus => SymbolClass::Current(top),
            _ => SymbolClass::Invalid,
        };
    }
    match (first, m.left, m.right) {
        (false, L::None, R::None) if m.prime => SymbolClass::PrimeTerminal,
        (false, L::None, R::None) => SymbolClass::Plain,
        (true, L::None, R::None) => SymbolClass::First(top),
        (false, L::Bar, R::Bar) | (true, L::None, R::Bar) => SymbolClass::ContextFree(top),
        (false, L::Bar, R::Lt) | (false, L::Gt, R::Bar) | (true, L::None, R::Lt) => {
            SymbolClass::ContextSensitive(top)
        }
        _ => SymbolClass::Invalid,
    }
}
