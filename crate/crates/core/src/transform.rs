//! From a Kuroda-form grammar to an equivalent two-component scattered
//! context grammar system, and the reduction of that system to rules of
//! degree at most two.
//!
//! Component 1 simulates one source rule per activation on a form whose
//! first symbol carries `△`, then rewrites every remaining plain symbol to
//! its barred variant. Component 2 walks a caret `∧` from left to right,
//! checking that every simulated right-hand side was placed contiguously,
//! and turns any symbol it skipped into the blocker `!`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::grammar::{validate_grammar, MonotoneGrammar, Rule, Violation};
use crate::kuroda::{is_kuroda, kuroda_shape, to_kuroda, KurodaShape};
use crate::symbol::{LeftMark as L, MarkedSymbol, RightMark as R, Symbol, TopMark};
use crate::system::{GrammarSystem, RuleLabel, ScatteredRule, Subset};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("invalid grammar: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGrammar(Vec<Violation>),
    #[error("rule {0} is not in Kuroda normal form")]
    NotKuroda(usize),
    #[error("system already contains auxiliary symbols (`{0}`)")]
    AlreadyReduced(String),
    #[error("degree-{degree} rule `{rule}` does not have the shape produced by the construction")]
    UnexpectedRule { rule: String, degree: usize },
}

/// Construction switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransformOptions {
    /// Also block leftover context-sensitive symbols `|X<` and `>X|` in
    /// component 2. Without these rules a skipped pair can survive the
    /// check and be consumed by a later one.
    pub strand_blocking: bool,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { strand_blocking: true }
    }
}

/// The symbols `N ∪ N_T` that marks are put on: plain nonterminals and
/// prime terminals.
fn bases(g: &MonotoneGrammar) -> Vec<MarkedSymbol> {
    let n = g.nonterminals.iter().map(|x| MarkedSymbol::plain(x.clone()));
    n.chain(g.terminals.iter().map(|a| MarkedSymbol::primed(a.clone()))).collect()
}

fn check_kuroda(g: &MonotoneGrammar) -> Result<(), TransformError> {
    let problems = validate_grammar(g);
    if !problems.is_empty() {
        return Err(TransformError::InvalidGrammar(problems));
    }
    match g.rules.iter().position(|r| kuroda_shape(r).is_none()) {
        Some(i) => Err(TransformError::NotKuroda(i + 1)),
        None => Ok(()),
    }
}

fn top(m: &MarkedSymbol, t: TopMark) -> MarkedSymbol {
    m.clone().with_top(t)
}

/// `X|` under `t`, or `|X|` when `t` is `None`.
fn cf(m: &MarkedSymbol, t: TopMark) -> MarkedSymbol {
    match t {
        TopMark::None => m.clone().barred(),
        _ => top(m, t).with_right(R::Bar),
    }
}

/// `|X<`, or `X<` under a first mark.
fn rcs(m: &MarkedSymbol, t: TopMark) -> MarkedSymbol {
    match t {
        TopMark::None => m.clone().with_left(L::Bar).with_right(R::Lt),
        _ => top(m, t).with_right(R::Lt),
    }
}

/// `>X|`
fn lcs(m: &MarkedSymbol) -> MarkedSymbol {
    m.clone().with_left(L::Gt).with_right(R::Bar)
}

/// `X∧|` or `X∧<` under `t`.
fn cur(m: &MarkedSymbol, t: TopMark, right: R) -> MarkedSymbol {
    top(m, t).with_right(right).with_caret()
}

/// Every symbol of the system alphabet, including `!`. Terminals are not
/// part of it.
pub fn build_marked_alphabet(g: &MonotoneGrammar) -> Result<BTreeSet<Symbol>, TransformError> {
    check_kuroda(g)?;
    let b = bases(g);
    let firsts = [TopMark::Plus, TopMark::Minus, TopMark::Star];
    let mut out = BTreeSet::from([Symbol::Blocker]);
    for x in &b {
        out.insert(x.clone().into());
        out.insert(cf(x, TopMark::None).into());
        out.insert(rcs(x, TopMark::None).into());
        out.insert(lcs(x).into());
        out.insert(top(x, TopMark::Plus).with_caret().into());
        for right in [R::Bar, R::Lt] {
            out.insert(cur(x, TopMark::None, right).into());
        }
        for t in firsts {
            out.insert(top(x, t).into());
            out.insert(cf(x, t).into());
            out.insert(rcs(x, t).into());
            for right in [R::Bar, R::Lt] {
                out.insert(cur(x, t, right).into());
            }
        }
    }
    Ok(out)
}

/// Counts of the alphabet parts, for reports and tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlphabetSizes {
    pub prime_terminals: usize,
    /// Size of each of `N_△`, `N_▽` and `N_◇`.
    pub per_first_mark: usize,
    pub total: usize,
}

pub fn alphabet_sizes(g: &MonotoneGrammar) -> Result<AlphabetSizes, TransformError> {
    let alphabet = build_marked_alphabet(g)?;
    let count = |pred: &dyn Fn(&MarkedSymbol) -> bool| {
        alphabet.iter().filter_map(Symbol::as_marked).filter(|m| pred(m)).count()
    };
    Ok(AlphabetSizes {
        prime_terminals: count(&|m| m.prime && m.is_unmarked()),
        per_first_mark: count(&|m| m.top == TopMark::Plus && !m.caret && m.left == L::None && m.right == R::None),
        total: alphabet.len(),
    })
}

fn rule(lhs: Vec<MarkedSymbol>, rhs: Vec<Vec<Symbol>>, label: RuleLabel) -> ScatteredRule {
    let lhs = lhs.into_iter().map(Symbol::from).collect();
    ScatteredRule::new(lhs, rhs, label).expect("construction rules are well formed")
}

fn frag(items: &[MarkedSymbol]) -> Vec<Symbol> {
    items.iter().cloned().map(Symbol::from).collect()
}

fn marked(s: &Symbol) -> MarkedSymbol {
    s.as_marked().expect("Kuroda nonterminal").clone()
}

/// Component 1: the terminal phase, one simulation family per source rule,
/// and phase-two marking.
pub fn build_component1(g: &MonotoneGrammar) -> Result<Vec<ScatteredRule>, TransformError> {
    check_kuroda(g)?;
    let b = bases(g);
    let mut out = Vec::new();
    let plain = |l: Subset| RuleLabel::new(l);
    for x in &b {
        out.push(rule(vec![top(x, TopMark::Plus)], vec![frag(&[top(x, TopMark::Star)])], plain(Subset::TerminalStart)));
    }
    for x in &b {
        for a in &g.terminals {
            out.push(rule(
                vec![top(x, TopMark::Star), MarkedSymbol::primed(a.clone())],
                vec![frag(&[top(x, TopMark::Star)]), vec![Symbol::Terminal(a.clone())]],
                plain(Subset::TerminalLetter),
            ));
        }
    }
    for a in &g.terminals {
        out.push(rule(
            vec![MarkedSymbol::primed(a.clone()).with_top(TopMark::Star)],
            vec![vec![Symbol::Terminal(a.clone())]],
            plain(Subset::TerminalEnd),
        ));
    }
    for p in &g.rules {
        simulation_rules(p, &b, &mut out);
    }
    let holders: Vec<MarkedSymbol> = b
        .iter()
        .map(|z| rcs(z, TopMark::Minus))
        .chain(b.iter().map(|z| cf(z, TopMark::Minus)))
        .collect();
    for y in &holders {
        for x in &b {
            out.push(rule(
                vec![y.clone(), x.clone()],
                vec![frag(std::slice::from_ref(y)), frag(&[cf(x, TopMark::None)])],
                plain(Subset::Phase2),
            ));
        }
    }
    Ok(out)
}

fn simulation_rules(p: &Rule, b: &[MarkedSymbol], out: &mut Vec<ScatteredRule>) {
    let shape = kuroda_shape(p).expect("checked Kuroda");
    let a = marked(&p.lhs[0]);
    let label = |s: Subset| RuleLabel::simulating(s, p);
    let none = TopMark::None;
    let minus = TopMark::Minus;
    // (△X, A...) -> (▽X|, rhs...) for every X, then the form where A is first
    let (subset, tail, first): (Subset, Vec<Vec<MarkedSymbol>>, Vec<MarkedSymbol>) = match shape {
        KurodaShape::Branch => {
            let (c, d) = (marked(&p.rhs[0]), marked(&p.rhs[1]));
            (Subset::AtoBC, vec![vec![cf(&c, none), cf(&d, none)]], vec![cf(&c, minus), cf(&d, none)])
        }
        KurodaShape::Chain => {
            let c = marked(&p.rhs[0]);
            (Subset::AtoB, vec![vec![cf(&c, none)]], vec![cf(&c, minus)])
        }
        KurodaShape::Terminal => {
            let t = MarkedSymbol::primed(p.rhs[0].base_name().expect("terminal").clone());
            (Subset::Atoa, vec![vec![cf(&t, none)]], vec![cf(&t, minus)])
        }
        KurodaShape::PairToPair => {
            let (c, d) = (marked(&p.rhs[0]), marked(&p.rhs[1]));
            let b2 = marked(&p.lhs[1]);
            for x in b {
                out.push(rule(
                    vec![top(x, TopMark::Plus), a.clone(), b2.clone()],
                    vec![frag(&[cf(x, minus)]), frag(&[rcs(&c, none)]), frag(&[lcs(&d)])],
                    label(Subset::ABtoCD),
                ));
            }
            out.push(rule(
                vec![top(&a, TopMark::Plus), b2],
                vec![frag(&[rcs(&c, minus)]), frag(&[lcs(&d)])],
                label(Subset::ABtoCD),
            ));
            return;
        }
    };
    for x in b {
        let mut rhs = vec![frag(&[cf(x, minus)])];
        rhs.extend(tail.iter().map(|f| frag(f)));
        out.push(rule(vec![top(x, TopMark::Plus), a.clone()], rhs, label(subset.clone())));
    }
    out.push(rule(vec![top(&a, TopMark::Plus)], vec![frag(&first)], label(subset)));
}

/// Component 2: the left-to-right check and the blocking rules.
pub fn build_component2(g: &MonotoneGrammar, opts: TransformOptions) -> Result<Vec<ScatteredRule>, TransformError> {
    check_kuroda(g)?;
    let b = bases(g);
    let mut out = Vec::new();
    let l = RuleLabel::new;
    let (none, plus, minus) = (TopMark::None, TopMark::Plus, TopMark::Minus);
    for right in [R::Bar, R::Lt] {
        for x in &b {
            let from = top(x, minus).with_right(right);
            out.push(rule(vec![from], vec![frag(&[cur(x, plus, right)])], l(Subset::Init)));
        }
    }
    // (current A, partner B) -> (A, B∧ ...) for the three adjacency shapes
    let pairs = |t: TopMark, subset: Subset, out: &mut Vec<ScatteredRule>| {
        for a in &b {
            for bb in &b {
                let after = top(a, t);
                let shapes = [
                    (cur(a, t, R::Bar), cf(bb, none), R::Bar),
                    (cur(a, t, R::Lt), lcs(bb), R::Bar),
                    (cur(a, t, R::Bar), rcs(bb, none), R::Lt),
                ];
                for (current, partner, right) in shapes {
                    out.push(rule(
                        vec![current, partner],
                        vec![frag(std::slice::from_ref(&after)), frag(&[cur(bb, none, right)])],
                        l(subset.clone()),
                    ));
                }
            }
        }
    };
    pairs(none, Subset::Check, &mut out);
    pairs(plus, Subset::CheckFirst, &mut out);
    for a in &b {
        out.push(rule(vec![top(a, plus).with_caret()], vec![frag(&[top(a, plus)])], l(Subset::End)));
    }
    for a in &b {
        for bb in &b {
            out.push(rule(
                vec![top(a, plus), cur(bb, none, R::Bar)],
                vec![frag(&[top(a, plus)]), frag(std::slice::from_ref(bb))],
                l(Subset::End),
            ));
        }
    }
    for a in &b {
        out.push(rule(vec![cur(a, plus, R::Bar)], vec![frag(&[top(a, plus)])], l(Subset::End)));
    }
    for x in &b {
        out.push(rule(vec![cf(x, none)], vec![vec![Symbol::Blocker]], l(Subset::Block)));
    }
    if opts.strand_blocking {
        for x in &b {
            for stranded in [rcs(x, none), lcs(x)] {
                out.push(rule(vec![stranded], vec![vec![Symbol::Blocker]], l(Subset::BlockContext)));
            }
        }
    }
    Ok(out)
}

/// Builds the system for `g`, converting to Kuroda normal form first when
/// needed.
pub fn transform_csg_to_scgs(g: &MonotoneGrammar) -> Result<GrammarSystem, TransformError> {
    transform_with(g, TransformOptions::default())
}

pub fn transform_with(g: &MonotoneGrammar, opts: TransformOptions) -> Result<GrammarSystem, TransformError> {
    let converted;
    let g = if is_kuroda(g) {
        g
    } else {
        converted = to_kuroda(g).map_err(|e| TransformError::InvalidGrammar(e.0))?;
        &converted
    };
    let p1 = build_component1(g)?;
    let p2 = build_component2(g, opts)?;
    Ok(GrammarSystem {
        nonterminals: g.nonterminals.clone(),
        terminals: g.terminals.clone(),
        start: MarkedSymbol::plain(g.start.clone()).with_top(TopMark::Plus).into(),
        components: vec![p1, p2],
    })
}

fn aux_symbol(s: &Symbol) -> Option<&MarkedSymbol> {
    s.as_marked().filter(|m| m.top.is_auxiliary())
}

/// Replaces every degree-3 rule `(△X, A, B) -> (▽X|, |C<, >D|)` by three
/// degree-2 rules through `~|X|`, `1|C<` and `2>D|`. The `1`/`2` marks are
/// tagged per replaced rule so that two unfinished replacements never
/// exchange partners.
pub fn reduce_to_degree2(sys: &GrammarSystem) -> Result<GrammarSystem, TransformError> {
    if let Some(s) = sys.rules().flat_map(ScatteredRule::symbols).find_map(aux_symbol) {
        return Err(TransformError::AlreadyReduced(s.to_string()));
    }
    let mut tag = 0u32;
    let mut components = Vec::with_capacity(sys.components.len());
    for comp in &sys.components {
        let mut out = Vec::with_capacity(comp.len());
        for r in comp {
            match r.degree() {
                0..=2 => out.push(r.clone()),
                3 => {
                    tag += 1;
                    out.extend(split_rule(r, tag)?);
                }
                degree => return Err(TransformError::UnexpectedRule { rule: r.to_string(), degree }),
            }
        }
        components.push(out);
    }
    Ok(GrammarSystem { components, ..sys.clone() })
}

fn split_rule(r: &ScatteredRule, tag: u32) -> Result<[ScatteredRule; 3], TransformError> {
    let bad = || TransformError::UnexpectedRule { rule: r.to_string(), degree: r.degree() };
    let single = |f: &Vec<Symbol>| match f.as_slice() {
        [Symbol::Nonterminal(m)] => Some(m.clone()),
        _ => None,
    };
    let lhs: Vec<MarkedSymbol> = r.lhs().iter().filter_map(|s| s.as_marked().cloned()).collect();
    let rhs: Vec<MarkedSymbol> = r.rhs().iter().filter_map(single).collect();
    let ([x, a, b], [mx, c, d]) = (&lhs[..], &rhs[..]) else { return Err(bad()) };
    let x0 = x.unmarked();
    let shape_ok = x.top == TopMark::Plus
        && *x == top(&x0, TopMark::Plus)
        && *mx == cf(&x0, TopMark::Minus)
        && c.left == L::Bar
        && c.right == R::Lt
        && d.left == L::Gt
        && d.right == R::Bar
        && !c.caret
        && !d.caret
        && c.top == TopMark::None
        && d.top == TopMark::None;
    if !shape_ok {
        return Err(bad());
    }
    let tilde = cf(&x0, TopMark::None).with_top(TopMark::Tilde);
    let one = c.clone().with_top(TopMark::One(tag));
    let two = d.clone().with_top(TopMark::Two(tag));
    let source = r.label().source.clone();
    let label = |s: Subset| RuleLabel { subset: s, source: source.clone() };
    Ok([
        rule(vec![x.clone(), a.clone()], vec![frag(std::slice::from_ref(&tilde)), frag(std::slice::from_ref(&one))], label(Subset::ReducedOpen)),
        rule(vec![one, b.clone()], vec![frag(std::slice::from_ref(c)), frag(std::slice::from_ref(&two))], label(Subset::ReducedPair)),
        rule(vec![tilde, two], vec![frag(std::slice::from_ref(mx)), frag(std::slice::from_ref(d))], label(Subset::ReducedClose)),
    ])
}

/// Rules per family, in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleCount {
    pub component: usize,
    pub subset: Subset,
    pub rules: usize,
    pub degrees: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleCountReport {
    pub rows: Vec<RuleCount>,
    pub max_degree: usize,
}

impl RuleCountReport {
    /// Total number of rules labelled `subset` across components.
    pub fn count(&self, subset: &Subset) -> usize {
        self.rows.iter().filter(|r| r.subset == *subset).map(|r| r.rules).sum()
    }

    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.rules).sum()
    }
}

pub fn rule_count_report(sys: &GrammarSystem) -> RuleCountReport {
    let mut rows: Vec<RuleCount> = Vec::new();
    for (ci, comp) in sys.components.iter().enumerate() {
        for r in comp {
            let subset = &r.label().subset;
            let row = match rows.iter_mut().position(|row| row.component == ci + 1 && row.subset == *subset) {
                Some(i) => &mut rows[i],
                None => {
                    rows.push(RuleCount { component: ci + 1, subset: subset.clone(), rules: 0, degrees: BTreeSet::new() });
                    rows.last_mut().expect("just pushed")
                }
            };
            row.rules += 1;
            row.degrees.insert(r.degree());
        }
    }
    RuleCountReport { rows, max_degree: sys.max_degree() }
}

impl fmt::Display for RuleCountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:<16} {:>6}  degrees", "component", "subset", "rules")?;
        for r in &self.rows {
            let d: Vec<String> = r.degrees.iter().map(|d| d.to_string()).collect();
            writeln!(f, "{:<10} {:<16} {:>6}  {}", r.component, r.subset.name(), r.rules, d.join(","))?;
        }
        write!(f, "total {} rules, max degree {}", self.total(), self.max_degree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::example_grammar;

    fn find<'a>(rules: &'a [ScatteredRule], text: &str) -> Option<&'a ScatteredRule> {
        rules.iter().find(|r| r.to_string() == text)
    }

    #[test]
    fn alphabet_counts_for_the_example() {
        let s = alphabet_sizes(&example_grammar()).unwrap();
        assert_eq!(s.prime_terminals, 4);
        assert_eq!(s.per_first_mark, 9);
        assert!(build_marked_alphabet(&example_grammar()).unwrap().contains(&Symbol::Blocker));
    }

    #[test]
    fn one_symbol_alphabet() {
        let g = crate::grammar::parse_grammar("nonterminals: S\nterminals:\nstart: S\nrules:\nS -> S\n");
        // a grammar needs a terminal rule to be useful, but the alphabet is still defined
        if let Ok(g) = g {
            let s = alphabet_sizes(&g).unwrap();
            assert_eq!(s.prime_terminals, 0);
            assert_eq!(s.per_first_mark, 1);
        }
    }

    #[test]
    fn example_rule_families() {
        let g = example_grammar();
        let p1 = build_component1(&g).unwrap();
        let branch = p1.iter().filter(|r| r.label().subset == Subset::AtoBC && r.label().source.as_deref() == Some("A -> B C"));
        assert_eq!(branch.count(), 10);
        assert!(find(&p1, "([+.A...]) -> ([-.B..|] [.|C..|])").is_some());
        assert!(find(&p1, "([+.B...], D) -> ([-.D..<], [.>B..|])").is_some());
        assert!(find(&p1, "([+.B...], C, D) -> ([-.B..|], [.|E..<], [.>D..|])").is_some());
        let phase2 = p1.iter().filter(|r| r.label().subset == Subset::Phase2).count();
        assert_eq!(phase2, 18 * 9);
        let p2 = build_component2(&g, TransformOptions::default()).unwrap();
        assert!(find(&p2, "([-.B..|]) -> ([+.B.^|])").is_some());
        assert!(find(&p2, "([.|E..<]) -> (!)").is_some());
        assert!(find(&p2, "([..E.^<], [.>D..|]) -> (E, [..D.^|])").is_some());
        assert!(find(&p2, "([.|C..|]) -> (!)").is_some());
    }

    #[test]
    fn counts_by_family() {
        let sys = transform_csg_to_scgs(&example_grammar()).unwrap();
        let report = rule_count_report(&sys);
        assert_eq!(report.count(&Subset::Init), 18);
        assert_eq!(report.count(&Subset::Block), 9);
        assert_eq!(report.max_degree, 3);
        let three: Vec<_> = sys.rules().filter(|r| r.degree() == 3).collect();
        assert_eq!(three.len(), 18);
        assert!(three.iter().all(|r| r.label().subset == Subset::ABtoCD));
    }

    #[test]
    fn reduction_replaces_each_degree_three_rule() {
        let sys = transform_csg_to_scgs(&example_grammar()).unwrap();
        let reduced = reduce_to_degree2(&sys).unwrap();
        assert_eq!(reduced.max_degree(), 2);
        let report = rule_count_report(&reduced);
        let new = report.count(&Subset::ReducedOpen) + report.count(&Subset::ReducedPair) + report.count(&Subset::ReducedClose);
        assert_eq!(new, 54);
        assert_eq!(reduced.rules().count(), sys.rules().count() + 54 - 18);
        assert!(matches!(reduce_to_degree2(&reduced), Err(TransformError::AlreadyReduced(_))));
    }

    #[test]
    fn reduction_is_identity_without_degree_three_rules() {
        let g = crate::grammar::parse_grammar("nonterminals: S\nterminals: a\nstart: S\nrules:\nS -> a\n").unwrap();
        let sys = transform_csg_to_scgs(&g).unwrap();
        assert_eq!(reduce_to_degree2(&sys).unwrap(), sys);
    }

    #[test]
    fn every_rule_uses_the_alphabet() {
        let g = example_grammar();
        let alphabet = build_marked_alphabet(&g).unwrap();
        let sys = transform_csg_to_scgs(&g).unwrap();
        for r in sys.rules() {
            for s in r.symbols() {
                assert!(s.is_terminal() || alphabet.contains(s), "{s} in {r}");
            }
        }
    }
}
