//! Conversion of monotone grammars to Kuroda normal form.
//!
//! Every output rule has one of the shapes `AB -> CD`, `A -> CD`, `A -> C`
//! or `A -> a`. The conversion proceeds rule by rule:
//!
//! 1. terminals used anywhere except in `A -> a` rules are replaced by fresh
//!    nonterminals `a#k` with `a#k -> a`;
//! 2. `A -> X1 … Xk` with `k ≥ 3` becomes a right-branching chain of
//!    `A -> CD` rules;
//! 3. `X1 … Xm -> Y1 … Yk` with `2 ≤ m < k` first moves the surplus into a
//!    fresh symbol `V` (`X1 … Xm -> Y1 … Ym-1 V`, `V -> Ym … Yk`);
//! 4. length-preserving `X1 … Xm -> Y1 … Ym` with `m ≥ 3` becomes a cascade
//!    of `AB -> CD` rules: a left-to-right pass consumes the `Xi` into
//!    rule-private symbols `Zi`, and a right-to-left pass releases the `Yi`
//!    through rule-private symbols `Wi`.
//!
//! Fresh names are `<name>#<k>` with one counter per conversion, skipping any
//! name already in use, so the output is reproducible byte for byte.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::grammar::{validate_grammar, MonotoneGrammar, Rule, Violation};
use crate::symbol::{Name, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KurodaShape {
    /// `AB -> CD`
    PairToPair,
    /// `A -> CD`
    Branch,
    /// `A -> C`
    Chain,
    /// `A -> a`
    Terminal,
}

pub fn kuroda_shape(rule: &Rule) -> Option<KurodaShape> {
    let nt = |s: &Symbol| matches!(s, Symbol::Nonterminal(m) if m.is_unmarked() && !m.prime);
    let all_nt = |side: &[Symbol]| side.iter().all(nt);
    match (rule.lhs.as_slice(), rule.rhs.as_slice()) {
        (l @ [_, _], r @ [_, _]) if all_nt(l) && all_nt(r) => Some(KurodaShape::PairToPair),
        (l @ [_], r @ [_, _]) if all_nt(l) && all_nt(r) => Some(KurodaShape::Branch),
        ([a], [c]) if nt(a) && nt(c) => Some(KurodaShape::Chain),
        ([a], [Symbol::Terminal(_)]) if nt(a) => Some(KurodaShape::Terminal),
        _ => None,
    }
}

/// Index of the first rule not in Kuroda form.
pub fn first_non_kuroda_rule(g: &MonotoneGrammar) -> Option<usize> {
    g.rules.iter().position(|r| kuroda_shape(r).is_none())
}

pub fn is_kuroda(g: &MonotoneGrammar) -> bool {
    first_non_kuroda_rule(g).is_none()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("grammar is not a valid monotone grammar: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct InvalidGrammar(pub Vec<Violation>);

struct Fresh {
    used: HashSet<Name>,
    counter: usize,
    created: Vec<Name>,
}

impl Fresh {
    fn new(g: &MonotoneGrammar) -> Self {
        Fresh {
            used: g.nonterminals.iter().chain(&g.terminals).cloned().collect(),
            counter: 0,
            created: Vec::new(),
        }
    }

    fn symbol(&mut self, prefix: &str) -> Symbol {
        loop {
            self.counter += 1;
            let name: Name = format!("{prefix}#{}", self.counter).into();
            if self.used.insert(name.clone()) {
                self.created.push(name.clone());
                return Symbol::Nonterminal(crate::symbol::MarkedSymbol::plain(name));
            }
        }
    }
}

fn prefix_of(s: &Symbol) -> String {
    s.base_name().map(|n| n.to_string()).unwrap_or_else(|| "X".into())
}

/// Converts `g` to an equivalent grammar in Kuroda normal form.
pub fn to_kuroda(g: &MonotoneGrammar) -> Result<MonotoneGrammar, InvalidGrammar> {
    let report = validate_grammar(g);
    if !report.is_empty() {
        return Err(InvalidGrammar(report));
    }
    if is_kuroda(g) {
        return Ok(g.clone());
    }
    let mut fresh = Fresh::new(g);

    // terminals that must be lifted
    let lifted: BTreeSet<Name> = g
        .rules
        .iter()
        .filter(|r| kuroda_shape(r) != Some(KurodaShape::Terminal))
        .flat_map(|r| r.lhs.iter().chain(&r.rhs))
        .filter_map(|s| match s {
            Symbol::Terminal(n) => Some(n.clone()),
            _ => None,
        })
        .collect();
    let mut stand_ins: Vec<(Name, Symbol)> = Vec::new();
    for t in &g.terminals {
        if lifted.contains(t) {
            stand_ins.push((t.clone(), fresh.symbol(t)));
        }
    }
    let lift = |s: &Symbol| -> Symbol {
        match s {
            Symbol::Terminal(n) => stand_ins
                .iter()
                .find(|(t, _)| t == n)
                .map(|(_, nt)| nt.clone())
                .unwrap_or_else(|| s.clone()),
            _ => s.clone(),
        }
    };

    let mut rules = Vec::new();
    for rule in &g.rules {
        let lhs: Vec<Symbol> = rule.lhs.iter().map(&lift).collect();
        let rhs: Vec<Symbol> = rule.rhs.iter().map(&lift).collect();
        convert(lhs, rhs, &mut fresh, &mut rules);
    }
    for (t, nt) in &stand_ins {
        rules.push(Rule::new(vec![nt.clone()], vec![Symbol::Terminal(t.clone())]));
    }

    let mut nonterminals = g.nonterminals.clone();
    nonterminals.extend(fresh.created);
    Ok(MonotoneGrammar { nonterminals, terminals: g.terminals.clone(), start: g.start.clone(), rules })
}

fn convert(lhs: Vec<Symbol>, rhs: Vec<Symbol>, fresh: &mut Fresh, out: &mut Vec<Rule>) {
    let m = lhs.len();
    let k = rhs.len();
    if m == 1 {
        split_chain(lhs.into_iter().next().expect("m == 1"), rhs, fresh, out);
        return;
    }
    if k > m {
        let surplus = fresh.symbol(&prefix_of(&lhs[0]));
        let mut head: Vec<Symbol> = rhs[..m - 1].to_vec();
        head.push(surplus.clone());
        convert(lhs, head, fresh, out);
        split_chain(surplus, rhs[m - 1..].to_vec(), fresh, out);
        return;
    }
    if m == 2 {
        out.push(Rule::new(lhs, rhs));
        return;
    }
    cascade(lhs, rhs, fresh, out);
}

/// `A -> X1 … Xk` as `A -> X1 V1`, `V1 -> X2 V2`, …, `Vk-2 -> Xk-1 Xk`.
fn split_chain(lhs: Symbol, mut rhs: Vec<Symbol>, fresh: &mut Fresh, out: &mut Vec<Rule>) {
    let prefix = prefix_of(&lhs);
    let mut left = lhs;
    while rhs.len() > 2 {
        let next = fresh.symbol(&prefix);
        let first = rhs.remove(0);
        out.push(Rule::new(vec![left], vec![first, next.clone()]));
        left = next;
    }
    out.push(Rule::new(vec![left], rhs));
}

/// Length-preserving `X1 … Xm -> Y1 … Ym`, `m ≥ 3`:
///
/// ```text
/// X1 X2     -> Z1 Z2
/// Zi Xi+1   -> Zi Zi+1        2 ≤ i ≤ m-2
/// Zm-1 Xm   -> Wm-1 Ym
/// Zi-1 Wi   -> Wi-1 Yi        i = m-1 … 2
/// W1        -> Y1
/// ```
fn cascade(lhs: Vec<Symbol>, rhs: Vec<Symbol>, fresh: &mut Fresh, out: &mut Vec<Rule>) {
    let m = lhs.len();
    let prefix = prefix_of(&lhs[0]);
    let z: Vec<Symbol> = (0..m - 1).map(|_| fresh.symbol(&prefix)).collect();
    let w: Vec<Symbol> = (0..m - 1).map(|_| fresh.symbol(&prefix)).collect();
    // z[i], w[i] stand for Z(i+1), W(i+1)
    out.push(Rule::new(vec![lhs[0].clone(), lhs[1].clone()], vec![z[0].clone(), z[1].clone()]));
    for i in 1..m - 2 {
        out.push(Rule::new(vec![z[i].clone(), lhs[i + 1].clone()], vec![z[i].clone(), z[i + 1].clone()]));
    }
    out.push(Rule::new(
        vec![z[m - 2].clone(), lhs[m - 1].clone()],
        vec![w[m - 2].clone(), rhs[m - 1].clone()],
    ));
    for i in (1..m - 1).rev() {
        out.push(Rule::new(vec![z[i - 1].clone(), w[i].clone()], vec![w[i - 1].clone(), rhs[i].clone()]));
    }
    out.push(Rule::new(vec![w[0].clone()], vec![rhs[0].clone()]));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{enumerate_csg_language, SearchBudget};
    use crate::grammar::{example_grammar, parse_grammar};

    fn grammar(text: &str) -> MonotoneGrammar {
        parse_grammar(text).unwrap()
    }

    #[test]
    fn example_is_already_kuroda() {
        let g = example_grammar();
        assert!(is_kuroda(&g));
        assert_eq!(to_kuroda(&g).unwrap(), g);
        let shapes: Vec<_> = g.rules.iter().map(|r| kuroda_shape(r).unwrap()).collect();
        assert_eq!(shapes[0], KurodaShape::Branch);
        assert_eq!(shapes[2], KurodaShape::PairToPair);
        assert_eq!(shapes[4], KurodaShape::Terminal);
    }

    #[test]
    fn single_terminal_rule_is_unchanged() {
        let g = grammar("nonterminals: A\nterminals: a\nstart: A\nrules:\nA -> a\n");
        assert!(is_kuroda(&g));
        assert_eq!(to_kuroda(&g).unwrap(), g);
    }

    #[test]
    fn offending_rules_are_located() {
        let g = grammar("nonterminals: A B C D E\nterminals: a\nstart: A\nrules:\nA -> B C\nA -> B C D\n");
        assert_eq!(first_non_kuroda_rule(&g), Some(1));
        let g = grammar("nonterminals: A B C D E\nterminals: a\nstart: A\nrules:\nA B -> C D E\n");
        assert_eq!(first_non_kuroda_rule(&g), Some(0));
    }

    #[test]
    fn three_symbol_rule_becomes_cascade() {
        let g = grammar(
            "nonterminals: S A B C D\nterminals: a b c d\nstart: S\nrules:\nS -> A B C\nA B C -> A B D\nA -> a\nB -> b\nC -> c\nD -> d\n",
        );
        let k = to_kuroda(&g).unwrap();
        assert!(is_kuroda(&k));
        let budget = SearchBudget::with_max_len(4);
        let before = enumerate_csg_language(&g, &budget).unwrap();
        let after = enumerate_csg_language(&k, &budget).unwrap();
        assert!(!before.truncated && !after.truncated);
        assert_eq!(before.words, after.words);
        assert_eq!(before.words.len(), 2);
    }

    #[test]
    fn fresh_names_avoid_user_names() {
        let g = grammar("nonterminals: S a#1\nterminals: a\nstart: S\nrules:\nS -> a a a\na#1 -> a\n");
        let k = to_kuroda(&g).unwrap();
        let names: BTreeSet<_> = k.nonterminals.iter().cloned().collect();
        assert_eq!(names.len(), k.nonterminals.len());
        assert!(k.nonterminals.iter().any(|n| n.as_ref() == "a#2"));
    }

    #[test]
    fn conversion_is_deterministic() {
        let g = grammar("nonterminals: S A\nterminals: a b\nstart: S\nrules:\nS -> a A b\na A b -> a a b b\nA -> a\n");
        assert_eq!(to_kuroda(&g).unwrap(), to_kuroda(&g).unwrap());
    }

    #[test]
    fn invalid_input_is_rejected() {
        let g = grammar("nonterminals: A B C\nterminals: a\nstart: A\nrules:\nA B -> C\n");
        assert!(to_kuroda(&g).is_err());
    }
}
