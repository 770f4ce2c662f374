//! One-step derivation semantics.
//!
//! Scattered context rules rewrite an order-preserving, not necessarily
//! contiguous, tuple of symbols; monotone rules rewrite a contiguous
//! substring. The functions here are generic over the symbol type so the
//! engine can run them on interned ids.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::grammar::Rule;
use crate::symbol::{Form, Symbol};
use crate::system::ScatteredRule;

/// Default cap on occurrences of one rule in one form.
pub const DEFAULT_OCCURRENCE_LIMIT: usize = 1_000_000;

/// Positions of the matched left-hand symbols, strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occurrence {
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("occurrence {positions:?} does not match the rule in this form")]
    StaleOccurrence { positions: Vec<usize> },
    #[error("left-hand side does not occur at position {0}")]
    Mismatch(usize),
    #[error("more than {0} occurrences of one rule in a single form")]
    TooManyOccurrences(usize),
}

/// Calls `visit` with every strictly increasing position tuple at which
/// `lhs` matches `form`, in lexicographic order. Stops early on `Break`.
pub fn for_each_occurrence<S: PartialEq>(
    lhs: &[S],
    form: &[S],
    mut visit: impl FnMut(&[usize]) -> ControlFlow<()>,
) {
    if lhs.is_empty() || lhs.len() > form.len() {
        return;
    }
    let mut positions = Vec::with_capacity(lhs.len());
    let _ = search(lhs, form, 0, &mut positions, &mut visit);
}

fn search<S: PartialEq>(
    lhs: &[S],
    form: &[S],
    from: usize,
    positions: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let k = positions.len();
    if k == lhs.len() {
        return visit(positions);
    }
    // leave room for the remaining lhs symbols
    let last = form.len() - (lhs.len() - k);
    for i in from..=last {
        if form[i] == lhs[k] {
            positions.push(i);
            let flow = search(lhs, form, i + 1, positions, visit);
            positions.pop();
            flow?;
        }
    }
    ControlFlow::Continue(())
}

/// All occurrences, failing once more than `limit` are found.
pub fn find_occurrences_limited<S: PartialEq>(
    lhs: &[S],
    form: &[S],
    limit: usize,
) -> Result<Vec<Occurrence>, RewriteError> {
    let mut out = Vec::new();
    let mut overflow = false;
    for_each_occurrence(lhs, form, |pos| {
        if out.len() == limit {
            overflow = true;
            return ControlFlow::Break(());
        }
        out.push(Occurrence { positions: pos.to_vec() });
        ControlFlow::Continue(())
    });
    if overflow {
        Err(RewriteError::TooManyOccurrences(limit))
    } else {
        Ok(out)
    }
}

/// Every occurrence of `rule` in `form`, in lexicographic order.
pub fn find_occurrences(rule: &ScatteredRule, form: &[Symbol]) -> Vec<Occurrence> {
    let mut out = Vec::new();
    for_each_occurrence(rule.lhs(), form, |pos| {
        out.push(Occurrence { positions: pos.to_vec() });
        ControlFlow::Continue(())
    });
    out
}

/// Replaces `form[positions[i]]` by `rhs[i]` for every `i`.
pub fn apply_scattered<S: Clone + PartialEq>(
    lhs: &[S],
    rhs: &[Vec<S>],
    form: &[S],
    positions: &[usize],
) -> Result<Vec<S>, RewriteError> {
    let stale = || RewriteError::StaleOccurrence { positions: positions.to_vec() };
    if positions.len() != lhs.len() || rhs.len() != lhs.len() {
        return Err(stale());
    }
    let ordered = positions.windows(2).all(|w| w[0] < w[1]);
    let in_range = positions.last().is_none_or(|&p| p < form.len());
    if !ordered || !in_range || positions.iter().zip(lhs).any(|(&p, s)| &form[p] != s) {
        return Err(stale());
    }
    let grow: usize = rhs.iter().map(|f| f.len()).sum::<usize>();
    let mut out = Vec::with_capacity(form.len() + grow - lhs.len());
    let mut next = 0;
    for (&p, frag) in positions.iter().zip(rhs) {
        out.extend_from_slice(&form[next..p]);
        out.extend_from_slice(frag);
        next = p + 1;
    }
    out.extend_from_slice(&form[next..]);
    Ok(out)
}

pub fn apply_scg_rule(rule: &ScatteredRule, form: &[Symbol], occ: &Occurrence) -> Result<Form, RewriteError> {
    apply_scattered(rule.lhs(), rule.rhs(), form, &occ.positions)
}

/// Replaces the contiguous `lhs` at `position` by `rhs`.
pub fn apply_contiguous<S: Clone + PartialEq>(
    lhs: &[S],
    rhs: &[S],
    form: &[S],
    position: usize,
) -> Result<Vec<S>, RewriteError> {
    let end = position + lhs.len();
    if end > form.len() || form[position..end] != *lhs {
        return Err(RewriteError::Mismatch(position));
    }
    let mut out = Vec::with_capacity(form.len() - lhs.len() + rhs.len());
    out.extend_from_slice(&form[..position]);
    out.extend_from_slice(rhs);
    out.extend_from_slice(&form[end..]);
    Ok(out)
}

pub fn apply_csg_rule(rule: &Rule, form: &[Symbol], position: usize) -> Result<Form, RewriteError> {
    apply_contiguous(&rule.lhs, &rule.rhs, form, position)
}

/// One-step successors of `form` under any rule of the set.
pub fn component_successors(rules: &[ScatteredRule], form: &[Symbol]) -> BTreeSet<Form> {
    let mut out = BTreeSet::new();
    for rule in rules {
        for_each_occurrence(rule.lhs(), form, |pos| {
            let next = apply_scattered(rule.lhs(), rule.rhs(), form, pos).expect("fresh occurrence applies");
            out.insert(next);
            ControlFlow::Continue(())
        });
    }
    out
}

/// One-step successors of `form` under a monotone grammar's rules.
pub fn csg_successors(rules: &[Rule], form: &[Symbol]) -> BTreeSet<Form> {
    let mut out = BTreeSet::new();
    for rule in rules {
        let n = rule.lhs.len();
        if n == 0 || n > form.len() {
            continue;
        }
        for i in 0..=form.len() - n {
            if form[i..i + n] == rule.lhs[..] {
                out.insert(apply_contiguous(&rule.lhs, &rule.rhs, form, i).expect("match checked"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{LeftMark, MarkedSymbol, RightMark, TopMark};
    use crate::system::{RuleLabel, Subset};

    fn nt(n: &str) -> Symbol {
        Symbol::nonterminal(n)
    }

    fn rule(lhs: Vec<Symbol>, rhs: Vec<Vec<Symbol>>) -> ScatteredRule {
        ScatteredRule::new(lhs, rhs, RuleLabel::new(Subset::Other("t".into()))).unwrap()
    }

    fn plus(n: &str) -> Symbol {
        MarkedSymbol::plain(n).with_top(TopMark::Plus).into()
    }

    #[test]
    fn scattered_occurrences_are_lexicographic() {
        let r = rule(vec![nt("A"), nt("B")], vec![vec![nt("C")], vec![nt("D")]]);
        let occ = find_occurrences(&r, &[nt("A"), nt("A"), nt("B")]);
        let pos: Vec<Vec<usize>> = occ.into_iter().map(|o| o.positions).collect();
        assert_eq!(pos, vec![vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn no_match_gives_no_occurrences() {
        let r = rule(vec![nt("A")], vec![vec![nt("B")]]);
        assert!(find_occurrences(&r, &[nt("B"), nt("C")]).is_empty());
    }

    #[test]
    fn context_sensitive_simulation_step() {
        // (△B, C, D) -> (▽B|, |E<, >D|) on △B C D
        let lhs = vec![plus("B"), nt("C"), nt("D")];
        let minus_b: Symbol = MarkedSymbol::plain("B").with_top(TopMark::Minus).with_right(RightMark::Bar).into();
        let e: Symbol = MarkedSymbol::plain("E").with_left(LeftMark::Bar).with_right(RightMark::Lt).into();
        let d: Symbol = MarkedSymbol::plain("D").with_left(LeftMark::Gt).with_right(RightMark::Bar).into();
        let r = rule(lhs.clone(), vec![vec![minus_b.clone()], vec![e.clone()], vec![d.clone()]]);
        let occ = find_occurrences(&r, &lhs);
        assert_eq!(occ, vec![Occurrence { positions: vec![0, 1, 2] }]);
        assert_eq!(apply_scg_rule(&r, &lhs, &occ[0]).unwrap(), vec![minus_b, e, d]);
    }

    #[test]
    fn singleton_rule_expands_in_place() {
        let minus_b: Symbol = MarkedSymbol::plain("B").with_top(TopMark::Minus).with_right(RightMark::Bar).into();
        let bar_c: Symbol = MarkedSymbol::plain("C").barred().into();
        let r = rule(vec![plus("A")], vec![vec![minus_b.clone(), bar_c.clone()]]);
        let out = apply_scg_rule(&r, &[plus("A")], &Occurrence { positions: vec![0] }).unwrap();
        assert_eq!(out, vec![minus_b, bar_c]);
    }

    #[test]
    fn identity_rule_is_a_no_op() {
        let r = rule(vec![nt("A")], vec![vec![nt("A")]]);
        let form = vec![nt("A"), nt("B")];
        assert_eq!(apply_scg_rule(&r, &form, &Occurrence { positions: vec![0] }).unwrap(), form);
    }

    #[test]
    fn stale_occurrences_are_rejected() {
        let r = rule(vec![nt("A"), nt("B")], vec![vec![nt("C")], vec![nt("D")]]);
        let form = vec![nt("A"), nt("B")];
        for bad in [vec![1, 0], vec![0, 5], vec![0], vec![1, 1]] {
            assert!(apply_scg_rule(&r, &form, &Occurrence { positions: bad }).is_err());
        }
    }

    #[test]
    fn contiguous_rewrites() {
        let g = crate::grammar::example_grammar();
        let out = apply_csg_rule(&g.rules[0], &[nt("A")], 0).unwrap();
        assert_eq!(out, vec![nt("B"), nt("C")]);
        let out = apply_csg_rule(&g.rules[3], &[nt("B"), nt("C"), nt("D")], 1).unwrap();
        assert_eq!(out, vec![nt("B"), nt("E"), nt("D")]);
        assert_eq!(apply_csg_rule(&g.rules[4], &[nt("C")], 0), Err(RewriteError::Mismatch(0)));
    }

    #[test]
    fn occurrence_limit_is_a_hard_error() {
        let form = vec![0u8; 12];
        assert_eq!(find_occurrences_limited(&[0u8, 0, 0], &form, 1000).unwrap().len(), 220);
        assert_eq!(
            find_occurrences_limited(&[0u8, 0, 0], &form, 100),
            Err(RewriteError::TooManyOccurrences(100))
        );
    }

    #[test]
    fn terminal_forms_have_no_successors() {
        let g = crate::grammar::example_grammar();
        let form = vec![Symbol::terminal("b"), Symbol::terminal("c")];
        assert!(csg_successors(&g.rules, &form).is_empty());
    }
}
