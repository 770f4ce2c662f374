//! Helpers shared by the integration tests, including oracles that do not
//! go through the engine.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use scgs_core::grammar::{example_grammar, MonotoneGrammar};
use scgs_core::symbol::{decode_symbol, Form, Name, Symbol};
use scgs_core::system::GrammarSystem;
use scgs_core::transform::{transform_csg_to_scgs, reduce_to_degree2};

pub fn example() -> MonotoneGrammar {
    example_grammar()
}

pub fn example_system() -> GrammarSystem {
    transform_csg_to_scgs(&example()).expect("example transforms")
}

pub fn example_reduced() -> GrammarSystem {
    reduce_to_degree2(&example_system()).expect("example reduces")
}

/// Parses a space-separated token form over the Example terminals.
pub fn form(text: &str) -> Form {
    let terminals: BTreeSet<Name> = ["b", "c", "d", "e"].into_iter().map(Name::from).collect();
    text.split_whitespace()
        .map(|t| decode_symbol(t, &terminals).unwrap_or_else(|e| panic!("{t}: {e}")))
        .collect()
}

fn name_of(s: &Symbol) -> String {
    s.base_name().expect("grammar symbol").to_string()
}

/// Words of length at most `n`, by breadth-first rewriting of plain
/// strings.
pub fn naive_csg_words(g: &MonotoneGrammar, n: usize) -> BTreeSet<String> {
    let rules: Vec<(Vec<String>, Vec<String>)> = g
        .rules
        .iter()
        .map(|r| (r.lhs.iter().map(name_of).collect(), r.rhs.iter().map(name_of).collect()))
        .collect();
    let terminals: BTreeSet<String> = g.terminal_set().iter().map(|t| t.to_string()).collect();
    let start = vec![g.start.to_string()];
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut words = BTreeSet::new();
    while let Some(f) = queue.pop_front() {
        if f.iter().all(|s| terminals.contains(s)) {
            words.insert(f.concat());
            continue;
        }
        for (lhs, rhs) in &rules {
            if lhs.len() > f.len() || f.len() - lhs.len() + rhs.len() > n {
                continue;
            }
            for i in 0..=f.len() - lhs.len() {
                if f[i..i + lhs.len()] == lhs[..] {
                    let next: Vec<String> = [&f[..i], &rhs[..], &f[i + lhs.len()..]].concat();
                    if seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    words
}

/// Every increasing position tuple where `lhs` matches `form`, by trying
/// all subsets of positions.
pub fn naive_occurrences<S: PartialEq>(lhs: &[S], form: &[S]) -> Vec<Vec<usize>> {
    assert!(form.len() < 16);
    let mut out = Vec::new();
    for mask in 0u32..(1 << form.len()) {
        if mask.count_ones() as usize != lhs.len() {
            continue;
        }
        let pos: Vec<usize> = (0..form.len()).filter(|i| mask & (1 << i) != 0).collect();
        if pos.iter().zip(lhs).all(|(&p, s)| form[p] == *s) {
            out.push(pos);
        }
    }
    out.sort();
    out
}

/// Concatenated word strings of an engine language.
pub fn words(lang: &scgs_core::engine::Language) -> BTreeSet<String> {
    lang.words.iter().map(|w| w.concat()).collect()
}

/// Result of forcing the `B D -> D B` simulation on `△B C D` and letting
/// both components run to exhaustion.
pub struct ForcedSwap {
    /// The form right after the forced rule.
    pub forced: Form,
    /// Results of the rest of that component-1 activation.
    pub after_first: BTreeSet<Form>,
    /// Results of the following component-2 activation.
    pub after_second: BTreeSet<Form>,
    pub truncated: bool,
}

pub fn force_swap(sys: &GrammarSystem) -> ForcedSwap {
    use scgs_core::engine::{t_step, SearchBudget};
    use scgs_core::rewrite::{apply_scg_rule, find_occurrences};

    let start = form("[+.B...] C D");
    let rule = sys.components[0]
        .iter()
        .find(|r| r.label().source.as_deref() == Some("B D -> D B") && r.lhs() == form("[+.B...] D").as_slice())
        .expect("swap simulation rule");
    let occ = find_occurrences(rule, &start);
    assert_eq!(occ.len(), 1);
    let forced = apply_scg_rule(rule, &start, &occ[0]).unwrap();
    // keep blocked forms visible
    let budget = SearchBudget { prune_blocked: false, ..SearchBudget::with_max_len(8) };
    let first = t_step(&sys.components[0], &forced, &budget).unwrap();
    let mut after_second = BTreeSet::new();
    let mut truncated = first.truncated;
    for f in &first.forms {
        let second = t_step(&sys.components[1], f, &budget).unwrap();
        truncated |= second.truncated;
        after_second.extend(second.forms);
    }
    ForcedSwap { forced, after_first: first.forms, after_second, truncated }
}
