//! Seeded random grammars for differential testing.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grammar::{MonotoneGrammar, Rule};
use crate::symbol::{Name, Symbol};

/// Size limits for generated grammars.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzParams {
    pub max_nonterminals: usize,
    pub max_terminals: usize,
    pub max_rules: usize,
    /// Longest side of a generated monotone rule.
    pub max_side: usize,
}

impl Default for FuzzParams {
    fn default() -> Self {
        FuzzParams { max_nonterminals: 4, max_terminals: 3, max_rules: 6, max_side: 3 }
    }
}

const NONTERMINALS: [&str; 6] = ["S", "A", "B", "C", "D", "E"];
const TERMINALS: [&str; 4] = ["a", "b", "c", "d"];

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn alphabets(rng: &mut impl Rng, p: &FuzzParams) -> (Vec<Name>, Vec<Name>) {
    let n = rng.gen_range(1..=p.max_nonterminals.clamp(1, NONTERMINALS.len()));
    let t = rng.gen_range(1..=p.max_terminals.clamp(1, TERMINALS.len()));
    (
        NONTERMINALS[..n].iter().map(|s| Name::from(*s)).collect(),
        TERMINALS[..t].iter().map(|s| Name::from(*s)).collect(),
    )
}

fn nt(rng: &mut impl Rng, n: &[Name]) -> Symbol {
    Symbol::nonterminal(n.choose(rng).expect("nonempty").clone())
}

fn any(rng: &mut impl Rng, n: &[Name], t: &[Name], terminal_odds: f64) -> Symbol {
    if rng.gen_bool(terminal_odds) {
        Symbol::Terminal(t.choose(rng).expect("nonempty").clone())
    } else {
        nt(rng, n)
    }
}

fn terminal(rng: &mut impl Rng, t: &[Name]) -> Symbol {
    Symbol::Terminal(t.choose(rng).expect("nonempty").clone())
}

/// A grammar in Kuroda normal form. The first rule rewrites the start
/// symbol and at least one rule is terminal, so the language is often
/// nonempty.
pub fn random_kuroda(seed: u64, p: &FuzzParams) -> MonotoneGrammar {
    let mut rng = rng_for(seed);
    let (n, t) = alphabets(&mut rng, p);
    let count = rng.gen_range(2..=p.max_rules.max(2));
    let start = Symbol::nonterminal(n[0].clone());
    let first = if rng.gen_bool(0.7) {
        Rule::new(vec![start], vec![nt(&mut rng, &n), nt(&mut rng, &n)])
    } else {
        Rule::new(vec![start], vec![terminal(&mut rng, &t)])
    };
    let mut rules = vec![first, Rule::new(vec![nt(&mut rng, &n)], vec![terminal(&mut rng, &t)])];
    while rules.len() < count {
        let r = &mut rng;
        let rule = match r.gen_range(0..4) {
            0 => Rule::new(vec![nt(r, &n), nt(r, &n)], vec![nt(r, &n), nt(r, &n)]),
            1 => Rule::new(vec![nt(r, &n)], vec![nt(r, &n), nt(r, &n)]),
            2 => Rule::new(vec![nt(r, &n)], vec![nt(r, &n)]),
            _ => Rule::new(vec![nt(r, &n)], vec![terminal(r, &t)]),
        };
        rules.push(rule);
    }
    rules[1..].shuffle(&mut rng);
    MonotoneGrammar { nonterminals: n.clone(), terminals: t, start: n[0].clone(), rules }
}

/// A monotone grammar whose rules have sides of up to `max_side` symbols,
/// mixing terminals into both sides. The first rule rewrites the start
/// symbol.
pub fn random_monotone(seed: u64, p: &FuzzParams) -> MonotoneGrammar {
    let mut rng = rng_for(seed);
    let (n, t) = alphabets(&mut rng, p);
    let count = rng.gen_range(1..=p.max_rules.max(1));
    let max_side = p.max_side.max(1);
    let mut rules = Vec::with_capacity(count);
    while rules.len() < count {
        let r = &mut rng;
        let l = if rules.is_empty() { 1 } else { r.gen_range(1..=max_side) };
        let k = r.gen_range(l..=max_side);
        let mut lhs: Vec<Symbol> = (0..l).map(|_| any(r, &n, &t, 0.15)).collect();
        if rules.is_empty() {
            lhs[0] = Symbol::nonterminal(n[0].clone());
        } else if lhs.iter().all(Symbol::is_terminal) {
            let i = r.gen_range(0..l);
            lhs[i] = nt(r, &n);
        }
        let mut rhs: Vec<Symbol> = (0..k).map(|_| any(r, &n, &t, 0.4)).collect();
        if rules.len() == 1 {
            // give a nonterminal the start rule introduced a way out
            let first: &Rule = &rules[0];
            let from = first.rhs.iter().find(|s| !s.is_terminal()).cloned();
            lhs = vec![from.unwrap_or_else(|| Symbol::nonterminal(n[0].clone()))];
            rhs = (0..r.gen_range(1..=max_side)).map(|_| terminal(r, &t)).collect();
        }
        rules.push(Rule::new(lhs, rhs));
    }
    MonotoneGrammar { nonterminals: n.clone(), terminals: t, start: n[0].clone(), rules }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::validate_grammar;
    use crate::kuroda::is_kuroda;

    #[test]
    fn generated_grammars_are_valid_and_sized() {
        let p = FuzzParams::default();
        for seed in 0..200 {
            let k = random_kuroda(seed, &p);
            assert!(validate_grammar(&k).is_empty(), "seed {seed}");
            assert!(is_kuroda(&k));
            assert!(k.nonterminals.len() <= 4 && k.terminals.len() <= 3 && k.rules.len() <= 6);
            let m = random_monotone(seed, &p);
            assert!(validate_grammar(&m).is_empty(), "seed {seed}: {m:?}");
            assert!(m.rules.len() <= 6);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let p = FuzzParams::default();
        assert_eq!(random_kuroda(7, &p), random_kuroda(7, &p));
        assert_eq!(random_monotone(7, &p), random_monotone(7, &p));
    }
}
