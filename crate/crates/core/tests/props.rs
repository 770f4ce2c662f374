mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::sample::select;

use common::{example_system, naive_occurrences};
use scgs_core::engine::{enumerate_language, t_step, SearchBudget};
use scgs_core::fuzz::{random_kuroda, random_monotone, FuzzParams};
use scgs_core::grammar::{parse_grammar, serialize_grammar};
use scgs_core::par::Execution;
use scgs_core::rewrite::{component_successors, for_each_occurrence};
use scgs_core::symbol::{
    classify, decode_marked_symbol, encode_marked_symbol, LeftMark, MarkedSymbol, Name, RightMark, Symbol, SymbolClass,
    TopMark,
};
use scgs_core::system::{parse_system, serialize_system};
use scgs_core::transform::{build_marked_alphabet, transform_csg_to_scgs};

fn top(aux: bool) -> BoxedStrategy<TopMark> {
    let plain = prop_oneof![
        Just(TopMark::None),
        Just(TopMark::Plus),
        Just(TopMark::Minus),
        Just(TopMark::Star),
    ];
    if aux {
        prop_oneof![plain, Just(TopMark::Tilde), (0u32..500).prop_map(TopMark::One), (0u32..500).prop_map(TopMark::Two)]
            .boxed()
    } else {
        plain.boxed()
    }
}

fn marked(bases: &'static [&'static str], aux: bool) -> impl Strategy<Value = MarkedSymbol> {
    (
        select(bases),
        any::<bool>(),
        top(aux),
        select(&[LeftMark::None, LeftMark::Bar, LeftMark::Gt][..]),
        select(&[RightMark::None, RightMark::Bar, RightMark::Lt][..]),
        any::<bool>(),
    )
        .prop_map(|(base, prime, top, left, right, caret)| MarkedSymbol {
            base: Name::from(base),
            prime,
            top,
            left,
            right,
            caret,
        })
}

proptest! {
    #[test]
    fn marked_symbols_round_trip(m in marked(&["A", "Bc", "x1", "S_2"], true)) {
        let token = encode_marked_symbol(&m).unwrap();
        if m.is_unmarked() && !m.prime {
            prop_assert_eq!(token, m.base.to_string());
        } else {
            prop_assert_eq!(decode_marked_symbol(&token).unwrap(), m);
        }
    }

    #[test]
    fn classification_matches_alphabet(m in marked(&["S", "A", "a", "Z"], false)) {
        let g = parse_grammar("nonterminals: S A\nterminals: a\nstart: S\nrules:\nS -> A A\nA -> a\n").unwrap();
        let alphabet = build_marked_alphabet(&g).unwrap();
        let class = classify(&Symbol::Nonterminal(m.clone()), &g.nonterminal_set(), &g.terminal_set());
        prop_assert_eq!(class != SymbolClass::Invalid, alphabet.contains(&Symbol::Nonterminal(m)));
    }

    #[test]
    fn occurrences_match_subsets(
        lhs in prop::collection::vec(0u8..3, 1..4),
        form in prop::collection::vec(0u8..3, 0..9),
    ) {
        let mut found = Vec::new();
        for_each_occurrence(&lhs, &form, |p| {
            found.push(p.to_vec());
            std::ops::ControlFlow::Continue(())
        });
        prop_assert_eq!(found, naive_occurrences(&lhs, &form));
    }
}

fn checking_symbols() -> Vec<Symbol> {
    let sys = example_system();
    let set: BTreeSet<Symbol> = sys.components[1].iter().flat_map(|r| r.lhs().to_vec()).collect();
    set.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn t_step_results_are_exhausted(picks in prop::collection::vec(any::<prop::sample::Index>(), 1..6)) {
        let sys = example_system();
        let pool = checking_symbols();
        let form: Vec<Symbol> = picks.iter().map(|i| i.get(&pool).clone()).collect();
        for c in 0..2 {
            let budget = SearchBudget { prune_blocked: false, ..SearchBudget::with_max_len(8) };
            let step = t_step(&sys.components[c], &form, &budget).unwrap();
            prop_assert!(!step.forms.is_empty());
            if !step.truncated {
                for f in &step.forms {
                    prop_assert!(component_successors(&sys.components[c], f).is_empty());
                }
            }
        }
    }

    #[test]
    fn grammar_text_round_trips(seed in any::<u64>()) {
        let g = random_monotone(seed, &FuzzParams::default());
        prop_assert_eq!(parse_grammar(&serialize_grammar(&g)).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn system_text_round_trips(seed in any::<u64>()) {
        let sys = transform_csg_to_scgs(&random_kuroda(seed, &FuzzParams::default())).unwrap();
        prop_assert_eq!(parse_system(&serialize_system(&sys)).unwrap(), sys);
    }

    #[test]
    fn sequential_equals_parallel(seed in any::<u64>()) {
        let sys = transform_csg_to_scgs(&random_kuroda(seed, &FuzzParams::default())).unwrap();
        let seq = SearchBudget { execution: Execution::Sequential, ..SearchBudget::with_max_len(3) };
        let par = SearchBudget { execution: Execution::Parallel, ..seq.clone() };
        prop_assert_eq!(enumerate_language(&sys, &seq).unwrap(), enumerate_language(&sys, &par).unwrap());
    }
}
