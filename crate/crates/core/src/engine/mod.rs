//! t-mode semantics, bounded language enumeration, membership and
//! derivation witnesses.
//!
//! All searches are breadth-first over sentential forms with a visited set.
//! Forms longer than [`SearchBudget::max_len`] are discarded, which is sound
//! because neither monotone grammars nor propagating systems ever shorten a
//! form. Whenever a cap is hit the result says so; a truncated search never
//! reports a word as absent.

mod claims;
mod compiled;
mod search;
mod trace;

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::grammar::{validate_grammar, MonotoneGrammar, Violation};
use crate::par::Execution;
use crate::rewrite::DEFAULT_OCCURRENCE_LIMIT;
use crate::symbol::{Form, Name, Symbol};
use crate::system::{validate_system, GrammarSystem, RuleLabel, ScatteredRule, Subset};

pub use claims::{
    activation_violation, check_mark_invariant, check_second_component, check_single_simulation,
    check_terminal_phase, terminal_phase_violation, ClaimReport, Outcome,
};
pub use trace::{replay_csg_trace, replay_trace, DerivationTrace, ReplayError, TraceStep};

use compiled::{CompiledGrammar, CompiledSystem, Id, IdForm, Watch};
use search::{explore, Expansion, Graph};

/// Limits for one search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Longest sentential form kept.
    pub max_len: usize,
    /// Cap on distinct forms in the outer search.
    pub max_states: usize,
    /// Cap on distinct forms inside one component activation.
    pub max_steps_per_closure: usize,
    /// Cap on rule applications available in one form.
    pub occurrence_limit: usize,
    /// Drop forms containing the blocker `!`.
    pub prune_blocked: bool,
    /// Drop forms containing a nonterminal that no rule rewrites.
    pub prune_dead_symbols: bool,
    pub execution: Execution,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_len: 4,
            max_states: 2_000_000,
            max_steps_per_closure: 1_000_000,
            occurrence_limit: DEFAULT_OCCURRENCE_LIMIT,
            prune_blocked: true,
            prune_dead_symbols: false,
            execution: Execution::default(),
        }
    }
}

impl SearchBudget {
    pub fn with_max_len(max_len: usize) -> Self {
        SearchBudget { max_len, ..SearchBudget::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("more than {0} rule applications available in a single form")]
    TooManyOccurrences(usize),
    #[error("invalid grammar: {}", join(.0))]
    InvalidGrammar(Vec<Violation>),
    #[error("invalid grammar system: {}", .0.join("; "))]
    InvalidSystem(Vec<String>),
    #[error("`{0}` is not a terminal")]
    UnknownTerminal(String),
    #[error("form of length {len} exceeds max_len {max_len}")]
    FormTooLong { len: usize, max_len: usize },
    #[error("`{0}` is not generated")]
    NotAMember(String),
    #[error("search truncated before `{0}` was found")]
    Truncated(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// A terminal word.
pub type Word = Vec<Name>;

/// Words concatenate when every terminal is one character, and are
/// space-separated otherwise.
pub fn format_word(w: &[Name]) -> String {
    if w.iter().all(|n| n.chars().count() == 1) {
        w.concat()
    } else {
        w.join(" ")
    }
}

/// Inverse of [`format_word`] against a terminal alphabet.
pub fn parse_word(text: &str, terminals: &BTreeSet<Name>) -> Result<Word, EngineError> {
    let text = text.trim();
    let parts: Vec<String> = if text.contains(char::is_whitespace) {
        text.split_whitespace().map(str::to_string).collect()
    } else if terminals.contains(text) {
        vec![text.to_string()]
    } else {
        text.chars().map(String::from).collect()
    };
    parts
        .into_iter()
        .map(|p| terminals.get(p.as_str()).cloned().ok_or(EngineError::UnknownTerminal(p)))
        .collect()
}

fn word_of(form: &[Symbol]) -> Word {
    form.iter().filter_map(|s| s.base_name().cloned()).collect()
}

/// A bounded language.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Language {
    pub words: BTreeSet<Word>,
    pub truncated: bool,
    /// Distinct forms visited by the outer search.
    pub states: usize,
}

impl Language {
    pub fn formatted(&self) -> Vec<String> {
        self.words.iter().map(|w| format_word(w)).collect()
    }
}

/// Result of one t-step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TStep {
    pub forms: BTreeSet<Form>,
    pub truncated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    /// A budget cap was hit before the word was found.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub verdict: Verdict,
    /// A witness when the verdict is [`Verdict::Yes`].
    pub trace: Option<DerivationTrace>,
}

fn check_system(sys: &GrammarSystem) -> Result<(), EngineError> {
    let problems = validate_system(sys);
    if problems.is_empty() {
        Ok(())
    } else {
        Err(EngineError::InvalidSystem(problems))
    }
}

fn check_grammar(g: &MonotoneGrammar) -> Result<(), EngineError> {
    let problems = validate_grammar(g);
    if problems.is_empty() {
        Ok(())
    } else {
        Err(EngineError::InvalidGrammar(problems))
    }
}

fn compile_system(sys: &GrammarSystem, extra: &[&[Symbol]]) -> CompiledSystem {
    let comps: Vec<&[ScatteredRule]> = sys.components.iter().map(Vec::as_slice).collect();
    let start = [sys.start.clone()];
    let mut forms: Vec<&[Symbol]> = vec![&start];
    forms.extend_from_slice(extra);
    CompiledSystem::new(&comps, &forms)
}

fn ensure_fits(form: &[Symbol], budget: &SearchBudget) -> Result<(), EngineError> {
    if form.len() > budget.max_len {
        return Err(EngineError::FormTooLong { len: form.len(), max_len: budget.max_len });
    }
    Ok(())
}

/// All t-mode results of one rule set on `form`, including `form` itself
/// when no rule applies.
pub fn t_step(rules: &[ScatteredRule], form: &[Symbol], budget: &SearchBudget) -> Result<TStep, EngineError> {
    ensure_fits(form, budget)?;
    let cs = CompiledSystem::new(&[rules], &[form]);
    let start = cs.interner.lookup_form(form);
    let out = cs.closure(0, &start, budget, None)?;
    Ok(TStep {
        forms: out.dead_ends.iter().map(|f| cs.interner.decode(f)).collect(),
        truncated: out.truncated,
    })
}

/// Union of the t-steps of all components, without `form` itself.
pub fn system_successors(
    sys: &GrammarSystem,
    form: &[Symbol],
    budget: &SearchBudget,
) -> Result<TStep, EngineError> {
    ensure_fits(form, budget)?;
    let cs = compile_system(sys, &[form]);
    let start = cs.interner.lookup_form(form);
    let exp = system_expansion(&cs, &start, budget, None)?;
    Ok(TStep {
        forms: exp.next.iter().map(|(_, f)| cs.interner.decode(f)).collect(),
        truncated: exp.truncated,
    })
}

fn system_expansion(
    cs: &CompiledSystem,
    form: &[Id],
    budget: &SearchBudget,
    watch: Option<Watch<'_>>,
) -> Result<Expansion<usize>, EngineError> {
    let mut exp = Expansion { next: Vec::new(), truncated: false, flagged: Vec::new() };
    let mut seen = HashSet::new();
    for c in 0..cs.components.len() {
        let out = cs.closure(c, form, budget, watch)?;
        exp.truncated |= out.truncated;
        exp.flagged.extend(out.flagged);
        for d in out.dead_ends {
            if *d != *form && seen.insert(d.clone()) {
                exp.next.push((c, d));
            }
        }
    }
    Ok(exp)
}

fn explore_system(
    cs: &CompiledSystem,
    start: IdForm,
    budget: &SearchBudget,
    watch: Option<Watch<'_>>,
    stop: impl FnMut(&[Id]) -> bool,
) -> Result<Graph<usize>, EngineError> {
    explore(
        start,
        |f| cs.is_terminal_form(f),
        |f| system_expansion(cs, f, budget, watch),
        budget,
        stop,
    )
}

fn words_of(graph: &Graph<impl Sized>, decode: impl Fn(&[Id]) -> Form) -> BTreeSet<Word> {
    graph.finals.iter().map(|&s| word_of(&decode(&graph.states[s]))).collect()
}

/// Words of length at most `budget.max_len` generated by `sys` in t-mode.
pub fn enumerate_language(sys: &GrammarSystem, budget: &SearchBudget) -> Result<Language, EngineError> {
    check_system(sys)?;
    enumerate_from(sys, std::slice::from_ref(&sys.start), budget)
}

/// Words derivable from an arbitrary sentential form of `sys`.
pub fn enumerate_from(sys: &GrammarSystem, form: &[Symbol], budget: &SearchBudget) -> Result<Language, EngineError> {
    let cs = compile_system(sys, &[form]);
    let start = cs.interner.lookup_form(form);
    let g = explore_system(&cs, start, budget, None, |_| false)?;
    Ok(Language {
        words: words_of(&g, |f| cs.interner.decode(f)),
        truncated: g.truncated,
        states: g.states.len(),
    })
}

fn explore_grammar(
    cg: &CompiledGrammar,
    start: IdForm,
    budget: &SearchBudget,
    stop: impl FnMut(&[Id]) -> bool,
) -> Result<Graph<(usize, usize)>, EngineError> {
    explore(
        start,
        |f| cg.is_terminal_form(f),
        |f| {
            let mut next = Vec::new();
            let mut seen = HashSet::new();
            cg.for_each_step(f, |r, i, succ| {
                if succ.len() <= budget.max_len && seen.insert(succ.clone()) {
                    next.push(((r, i), succ.into()));
                }
            });
            Ok(Expansion { next, truncated: false, flagged: Vec::new() })
        },
        budget,
        stop,
    )
}

/// Words of length at most `budget.max_len` generated by a monotone grammar.
pub fn enumerate_csg_language(g: &MonotoneGrammar, budget: &SearchBudget) -> Result<Language, EngineError> {
    check_grammar(g)?;
    let start = [Symbol::nonterminal(g.start.clone())];
    let cg = CompiledGrammar::new(&g.rules, &[&start]);
    let start = cg.interner.lookup_form(&start);
    let graph = explore_grammar(&cg, start, budget, |_| false)?;
    Ok(Language {
        words: words_of(&graph, |f| cg.interner.decode(f)),
        truncated: graph.truncated,
        states: graph.states.len(),
    })
}

fn terminal_form(word: &[Name], terminals: &[Name]) -> Result<Form, EngineError> {
    word.iter()
        .map(|n| {
            if terminals.contains(n) {
                Ok(Symbol::Terminal(n.clone()))
            } else {
                Err(EngineError::UnknownTerminal(n.to_string()))
            }
        })
        .collect()
}

fn membership_budget(word: &[Name], budget: &SearchBudget) -> SearchBudget {
    SearchBudget { max_len: word.len(), ..budget.clone() }
}

/// Decides whether `sys` generates `word`, searching only forms no longer
/// than the word.
pub fn is_member(sys: &GrammarSystem, word: &[Name], budget: &SearchBudget) -> Result<Membership, EngineError> {
    check_system(sys)?;
    let target = terminal_form(word, &sys.terminals)?;
    if word.is_empty() {
        return Ok(Membership { verdict: Verdict::No, trace: None });
    }
    let budget = membership_budget(word, budget);
    let cs = compile_system(sys, &[&target]);
    let start = cs.interner.lookup_form(std::slice::from_ref(&sys.start));
    let goal = cs.interner.lookup_form(&target);
    let graph = explore_system(&cs, start, &budget, None, |f| *f == *goal)?;
    let Some(&state) = graph.index.get(&goal) else {
        let verdict = if graph.truncated { Verdict::Unknown } else { Verdict::No };
        return Ok(Membership { verdict, trace: None });
    };
    let trace = trace::system_trace(sys, &cs, &graph, state, &budget)?;
    Ok(Membership { verdict: Verdict::Yes, trace: Some(trace) })
}

/// Decides whether a monotone grammar generates `word`.
pub fn is_csg_member(g: &MonotoneGrammar, word: &[Name], budget: &SearchBudget) -> Result<Membership, EngineError> {
    check_grammar(g)?;
    let target = terminal_form(word, &g.terminals)?;
    if word.is_empty() {
        return Ok(Membership { verdict: Verdict::No, trace: None });
    }
    let budget = membership_budget(word, budget);
    let start = [Symbol::nonterminal(g.start.clone())];
    let cg = CompiledGrammar::new(&g.rules, &[&start, &target]);
    let goal = cg.interner.lookup_form(&target);
    let graph = explore_grammar(&cg, cg.interner.lookup_form(&start), &budget, |f| *f == *goal)?;
    let Some(&state) = graph.index.get(&goal) else {
        let verdict = if graph.truncated { Verdict::Unknown } else { Verdict::No };
        return Ok(Membership { verdict, trace: None });
    };
    Ok(Membership { verdict: Verdict::Yes, trace: Some(trace::grammar_trace(g, &cg, &graph, state)) })
}

fn witness(m: Membership, word: &[Name]) -> Result<DerivationTrace, EngineError> {
    match m.verdict {
        Verdict::Yes => Ok(m.trace.expect("members carry a trace")),
        Verdict::No => Err(EngineError::NotAMember(format_word(word))),
        Verdict::Unknown => Err(EngineError::Truncated(format_word(word))),
    }
}

/// A replayable derivation of `word` in `sys`.
pub fn find_derivation(sys: &GrammarSystem, word: &[Name], budget: &SearchBudget) -> Result<DerivationTrace, EngineError> {
    witness(is_member(sys, word, budget)?, word)
}

/// A replayable derivation of `word` in a monotone grammar.
pub fn find_csg_derivation(
    g: &MonotoneGrammar,
    word: &[Name],
    budget: &SearchBudget,
) -> Result<DerivationTrace, EngineError> {
    witness(is_csg_member(g, word, budget)?, word)
}

/// Label used for monotone-grammar steps in traces: `r<k>` plus the rule.
fn grammar_rule_label(g: &MonotoneGrammar, index: usize) -> RuleLabel {
    RuleLabel::simulating(Subset::Other(format!("r{}", index + 1)), &g.rules[index])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{example_grammar, parse_grammar};
    use crate::system::parse_system;

    fn words(lang: &Language) -> Vec<String> {
        lang.formatted()
    }

    fn trivial_system() -> GrammarSystem {
        parse_system("nonterminals: S\nterminals: a b\nstart: S\ncomponent 1:\n(S) -> (a)\ncomponent 2:\n(S) -> (b)\n")
            .unwrap()
    }

    #[test]
    fn example_grammar_bounded_languages() {
        let g = example_grammar();
        let l3 = enumerate_csg_language(&g, &SearchBudget::with_max_len(3)).unwrap();
        assert_eq!(words(&l3), ["bc", "bcd", "bed"]);
        assert!(!l3.truncated);
        let l2 = enumerate_csg_language(&g, &SearchBudget::with_max_len(2)).unwrap();
        assert_eq!(words(&l2), ["bc"]);
    }

    #[test]
    fn single_rule_grammar() {
        let g = parse_grammar("nonterminals: S\nterminals: a\nstart: S\nrules:\nS -> a\n").unwrap();
        let l = enumerate_csg_language(&g, &SearchBudget::with_max_len(3)).unwrap();
        assert_eq!(words(&l), ["a"]);
    }

    #[test]
    fn each_component_takes_one_t_step() {
        let sys = trivial_system();
        let l = enumerate_language(&sys, &SearchBudget::with_max_len(1)).unwrap();
        assert_eq!(words(&l), ["a", "b"]);
    }

    #[test]
    fn t_step_includes_zero_step_result() {
        let sys = trivial_system();
        let b = SearchBudget::with_max_len(2);
        let form = vec![Symbol::terminal("a")];
        let out = t_step(&sys.components[0], &form, &b).unwrap();
        assert_eq!(out.forms, BTreeSet::from([form.clone()]));
        assert!(system_successors(&sys, &form, &b).unwrap().forms.is_empty());
    }

    #[test]
    fn t_step_runs_to_exhaustion() {
        let sys = parse_system(
            "nonterminals: S A\nterminals: a\nstart: S\ncomponent 1:\n(S) -> (A)\n(A) -> (A a)\n(A) -> (a)\n",
        )
        .unwrap();
        let out = t_step(&sys.components[0], &[Symbol::nonterminal("S")], &SearchBudget::with_max_len(3)).unwrap();
        let got: Vec<String> = out.forms.iter().map(|f| crate::symbol::display_form(f)).collect();
        assert_eq!(got, ["a", "a a", "a a a"]);
    }

    #[test]
    fn membership_is_tri_state() {
        let g = example_grammar();
        let t = g.terminal_set();
        let b = SearchBudget::default();
        let yes = is_csg_member(&g, &parse_word("bed", &t).unwrap(), &b).unwrap();
        assert_eq!(yes.verdict, Verdict::Yes);
        replay_csg_trace(&g, yes.trace.as_ref().unwrap()).unwrap();
        let no = is_csg_member(&g, &parse_word("db", &t).unwrap(), &b).unwrap();
        assert_eq!(no.verdict, Verdict::No);
        assert_eq!(is_csg_member(&g, &[], &b).unwrap().verdict, Verdict::No);
        let tight = SearchBudget { max_states: 2, ..b };
        let unknown = is_csg_member(&g, &parse_word("bcdd", &t).unwrap(), &tight).unwrap();
        assert_eq!(unknown.verdict, Verdict::Unknown);
    }

    #[test]
    fn word_parsing() {
        let t: BTreeSet<Name> = ["a", "bb"].iter().map(|s| Name::from(*s)).collect();
        assert_eq!(parse_word("aa", &t).unwrap().len(), 2);
        assert_eq!(parse_word("bb", &t).unwrap().len(), 1);
        assert_eq!(parse_word("a bb a", &t).unwrap().len(), 3);
        assert!(parse_word("c", &t).is_err());
        assert_eq!(format_word(&parse_word("a bb", &t).unwrap()), "a bb");
    }

    #[test]
    fn both_execution_modes_agree() {
        let g = example_grammar();
        let mut b = SearchBudget::with_max_len(5);
        b.execution = Execution::Sequential;
        let seq = enumerate_csg_language(&g, &b).unwrap();
        b.execution = Execution::Parallel;
        let par = enumerate_csg_language(&g, &b).unwrap();
        assert_eq!(seq, par);
    }
}
