//! Executable invariants of the CSG-to-SCGS construction, checked over
//! every reachable state within a budget.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::par;
use crate::symbol::{Symbol, TopMark};
use crate::system::{GrammarSystem, Subset};

use super::compiled::Id;
use super::{check_system, compile_system, enumerate_from, explore_system, trace, DerivationTrace, EngineError, SearchBudget};

/// How many violations are spelled out; the rest are only counted.
const SHOWN: usize = 20;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClaimReport {
    pub name: String,
    /// Number of forms or traces inspected.
    pub checked: usize,
    pub violations: Vec<String>,
    pub violation_count: usize,
    /// Per-category tallies, when the check classifies outcomes.
    pub counts: BTreeMap<String, usize>,
    pub truncated: bool,
}

impl ClaimReport {
    fn new(name: &str) -> Self {
        ClaimReport { name: name.to_string(), ..ClaimReport::default() }
    }

    pub fn holds(&self) -> bool {
        self.violation_count == 0
    }

    fn violation(&mut self, msg: String) {
        self.violation_count += 1;
        if self.violations.len() < SHOWN {
            self.violations.push(msg);
        }
    }
}

impl fmt::Display for ClaimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.holds() { "PASS" } else { "FAIL" };
        write!(f, "{}: {verdict} ({} checked", self.name, self.checked)?;
        if self.truncated {
            f.write_str(", truncated")?;
        }
        f.write_str(")")?;
        for (k, v) in &self.counts {
            write!(f, "\n  {k}: {v}")?;
        }
        for v in &self.violations {
            write!(f, "\n  violation: {v}")?;
        }
        if self.violation_count > self.violations.len() {
            write!(f, "\n  … {} more", self.violation_count - self.violations.len())?;
        }
        Ok(())
    }
}

fn marks(sym: &Symbol) -> (usize, usize) {
    match sym.as_marked().map(|m| m.top) {
        Some(TopMark::Plus | TopMark::Minus | TopMark::Star | TopMark::Tilde) => (1, 0),
        Some(TopMark::One(_) | TopMark::Two(_)) => (0, 1),
        _ => (0, 0),
    }
}

fn too_many_marks(form: &[Symbol]) -> bool {
    let (control, aux) = form.iter().map(marks).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    control > 1 || aux > 1
}

/// At most one symbol carries `△`, `▽`, `◇` or `~`, and at most one carries
/// an auxiliary `1`/`2` mark, in every form visited within the budget,
/// intermediate forms of component activations included.
pub fn check_mark_invariant(sys: &GrammarSystem, budget: &SearchBudget) -> Result<ClaimReport, EngineError> {
    check_system(sys)?;
    let cs = compile_system(sys, &[]);
    let seen = AtomicUsize::new(0);
    let watch = |f: &[Id]| {
        seen.fetch_add(1, Ordering::Relaxed);
        too_many_marks(&cs.interner.decode(f))
    };
    let start = cs.interner.lookup_form(std::slice::from_ref(&sys.start));
    let mut report = ClaimReport::new("mark invariant");
    if watch(&start) {
        report.violation(format!("axiom {}", sys.start));
    }
    let graph = explore_system(&cs, start, budget, Some(&watch), |_| false)?;
    report.checked = seen.load(Ordering::Relaxed);
    report.truncated = graph.truncated;
    for f in &graph.flagged {
        report.violation(crate::symbol::display_form(&cs.interner.decode(f)));
    }
    Ok(report)
}

fn is_prime_plain(sym: &Symbol) -> bool {
    sym.as_marked().is_some_and(|m| m.prime && m.is_unmarked())
}

/// Checks that the terminal-phase rules of a successful trace form one
/// contiguous suffix `T1 T2* T3` in component 1, entered from `△a′ a′*`.
pub fn terminal_phase_violation(trace: &DerivationTrace) -> Option<String> {
    let steps = &trace.steps;
    let Some(first) = steps.iter().position(|s| s.label.subset.is_terminal_phase()) else {
        return Some("no terminal phase".into());
    };
    if let Some(j) = steps[first..].iter().position(|s| !s.label.subset.is_terminal_phase()) {
        return Some(format!("step {} ({}) follows the terminal phase", first + j, steps[first + j].label));
    }
    let suffix = &steps[first..];
    if suffix.iter().any(|s| s.component != Some(1)) {
        return Some("terminal phase outside component 1".into());
    }
    if suffix[0].label.subset != Subset::TerminalStart {
        return Some(format!("terminal phase starts with {}", suffix[0].label));
    }
    let last = suffix.last().expect("nonempty");
    if last.label.subset != Subset::TerminalEnd {
        return Some(format!("terminal phase ends with {}", last.label));
    }
    let middle = &suffix[1..suffix.len() - 1];
    if let Some(s) = middle.iter().find(|s| s.label.subset != Subset::TerminalLetter) {
        return Some(format!("{} inside the terminal phase", s.label));
    }
    let entry = &suffix[0].before;
    let entry_ok = entry.first().and_then(Symbol::as_marked).is_some_and(|m| {
        m.prime && m.top == TopMark::Plus && m.left == Default::default() && m.right == Default::default() && !m.caret
    }) && entry[1..].iter().all(is_prime_plain);
    if !entry_ok {
        return Some(format!("terminal phase entered from {}", crate::symbol::display_form(entry)));
    }
    None
}

/// Checks that every component-1 activation of a trace simulates exactly
/// one source rule (finishing with phase-two marking), or is entirely
/// terminal phase.
pub fn activation_violation(trace: &DerivationTrace) -> Option<String> {
    for range in trace.activations() {
        let steps = &trace.steps[range.clone()];
        if steps[0].component != Some(1) {
            continue;
        }
        if steps.iter().all(|s| s.label.subset.is_terminal_phase()) {
            continue;
        }
        let mut simulations = 0;
        let mut pair = 0;
        let mut close = 0;
        for s in steps {
            match &s.label.subset {
                k if k.is_simulation() => simulations += 1,
                Subset::Phase2 => {}
                Subset::ReducedPair => pair += 1,
                Subset::ReducedClose => close += 1,
                other => return Some(format!("activation at step {}: unexpected {other}", range.start)),
            }
        }
        let reduced = steps.iter().any(|s| s.label.subset == Subset::ReducedOpen);
        let aux_ok = if reduced { pair == 1 && close == 1 } else { pair == 0 && close == 0 };
        if simulations != 1 || !aux_ok {
            return Some(format!(
                "activation at step {} applies {simulations} simulation rules",
                range.start
            ));
        }
    }
    None
}

/// Witness traces for every word found within the budget.
fn word_traces(sys: &GrammarSystem, budget: &SearchBudget) -> Result<(Vec<DerivationTrace>, bool), EngineError> {
    check_system(sys)?;
    let cs = compile_system(sys, &[]);
    let start = cs.interner.lookup_form(std::slice::from_ref(&sys.start));
    let graph = explore_system(&cs, start, budget, None, |_| false)?;
    let traces = par::map(budget.execution, &graph.finals, |&s| trace::system_trace(sys, &cs, &graph, s, budget));
    Ok((traces.into_iter().collect::<Result<_, _>>()?, graph.truncated))
}

fn trace_check(
    name: &str,
    sys: &GrammarSystem,
    budget: &SearchBudget,
    check: fn(&DerivationTrace) -> Option<String>,
) -> Result<ClaimReport, EngineError> {
    let (traces, truncated) = word_traces(sys, budget)?;
    let mut report = ClaimReport::new(name);
    report.truncated = truncated;
    report.checked = traces.len();
    for t in &traces {
        if let Some(v) = check(t) {
            let word: Vec<String> = t.final_form().iter().map(|s| s.to_string()).collect();
            report.violation(format!("{}: {v}", word.concat()));
        }
    }
    Ok(report)
}

/// [`terminal_phase_violation`] over a witness for every word within the budget.
pub fn check_terminal_phase(sys: &GrammarSystem, budget: &SearchBudget) -> Result<ClaimReport, EngineError> {
    trace_check("terminal phase", sys, budget, terminal_phase_violation)
}

/// [`activation_violation`] over a witness for every word within the budget.
pub fn check_single_simulation(sys: &GrammarSystem, budget: &SearchBudget) -> Result<ClaimReport, EngineError> {
    trace_check("single simulation per activation", sys, budget, activation_violation)
}

/// Result of one activation of the checking component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    /// `△X` followed by unmarked symbols only.
    Success,
    /// Contains `!`.
    Blocked,
    /// Any other dead end.
    Stranded,
}

impl Outcome {
    pub fn of(form: &[Symbol]) -> Outcome {
        if form.contains(&Symbol::Blocker) {
            return Outcome::Blocked;
        }
        let head_ok = form.first().and_then(Symbol::as_marked).is_some_and(|m| {
            m.top == TopMark::Plus && m.left == Default::default() && m.right == Default::default() && !m.caret
        });
        let tail_ok = form.iter().skip(1).all(|s| s.as_marked().is_some_and(|m| m.is_unmarked()));
        if head_ok && tail_ok {
            Outcome::Success
        } else {
            Outcome::Stranded
        }
    }
}

/// Every activation of component 2 from a reachable form ends in a
/// successful check, a blocked form, or a stranded form from which no
/// word can be derived.
pub fn check_second_component(sys: &GrammarSystem, budget: &SearchBudget) -> Result<ClaimReport, EngineError> {
    check_system(sys)?;
    let mut report = ClaimReport::new("second component outcomes");
    if sys.components.len() < 2 {
        report.violation("system has no second component".into());
        return Ok(report);
    }
    let cs = compile_system(sys, &[]);
    let start = cs.interner.lookup_form(std::slice::from_ref(&sys.start));
    let graph = explore_system(&cs, start, budget, None, |_| false)?;
    report.truncated = graph.truncated;
    let unpruned = SearchBudget { prune_blocked: false, ..budget.clone() };
    let states: Vec<usize> = (0..graph.states.len()).filter(|&s| cs.has_step(1, &graph.states[s])).collect();
    let results = par::map(budget.execution, &states, |&s| cs.closure(1, &graph.states[s], &unpruned, None));
    let mut stranded = BTreeSet::new();
    for (s, res) in states.iter().zip(results) {
        let out = res?;
        report.checked += 1;
        report.truncated |= out.truncated;
        for d in out.dead_ends {
            let form = cs.interner.decode(&d);
            let outcome = Outcome::of(&form);
            *report.counts.entry(format!("{outcome:?}").to_lowercase()).or_default() += 1;
            if outcome == Outcome::Stranded {
                stranded.insert((form, *s));
            }
        }
    }
    let forms: Vec<_> = stranded.into_iter().collect();
    for (form, s) in &forms {
        let lang = enumerate_from(sys, form, budget)?;
        report.truncated |= lang.truncated;
        if !lang.words.is_empty() {
            let from = crate::symbol::display_form(&cs.interner.decode(&graph.states[*s]));
            report.violation(format!(
                "stranded form {} (from {from}) still derives {}",
                crate::symbol::display_form(form),
                lang.formatted().join(", ")
            ));
        }
    }
    Ok(report)
}
