//! Derivation witnesses and their independent replay.

use std::fmt;

use thiserror::Error;

use crate::grammar::MonotoneGrammar;
use crate::rewrite::{apply_contiguous, apply_scattered, component_successors};
use crate::symbol::{display_form, Form};
use crate::system::{GrammarSystem, RuleLabel};

use super::compiled::{CompiledGrammar, CompiledSystem};
use super::search::Graph;
use super::{grammar_rule_label, EngineError, SearchBudget};

/// One rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    /// One-based component index; `None` for monotone-grammar steps.
    pub component: Option<usize>,
    /// Index of the rule within its component (or grammar).
    pub rule: usize,
    pub label: RuleLabel,
    pub positions: Vec<usize>,
    pub before: Form,
    pub after: Form,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comp = self.component.map_or("-".to_string(), |c| c.to_string());
        let pos: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
        write!(
            f,
            "{comp} {} @{} : {} => {}",
            self.label,
            pos.join(","),
            display_form(&self.before),
            display_form(&self.after)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationTrace {
    pub start: Form,
    pub steps: Vec<TraceStep>,
}

impl DerivationTrace {
    pub fn final_form(&self) -> &Form {
        self.steps.last().map_or(&self.start, |s| &s.after)
    }

    /// Maximal runs of steps by the same component, as index ranges.
    pub fn activations(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut begin = 0;
        for i in 1..=self.steps.len() {
            if i == self.steps.len() || self.steps[i].component != self.steps[begin].component {
                if i > begin {
                    out.push(begin..i);
                }
                begin = i;
            }
        }
        out
    }
}

impl fmt::Display for DerivationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            writeln!(f, "{step}")?;
        }
        Ok(())
    }
}

pub(crate) fn system_trace(
    sys: &GrammarSystem,
    cs: &CompiledSystem,
    graph: &Graph<usize>,
    state: usize,
    budget: &SearchBudget,
) -> Result<DerivationTrace, EngineError> {
    let path = graph.path_to(state);
    let mut steps = Vec::new();
    for pair in path.windows(2) {
        let (from, to) = (&graph.states[pair[0]], &graph.states[pair[1]]);
        let comp = graph.parent[pair[1]].as_ref().expect("non-root state").1;
        let links = cs
            .closure_path(comp, from, to, budget)?
            .expect("every explored edge is a t-step");
        let mut before = cs.interner.decode(from);
        for (rule, positions, next) in links {
            let after = cs.interner.decode(&next);
            steps.push(TraceStep {
                component: Some(comp + 1),
                rule,
                label: sys.components[comp][rule].label().clone(),
                positions,
                before: std::mem::replace(&mut before, after.clone()),
                after,
            });
        }
    }
    Ok(DerivationTrace { start: vec![sys.start.clone()], steps })
}

pub(crate) fn grammar_trace(
    g: &MonotoneGrammar,
    cg: &CompiledGrammar,
    graph: &Graph<(usize, usize)>,
    state: usize,
) -> DerivationTrace {
    let path = graph.path_to(state);
    let steps = path
        .windows(2)
        .map(|pair| {
            let (rule, pos) = graph.parent[pair[1]].as_ref().expect("non-root state").1;
            TraceStep {
                component: None,
                rule,
                label: grammar_rule_label(g, rule),
                positions: vec![pos],
                before: cg.interner.decode(&graph.states[pair[0]]),
                after: cg.interner.decode(&graph.states[pair[1]]),
            }
        })
        .collect();
    DerivationTrace { start: vec![crate::symbol::Symbol::nonterminal(g.start.clone())], steps }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("trace does not start from the axiom")]
    WrongStart,
    #[error("step {step}: {reason}")]
    Step { step: usize, reason: String },
    #[error("activation ending at step {step} stops before component {component} is exhausted")]
    NotExhausted { step: usize, component: usize },
    #[error("final form `{0}` is not terminal")]
    NotTerminal(String),
}

fn step_err(step: usize, reason: impl Into<String>) -> ReplayError {
    ReplayError::Step { step, reason: reason.into() }
}

/// Re-derives every step of `trace` with the rewrite functions, checking
/// chaining, rule identity, t-mode activations and the terminal result.
pub fn replay_trace(sys: &GrammarSystem, trace: &DerivationTrace) -> Result<(), ReplayError> {
    if trace.start != [sys.start.clone()] {
        return Err(ReplayError::WrongStart);
    }
    let mut current = &trace.start;
    for (i, step) in trace.steps.iter().enumerate() {
        if step.before != *current {
            return Err(step_err(i, "does not continue from the previous form"));
        }
        let comp = step
            .component
            .and_then(|c| c.checked_sub(1))
            .and_then(|c| sys.components.get(c))
            .ok_or_else(|| step_err(i, "unknown component"))?;
        let rule = comp.get(step.rule).ok_or_else(|| step_err(i, "unknown rule"))?;
        if *rule.label() != step.label {
            return Err(step_err(i, format!("label `{}` does not match rule `{rule}`", step.label)));
        }
        let out = apply_scattered(rule.lhs(), rule.rhs(), &step.before, &step.positions)
            .map_err(|e| step_err(i, e.to_string()))?;
        if out != step.after {
            return Err(step_err(i, "result differs from the recorded form"));
        }
        current = &step.after;
    }
    for range in trace.activations() {
        let last = &trace.steps[range.end - 1];
        let c = last.component.expect("checked above");
        if !component_successors(&sys.components[c - 1], &last.after).is_empty() {
            return Err(ReplayError::NotExhausted { step: range.end - 1, component: c });
        }
    }
    check_terminal(current)
}

/// Replays a monotone-grammar trace.
pub fn replay_csg_trace(g: &MonotoneGrammar, trace: &DerivationTrace) -> Result<(), ReplayError> {
    if trace.start != [crate::symbol::Symbol::nonterminal(g.start.clone())] {
        return Err(ReplayError::WrongStart);
    }
    let mut current = &trace.start;
    for (i, step) in trace.steps.iter().enumerate() {
        if step.before != *current {
            return Err(step_err(i, "does not continue from the previous form"));
        }
        let rule = g.rules.get(step.rule).ok_or_else(|| step_err(i, "unknown rule"))?;
        let &[pos] = step.positions.as_slice() else {
            return Err(step_err(i, "expected a single position"));
        };
        let out = apply_contiguous(&rule.lhs, &rule.rhs, &step.before, pos).map_err(|e| step_err(i, e.to_string()))?;
        if out != step.after {
            return Err(step_err(i, "result differs from the recorded form"));
        }
        current = &step.after;
    }
    check_terminal(current)
}

fn check_terminal(form: &Form) -> Result<(), ReplayError> {
    if form.iter().all(|s| s.is_terminal()) {
        Ok(())
    } else {
        Err(ReplayError::NotTerminal(display_form(form)))
    }
}
