//! Level-synchronous breadth-first exploration of a rewriting graph.

use std::collections::{BTreeSet, HashMap};

use crate::par;

use super::compiled::{Id, IdForm};
use super::{EngineError, SearchBudget};

/// The successors of one form, as produced by an expansion function.
pub(crate) struct Expansion<E> {
    pub next: Vec<(E, IdForm)>,
    pub truncated: bool,
    pub flagged: Vec<IdForm>,
}

pub(crate) struct Graph<E> {
    pub states: Vec<IdForm>,
    pub index: HashMap<IdForm, usize>,
    pub parent: Vec<Option<(usize, E)>>,
    /// States whose form is all-terminal.
    pub finals: Vec<usize>,
    pub flagged: BTreeSet<IdForm>,
    pub truncated: bool,
    /// Set when `stop` ended the search early.
    pub stopped: bool,
}

impl<E> Graph<E> {
    /// State indices from the root to `state`.
    pub fn path_to(&self, mut state: usize) -> Vec<usize> {
        let mut path = vec![state];
        while let Some((p, _)) = &self.parent[state] {
            state = *p;
            path.push(state);
        }
        path.reverse();
        path
    }
}

/// Explores from `start`. Final forms are recorded and not expanded;
/// `stop` is consulted on each new final form.
pub(crate) fn explore<E, X, F>(
    start: IdForm,
    is_final: F,
    expand: X,
    budget: &SearchBudget,
    mut stop: impl FnMut(&[Id]) -> bool,
) -> Result<Graph<E>, EngineError>
where
    E: Send,
    F: Fn(&[Id]) -> bool,
    X: Fn(&[Id]) -> Result<Expansion<E>, EngineError> + Sync + Send,
{
    let mut g = Graph {
        states: vec![start.clone()],
        index: HashMap::from([(start.clone(), 0)]),
        parent: vec![None],
        finals: Vec::new(),
        flagged: BTreeSet::new(),
        truncated: false,
        stopped: false,
    };
    let mut frontier = Vec::new();
    if is_final(&start) {
        g.finals.push(0);
        g.stopped = stop(&start);
    } else {
        frontier.push(0usize);
    }
    while !frontier.is_empty() && !g.stopped {
        let forms: Vec<&IdForm> = frontier.iter().map(|&s| &g.states[s]).collect();
        let expanded = par::map(budget.execution, &forms, |f| expand(f));
        let mut next_frontier = Vec::new();
        'outer: for (&state, result) in frontier.iter().zip(expanded) {
            let exp = result?;
            g.truncated |= exp.truncated;
            g.flagged.extend(exp.flagged);
            for (edge, form) in exp.next {
                if g.index.contains_key(&form) {
                    continue;
                }
                if g.states.len() >= budget.max_states {
                    g.truncated = true;
                    break 'outer;
                }
                let id = g.states.len();
                g.index.insert(form.clone(), id);
                g.states.push(form.clone());
                g.parent.push(Some((state, edge)));
                if is_final(&form) {
                    g.finals.push(id);
                    if stop(&form) {
                        g.stopped = true;
                        break 'outer;
                    }
                } else {
                    next_frontier.push(id);
                }
            }
        }
        frontier = next_frontier;
    }
    Ok(g)
}
