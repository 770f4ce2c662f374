//! Interned representation used by the search.

use std::collections::{HashMap, VecDeque};

use crate::grammar::Rule;
use crate::rewrite::{apply_contiguous, apply_scattered, for_each_occurrence};
use crate::symbol::{Form, Symbol};
use crate::system::ScatteredRule;

use super::{EngineError, SearchBudget};

pub(crate) type Id = u32;
pub(crate) type IdForm = Box<[Id]>;
/// One rule application: rule index, positions and the resulting form.
pub(crate) type Applied = (usize, Vec<usize>, IdForm);

/// Predicate run on every form a closure visits.
pub(crate) type Watch<'a> = &'a (dyn Fn(&[Id]) -> bool + Sync);

#[derive(Default)]
pub(crate) struct Interner {
    symbols: Vec<Symbol>,
    ids: HashMap<Symbol, Id>,
}

impl Interner {
    pub fn intern(&mut self, s: &Symbol) -> Id {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.symbols.len() as Id;
        self.symbols.push(s.clone());
        self.ids.insert(s.clone(), id);
        id
    }

    pub fn intern_form(&mut self, f: &[Symbol]) -> IdForm {
        f.iter().map(|s| self.intern(s)).collect()
    }

    /// Ids of symbols that were interned before.
    pub fn lookup_form(&self, f: &[Symbol]) -> IdForm {
        f.iter().map(|s| self.ids[s]).collect()
    }

    pub fn symbol(&self, id: Id) -> &Symbol {
        &self.symbols[id as usize]
    }

    pub fn decode(&self, f: &[Id]) -> Form {
        f.iter().map(|&id| self.symbol(id).clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }
}

pub(crate) struct CompiledRule {
    pub lhs: Vec<Id>,
    pub rhs: Vec<Vec<Id>>,
}

#[derive(Default)]
pub(crate) struct Component {
    pub rules: Vec<CompiledRule>,
    /// Rule indices keyed by their first left-hand symbol.
    by_first: HashMap<Id, Vec<u32>>,
}

/// A grammar system (or a single rule set) over interned symbols.
pub(crate) struct CompiledSystem {
    pub interner: Interner,
    pub components: Vec<Component>,
    terminal: Vec<bool>,
    blocker: Vec<bool>,
    /// Symbols that are terminals or occur on some left-hand side.
    live: Vec<bool>,
}

pub(crate) struct ClosureOutcome {
    pub dead_ends: Vec<IdForm>,
    pub truncated: bool,
    pub flagged: Vec<IdForm>,
}

impl CompiledSystem {
    /// Compiles `components`, also interning the symbols of `extra` forms.
    pub fn new(components: &[&[ScatteredRule]], extra: &[&[Symbol]]) -> Self {
        let mut interner = Interner::default();
        let mut compiled = Vec::with_capacity(components.len());
        for rules in components {
            let mut comp = Component::default();
            for (i, rule) in rules.iter().enumerate() {
                let lhs: Vec<Id> = rule.lhs().iter().map(|s| interner.intern(s)).collect();
                let rhs = rule.rhs().iter().map(|f| interner.intern_form(f).into_vec()).collect();
                comp.by_first.entry(lhs[0]).or_default().push(i as u32);
                comp.rules.push(CompiledRule { lhs, rhs });
            }
            compiled.push(comp);
        }
        for f in extra {
            interner.intern_form(f);
        }
        let mut live = vec![false; interner.len()];
        for comp in &compiled {
            for r in &comp.rules {
                for &s in &r.lhs {
                    live[s as usize] = true;
                }
            }
        }
        let terminal: Vec<bool> = interner.symbols.iter().map(Symbol::is_terminal).collect();
        for (l, &t) in live.iter_mut().zip(&terminal) {
            *l |= t;
        }
        let blocker = interner.symbols.iter().map(|s| *s == Symbol::Blocker).collect();
        CompiledSystem { interner, components: compiled, terminal, blocker, live }
    }

    pub fn is_terminal_form(&self, f: &[Id]) -> bool {
        f.iter().all(|&s| self.terminal[s as usize])
    }

    /// Whether a successor is kept by the search under `budget`.
    pub fn admissible(&self, f: &[Id], budget: &SearchBudget) -> bool {
        f.len() <= budget.max_len
            && !(budget.prune_blocked && f.iter().any(|&s| self.blocker[s as usize]))
            && !(budget.prune_dead_symbols && f.iter().any(|&s| !self.live[s as usize]))
    }

    /// Calls `visit(rule, positions, result)` for every one-step rewrite of
    /// `form` in component `comp`, ordered by first position, then rule.
    pub fn for_each_step(
        &self,
        comp: usize,
        form: &[Id],
        limit: usize,
        mut visit: impl FnMut(usize, &[usize], Vec<Id>),
    ) -> Result<(), EngineError> {
        let c = &self.components[comp];
        let mut count = 0usize;
        let mut positions = Vec::new();
        for (i, sym) in form.iter().enumerate() {
            let Some(candidates) = c.by_first.get(sym) else { continue };
            for &r in candidates {
                let rule = &c.rules[r as usize];
                let mut overflow = false;
                let mut fire = |pos: &[usize]| {
                    if count == limit {
                        overflow = true;
                        return std::ops::ControlFlow::Break(());
                    }
                    count += 1;
                    positions.clear();
                    positions.push(i);
                    positions.extend(pos.iter().map(|p| p + i + 1));
                    let next = apply_scattered(&rule.lhs, &rule.rhs, form, &positions).expect("fresh occurrence");
                    debug_assert!(next.len() >= form.len());
                    visit(r as usize, &positions, next);
                    std::ops::ControlFlow::Continue(())
                };
                if rule.lhs.len() == 1 {
                    let _ = fire(&[]);
                } else {
                    for_each_occurrence(&rule.lhs[1..], &form[i + 1..], &mut fire);
                }
                if overflow {
                    return Err(EngineError::TooManyOccurrences(limit));
                }
            }
        }
        Ok(())
    }

    pub fn has_step(&self, comp: usize, form: &[Id]) -> bool {
        let c = &self.components[comp];
        form.iter().enumerate().any(|(i, sym)| {
            c.by_first.get(sym).is_some_and(|rs| {
                rs.iter().any(|&r| {
                    let lhs = &c.rules[r as usize].lhs;
                    lhs.len() == 1 || is_subsequence(&lhs[1..], &form[i + 1..])
                })
            })
        })
    }

    /// All t-mode results of component `comp` from `start`: the forms
    /// reachable in zero or more steps that have no further step.
    pub fn closure(
        &self,
        comp: usize,
        start: &[Id],
        budget: &SearchBudget,
        watch: Option<Watch<'_>>,
    ) -> Result<ClosureOutcome, EngineError> {
        let mut out = ClosureOutcome { dead_ends: Vec::new(), truncated: false, flagged: Vec::new() };
        let mut visited: std::collections::HashSet<IdForm> = std::collections::HashSet::new();
        let mut queue = VecDeque::new();
        visited.insert(start.into());
        queue.push_back(IdForm::from(start));
        while let Some(form) = queue.pop_front() {
            let mut has_step = false;
            self.for_each_step(comp, &form, budget.occurrence_limit, |_, _, next| {
                has_step = true;
                if next.len() > budget.max_len || visited.contains(next.as_slice()) {
                    return;
                }
                if let Some(w) = watch {
                    if w(&next) {
                        out.flagged.push(next.clone().into());
                    }
                }
                if !self.admissible(&next, budget) {
                    return;
                }
                if visited.len() >= budget.max_steps_per_closure {
                    out.truncated = true;
                    return;
                }
                let next: IdForm = next.into();
                visited.insert(next.clone());
                queue.push_back(next);
            })?;
            if !has_step {
                out.dead_ends.push(form);
            }
        }
        Ok(out)
    }

    /// Finds the rule applications (rule, positions, result) leading from
    /// `from` to `to` inside one activation of `comp`, ending at a dead end.
    pub fn closure_path(
        &self,
        comp: usize,
        from: &[Id],
        to: &[Id],
        budget: &SearchBudget,
    ) -> Result<Option<Vec<Applied>>, EngineError> {
        type Link = (IdForm, usize, Vec<usize>);
        let mut parent: HashMap<IdForm, Option<Link>> = HashMap::new();
        let mut queue = VecDeque::new();
        parent.insert(from.into(), None);
        queue.push_back(IdForm::from(from));
        let mut found = from == to;
        while !found {
            let Some(form) = queue.pop_front() else { break };
            self.for_each_step(comp, &form, budget.occurrence_limit, |rule, pos, next| {
                if found || !self.admissible(&next, budget) || parent.contains_key(next.as_slice()) {
                    return;
                }
                let next: IdForm = next.into();
                found = *next == *to;
                parent.insert(next.clone(), Some((form.clone(), rule, pos.to_vec())));
                queue.push_back(next);
            })?;
        }
        if !found {
            return Ok(None);
        }
        let mut path = Vec::new();
        let mut cur: IdForm = to.into();
        while let Some(Some((prev, rule, pos))) = parent.get(&cur) {
            path.push((*rule, pos.clone(), cur.clone()));
            cur = prev.clone();
        }
        path.reverse();
        Ok(Some(path))
    }
}

fn is_subsequence(needle: &[Id], hay: &[Id]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// A monotone grammar over interned symbols.
pub(crate) struct CompiledGrammar {
    pub interner: Interner,
    pub rules: Vec<(Vec<Id>, Vec<Id>)>,
    terminal: Vec<bool>,
}

impl CompiledGrammar {
    pub fn new(rules: &[Rule], extra: &[&[Symbol]]) -> Self {
        let mut interner = Interner::default();
        let rules = rules
            .iter()
            .map(|r| (interner.intern_form(&r.lhs).into_vec(), interner.intern_form(&r.rhs).into_vec()))
            .collect();
        for f in extra {
            interner.intern_form(f);
        }
        let terminal = interner.symbols.iter().map(Symbol::is_terminal).collect();
        CompiledGrammar { interner, rules, terminal }
    }

    pub fn is_terminal_form(&self, f: &[Id]) -> bool {
        f.iter().all(|&s| self.terminal[s as usize])
    }

    /// Calls `visit(rule, position, result)` for every one-step rewrite.
    pub fn for_each_step(&self, form: &[Id], mut visit: impl FnMut(usize, usize, Vec<Id>)) {
        for (r, (lhs, rhs)) in self.rules.iter().enumerate() {
            if lhs.len() > form.len() {
                continue;
            }
            for i in 0..=form.len() - lhs.len() {
                if form[i..i + lhs.len()] == lhs[..] {
                    visit(r, i, apply_contiguous(lhs, rhs, form, i).expect("match checked"));
                }
            }
        }
    }
}
