//! Leveled deterministic acyclic automata (DAFSA) over per-level finite
//! alphabets.
//!
//! Every automaton has a fixed number of levels and every accepted string has
//! exactly that many symbols; the symbol read at depth `i` is a value of the
//! `i`-th domain. A transition may carry the wildcard [`Symbol::Wildcard`],
//! which stands for every value of the level's domain. A state carries either a
//! single wildcard edge or only literal edges, never both.
//!
//! All automata returned by the public operations are minimal and in a
//! canonical numbering (breadth-first from the start state following edges in
//! symbol order), so two automata produced here accept the same language if
//! and only if they compare equal.

mod build;
mod minimize;
mod nfa;
mod product;
mod text;

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

pub use build::DafsaBuilder;
pub use nfa::{DeterminizeStats, Nfa};

pub type StateId = u32;

/// Default cap on the number of strings [`Dafsa::enumerate`] will expand.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Label of a transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// A single domain value, 0-based.
    Literal(u32),
    /// Every value of the level's domain.
    Wildcard,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Literal(v) => write!(f, "{v}"),
            Symbol::Wildcard => f.write_str("*"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("string {index} has length {found}, expected {expected}")]
    LengthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("symbol {symbol} at level {level} is outside domain of size {domain}")]
    SymbolOutOfDomain {
        level: usize,
        symbol: u32,
        domain: u32,
    },
    #[error("input strings are not strictly increasing at index {index}")]
    Unsorted { index: usize },
    #[error("automata have incompatible levels: {left:?} vs {right:?}")]
    LevelMismatch { left: Vec<u32>, right: Vec<u32> },
    #[error("state {state} is nondeterministic")]
    Nondeterministic { state: StateId },
    #[error("state {state} breaks the leveled structure")]
    NotLeveled { state: StateId },
    #[error("state id {state} out of range")]
    InvalidState { state: StateId },
    #[error("level {level} out of range for automaton with {levels} levels")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("language has {count} strings, above the enumeration cap {cap}")]
    EnumerationCap { count: u128, cap: usize },
    #[error("malformed automaton text at line {line}: {message}")]
    Text { line: usize, message: String },
}

/// Outgoing transitions of a state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Edges {
    Wildcard(StateId),
    /// Sorted by symbol, no duplicates. Empty means no outgoing edge.
    Literal(Vec<(u32, StateId)>),
}

impl Edges {
    pub(crate) fn none() -> Self {
        Edges::Literal(Vec::new())
    }

    pub(crate) fn is_empty(&self) -> bool {
        matches!(self, Edges::Literal(v) if v.is_empty())
    }

    pub(crate) fn target(&self, value: u32) -> Option<StateId> {
        match self {
            Edges::Wildcard(t) => Some(*t),
            Edges::Literal(v) => v
                .binary_search_by_key(&value, |&(s, _)| s)
                .ok()
                .map(|i| v[i].1),
        }
    }

    pub(crate) fn nth_target(&self, i: usize) -> Option<StateId> {
        match self {
            Edges::Wildcard(t) => (i == 0).then_some(*t),
            Edges::Literal(v) => v.get(i).map(|&(_, t)| t),
        }
    }

    pub(crate) fn targets(&self) -> impl Iterator<Item = StateId> + '_ {
        let (wild, lits) = match self {
            Edges::Wildcard(t) => (Some(*t), &[][..]),
            Edges::Literal(v) => (None, v.as_slice()),
        };
        wild.into_iter().chain(lits.iter().map(|&(_, t)| t))
    }

    pub(crate) fn symbols(&self) -> impl Iterator<Item = (Symbol, StateId)> + '_ {
        let (wild, lits) = match self {
            Edges::Wildcard(t) => (Some((Symbol::Wildcard, *t)), &[][..]),
            Edges::Literal(v) => (None, v.as_slice()),
        };
        wild.into_iter()
            .chain(lits.iter().map(|&(s, t)| (Symbol::Literal(s), t)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct State {
    pub(crate) edges: Edges,
    pub(crate) accepting: bool,
}

/// A leveled deterministic acyclic finite-state automaton.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dafsa {
    domains: Vec<u32>,
    states: Vec<State>,
    start: StateId,
}

impl Dafsa {
    /// The automaton accepting nothing.
    pub fn empty(domains: &[u32]) -> Self {
        Dafsa {
            domains: domains.to_vec(),
            states: vec![State {
                edges: Edges::none(),
                accepting: false,
            }],
            start: 0,
        }
    }

    /// The automaton accepting every string over `domains` (a chain of
    /// wildcard edges).
    pub fn universal(domains: &[u32]) -> Self {
        if domains.contains(&0) {
            return Self::empty(domains);
        }
        let levels = domains.len();
        let states = (0..=levels)
            .map(|i| State {
                edges: if i < levels {
                    Edges::Wildcard(i as StateId + 1)
                } else {
                    Edges::none()
                },
                accepting: i == levels,
            })
            .collect();
        Dafsa {
            domains: domains.to_vec(),
            states,
            start: 0,
        }
    }

    /// Builds the minimal automaton accepting exactly `strings`, which must be
    /// sorted lexicographically, duplicate-free and all of length
    /// `domains.len()`.
    pub fn compile<S: AsRef<[u32]>>(
        domains: &[u32],
        strings: &[S],
    ) -> Result<Self, AutomatonError> {
        let mut builder = DafsaBuilder::new(domains);
        for s in strings {
            builder.insert(s.as_ref())?;
        }
        Ok(builder.finish())
    }

    /// Like [`Dafsa::compile`] but sorts and deduplicates the input first.
    pub fn from_strings(
        domains: &[u32],
        mut strings: Vec<Vec<u32>>,
    ) -> Result<Self, AutomatonError> {
        strings.sort_unstable();
        strings.dedup();
        Self::compile(domains, &strings)
    }

    /// Assembles an automaton from explicit transitions without minimizing
    /// it. The result is validated with [`Dafsa::check_invariants`].
    pub fn from_transitions(
        domains: &[u32],
        state_count: usize,
        start: StateId,
        accepting: &[StateId],
        transitions: &[(StateId, Symbol, StateId)],
    ) -> Result<Self, AutomatonError> {
        let mut states = vec![
            State {
                edges: Edges::none(),
                accepting: false,
            };
            state_count
        ];
        let check = |s: StateId| {
            if (s as usize) < state_count {
                Ok(())
            } else {
                Err(AutomatonError::InvalidState { state: s })
            }
        };
        check(start)?;
        for &a in accepting {
            check(a)?;
            states[a as usize].accepting = true;
        }
        for &(src, sym, dst) in transitions {
            check(src)?;
            check(dst)?;
            let edges = &mut states[src as usize].edges;
            match (sym, &mut *edges) {
                (Symbol::Wildcard, e) if e.is_empty() => *e = Edges::Wildcard(dst),
                (Symbol::Literal(v), Edges::Literal(list)) => {
                    match list.binary_search_by_key(&v, |&(s, _)| s) {
                        Ok(_) => return Err(AutomatonError::Nondeterministic { state: src }),
                        Err(pos) => list.insert(pos, (v, dst)),
                    }
                }
                _ => return Err(AutomatonError::Nondeterministic { state: src }),
            }
        }
        let a = Dafsa {
            domains: domains.to_vec(),
            states,
            start,
        };
        a.check_invariants()?;
        Ok(a)
    }

    pub fn domains(&self) -> &[u32] {
        &self.domains
    }

    pub fn level_count(&self) -> usize {
        self.domains.len()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn transition_count(&self) -> usize {
        self.states
            .iter()
            .map(|s| match &s.edges {
                Edges::Wildcard(_) => 1,
                Edges::Literal(v) => v.len(),
            })
            .sum()
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.states[state as usize].accepting
    }

    /// Outgoing transitions of `state` in symbol order.
    pub fn transitions_from(&self, state: StateId) -> impl Iterator<Item = (Symbol, StateId)> + '_ {
        self.states[state as usize].edges.symbols()
    }

    /// True when the language is empty. Only meaningful on trimmed automata,
    /// which every public operation returns.
    pub fn is_empty(&self) -> bool {
        let s = &self.states[self.start as usize];
        !s.accepting && s.edges.is_empty()
    }

    pub(crate) fn state(&self, id: StateId) -> &State {
        &self.states[id as usize]
    }

    pub(crate) fn from_parts(domains: Vec<u32>, states: Vec<State>, start: StateId) -> Self {
        Dafsa {
            domains,
            states,
            start,
        }
    }

    pub(crate) fn ensure_compatible(&self, other: &Dafsa) -> Result<(), AutomatonError> {
        if self.domains != other.domains {
            return Err(AutomatonError::LevelMismatch {
                left: self.domains.clone(),
                right: other.domains.clone(),
            });
        }
        Ok(())
    }

    /// Reachable states in breadth-first order together with their depth.
    /// Assumes the automaton is leveled, so depth is well defined.
    pub(crate) fn bfs(&self) -> (Vec<StateId>, Vec<u32>) {
        let mut depth = vec![u32::MAX; self.states.len()];
        let mut order = Vec::with_capacity(self.states.len());
        let mut queue = VecDeque::new();
        depth[self.start as usize] = 0;
        queue.push_back(self.start);
        while let Some(s) = queue.pop_front() {
            order.push(s);
            let d = depth[s as usize];
            for t in self.states[s as usize].edges.targets() {
                if depth[t as usize] == u32::MAX {
                    depth[t as usize] = d + 1;
                    queue.push_back(t);
                }
            }
        }
        (order, depth)
    }

    /// Number of accepted strings, with wildcards expanded. Saturates at
    /// `u128::MAX`.
    pub fn count(&self) -> u128 {
        let (order, depth) = self.bfs();
        let mut counts = vec![0u128; self.states.len()];
        for &s in order.iter().rev() {
            let state = &self.states[s as usize];
            let mut c: u128 = u128::from(state.accepting);
            match &state.edges {
                Edges::Wildcard(t) => {
                    let k = self.domains[depth[s as usize] as usize] as u128;
                    c = c.saturating_add(k.saturating_mul(counts[*t as usize]));
                }
                Edges::Literal(v) => {
                    for &(_, t) in v {
                        c = c.saturating_add(counts[t as usize]);
                    }
                }
            }
            counts[s as usize] = c;
        }
        counts[self.start as usize]
    }

    /// Membership test for a literal string.
    pub fn accepts(&self, string: &[u32]) -> Result<bool, AutomatonError> {
        if string.len() != self.level_count() {
            return Err(AutomatonError::LengthMismatch {
                index: 0,
                expected: self.level_count(),
                found: string.len(),
            });
        }
        let mut s = self.start;
        for &v in string {
            match self.states[s as usize].edges.target(v) {
                Some(t) => s = t,
                None => return Ok(false),
            }
        }
        Ok(self.states[s as usize].accepting)
    }

    /// All accepted strings in lexicographic order, refusing languages larger
    /// than [`DEFAULT_ENUMERATION_CAP`].
    pub fn enumerate(&self) -> Result<Vec<Vec<u32>>, AutomatonError> {
        self.enumerate_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_capped(&self, cap: usize) -> Result<Vec<Vec<u32>>, AutomatonError> {
        let count = self.count();
        if count > cap as u128 {
            return Err(AutomatonError::EnumerationCap { count, cap });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut prefix = Vec::with_capacity(self.level_count());
        self.enumerate_from(self.start, &mut prefix, &mut out);
        Ok(out)
    }

    fn enumerate_from(&self, s: StateId, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let state = &self.states[s as usize];
        if state.accepting && prefix.len() == self.level_count() {
            out.push(prefix.clone());
        }
        match &state.edges {
            Edges::Wildcard(t) => {
                for v in 0..self.domains[prefix.len()] {
                    prefix.push(v);
                    self.enumerate_from(*t, prefix, out);
                    prefix.pop();
                }
            }
            Edges::Literal(list) => {
                for &(v, t) in list {
                    prefix.push(v);
                    self.enumerate_from(t, prefix, out);
                    prefix.pop();
                }
            }
        }
    }

    /// Checks determinism, symbol ranges and the leveled acyclic structure.
    pub fn check_invariants(&self) -> Result<(), AutomatonError> {
        let n = self.states.len();
        if self.start as usize >= n {
            return Err(AutomatonError::InvalidState { state: self.start });
        }
        for (id, state) in self.states.iter().enumerate() {
            let id = id as StateId;
            for t in state.edges.targets() {
                if t as usize >= n {
                    return Err(AutomatonError::InvalidState { state: t });
                }
            }
            if let Edges::Literal(v) = &state.edges {
                if v.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(AutomatonError::Nondeterministic { state: id });
                }
            }
        }
        let levels = self.level_count();
        let mut depth = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        depth[self.start as usize] = 0;
        queue.push_back(self.start);
        while let Some(s) = queue.pop_front() {
            let d = depth[s as usize] as usize;
            let state = &self.states[s as usize];
            if state.accepting && d != levels {
                return Err(AutomatonError::NotLeveled { state: s });
            }
            if d >= levels {
                if !state.edges.is_empty() {
                    return Err(AutomatonError::NotLeveled { state: s });
                }
                continue;
            }
            for (sym, t) in state.edges.symbols() {
                if let Symbol::Literal(v) = sym {
                    if v >= self.domains[d] {
                        return Err(AutomatonError::SymbolOutOfDomain {
                            level: d,
                            symbol: v,
                            domain: self.domains[d],
                        });
                    }
                }
                let td = &mut depth[t as usize];
                if *td == u32::MAX {
                    *td = d as u32 + 1;
                    queue.push_back(t);
                } else if *td as usize != d + 1 {
                    return Err(AutomatonError::NotLeveled { state: t });
                }
            }
        }
        Ok(())
    }

    /// True when no smaller automaton accepts the same language.
    pub fn is_minimal(&self) -> bool {
        self.minimize().state_count() == self.state_count()
    }

    /// Inserts wildcard levels. `positions[i]` is the index, in the widened
    /// string, of the current level `i`; `new_domains` gives the domains of
    /// the widened string and must agree with the current domains at those
    /// positions.
    pub fn insert_wildcard_levels(
        &self,
        new_domains: &[u32],
        positions: &[usize],
    ) -> Result<Dafsa, AutomatonError> {
        let levels = self.level_count();
        let mismatch = || AutomatonError::LevelMismatch {
            left: self.domains.clone(),
            right: new_domains.to_vec(),
        };
        if positions.len() != levels || positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(mismatch());
        }
        for (i, &p) in positions.iter().enumerate() {
            if new_domains.get(p) != Some(&self.domains[i]) {
                return Err(mismatch());
            }
        }
        let new_levels = new_domains.len();
        let (order, depth) = self.bfs();
        // entry[s]: state standing for s; exit[s]: end of the wildcard chain
        // hanging from it, which carries s's original edges.
        let mut entry = vec![StateId::MAX; self.states.len()];
        let mut exit = vec![StateId::MAX; self.states.len()];
        let mut states: Vec<State> = Vec::new();
        for &s in &order {
            let d = depth[s as usize] as usize;
            let first = if d == 0 { 0 } else { positions[d - 1] + 1 };
            let last = if d < levels { positions[d] } else { new_levels };
            let head = states.len() as StateId;
            entry[s as usize] = head;
            for i in 0..(last - first) {
                states.push(State {
                    edges: Edges::Wildcard(head + i as StateId + 1),
                    accepting: false,
                });
            }
            exit[s as usize] = states.len() as StateId;
            states.push(State {
                edges: Edges::none(),
                accepting: self.states[s as usize].accepting,
            });
        }
        for &s in &order {
            let edges = match &self.states[s as usize].edges {
                Edges::Wildcard(t) => Edges::Wildcard(entry[*t as usize]),
                Edges::Literal(v) => {
                    Edges::Literal(v.iter().map(|&(x, t)| (x, entry[t as usize])).collect())
                }
            };
            states[exit[s as usize] as usize].edges = edges;
        }
        let widened = Dafsa {
            domains: new_domains.to_vec(),
            states,
            start: entry[self.start as usize],
        };
        Ok(widened.minimize())
    }

    /// Contracts every edge at `level`, identifying its source with its
    /// target. The result is in general nondeterministic.
    pub fn remove_level(&self, level: usize) -> Result<Nfa, AutomatonError> {
        let levels = self.level_count();
        if level >= levels {
            return Err(AutomatonError::LevelOutOfRange { level, levels });
        }
        let (order, depth) = self.bfs();
        let mut domains = self.domains.clone();
        domains.remove(level);
        let mut nfa = Nfa::new(&domains);
        let mut ids = vec![StateId::MAX; self.states.len()];
        for &s in &order {
            if depth[s as usize] as usize != level + 1 {
                ids[s as usize] = nfa.add_state(false);
            }
        }
        nfa.set_start(ids[self.start as usize]);
        for &s in &order {
            let d = depth[s as usize] as usize;
            if d == level + 1 {
                continue;
            }
            let id = ids[s as usize];
            let state = &self.states[s as usize];
            if d == level {
                for mid in state.edges.targets() {
                    let m = &self.states[mid as usize];
                    if m.accepting {
                        nfa.set_accepting(id);
                    }
                    for (sym, t) in m.edges.symbols() {
                        nfa.add_edge(id, sym, ids[t as usize]);
                    }
                }
            } else {
                if state.accepting {
                    nfa.set_accepting(id);
                }
                for (sym, t) in state.edges.symbols() {
                    nfa.add_edge(id, sym, ids[t as usize]);
                }
            }
        }
        Ok(nfa)
    }

    /// Projects the language by deleting the symbol at `level` from every
    /// string, then determinizes and minimizes.
    pub fn project_out(&self, level: usize) -> Result<(Dafsa, DeterminizeStats), AutomatonError> {
        Ok(self.remove_level(level)?.determinize())
    }
}
