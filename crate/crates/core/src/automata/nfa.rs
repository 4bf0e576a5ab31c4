//! Nondeterministic leveled automata and subset construction.

use std::collections::{HashMap, VecDeque};

use super::{Dafsa, Edges, State, StateId, Symbol};

#[derive(Clone, Debug, Default)]
struct NfaState {
    edges: Vec<(Symbol, StateId)>,
    accepting: bool,
}

/// A leveled acyclic automaton whose states may have overlapping outgoing
/// symbols.
#[derive(Clone, Debug)]
pub struct Nfa {
    domains: Vec<u32>,
    states: Vec<NfaState>,
    start: StateId,
}

/// Sizes observed by one determinization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DeterminizeStats {
    /// Reachable states of the nondeterministic input.
    pub nfa_states: usize,
    /// States created by the subset construction, before minimization.
    pub subset_states: usize,
    /// States of the minimized result.
    pub dfa_states: usize,
}

impl DeterminizeStats {
    /// Ratio of subset-construction states to input states.
    pub fn growth(&self) -> f64 {
        if self.nfa_states == 0 {
            1.0
        } else {
            self.subset_states as f64 / self.nfa_states as f64
        }
    }
}

impl Nfa {
    pub fn new(domains: &[u32]) -> Self {
        Nfa {
            domains: domains.to_vec(),
            states: Vec::new(),
            start: 0,
        }
    }

    pub fn add_state(&mut self, accepting: bool) -> StateId {
        self.states.push(NfaState {
            edges: Vec::new(),
            accepting,
        });
        (self.states.len() - 1) as StateId
    }

    pub fn set_accepting(&mut self, state: StateId) {
        self.states[state as usize].accepting = true;
    }

    pub fn set_start(&mut self, state: StateId) {
        self.start = state;
    }

    pub fn add_edge(&mut self, src: StateId, symbol: Symbol, dst: StateId) {
        let edges = &mut self.states[src as usize].edges;
        if !edges.contains(&(symbol, dst)) {
            edges.push((symbol, dst));
        }
    }

    pub fn domains(&self) -> &[u32] {
        &self.domains
    }

    /// Number of states reachable from the start state.
    pub fn reachable_states(&self) -> usize {
        if self.states.is_empty() {
            return 0;
        }
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.start]);
        seen[self.start as usize] = true;
        let mut count = 0;
        while let Some(s) = queue.pop_front() {
            count += 1;
            for &(_, t) in &self.states[s as usize].edges {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
        count
    }

    /// Subset construction followed by minimization. Acyclicity bounds the
    /// construction: each subset holds states of one level only.
    pub fn determinize(&self) -> (Dafsa, DeterminizeStats) {
        let nfa_states = self.reachable_states();
        if self.states.is_empty() {
            let empty = Dafsa::empty(&self.domains);
            return (empty, DeterminizeStats::default());
        }
        let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
        let mut subsets: Vec<(Vec<StateId>, usize)> = Vec::new();
        let root = vec![self.start];
        index.insert(root.clone(), 0);
        subsets.push((root, 0));
        let mut states: Vec<State> = Vec::new();

        let mut next = 0;
        while next < subsets.len() {
            let (members, depth) = subsets[next].clone();
            let accepting = members.iter().any(|&s| self.states[s as usize].accepting);
            let all_wild = members.iter().all(|&s| {
                self.states[s as usize]
                    .edges
                    .iter()
                    .all(|(sym, _)| *sym == Symbol::Wildcard)
            });

            let mut intern = |mut set: Vec<StateId>| -> StateId {
                set.sort_unstable();
                set.dedup();
                if let Some(&id) = index.get(&set) {
                    return id;
                }
                let id = subsets.len() as StateId;
                index.insert(set.clone(), id);
                subsets.push((set, depth + 1));
                id
            };

            let edges = if all_wild {
                let targets: Vec<StateId> = members
                    .iter()
                    .flat_map(|&s| self.states[s as usize].edges.iter().map(|&(_, t)| t))
                    .collect();
                if targets.is_empty() {
                    Edges::none()
                } else {
                    Edges::Wildcard(intern(targets))
                }
            } else {
                let k = self.domains[depth];
                let mut list = Vec::new();
                for v in 0..k {
                    let targets: Vec<StateId> = members
                        .iter()
                        .flat_map(|&s| {
                            self.states[s as usize]
                                .edges
                                .iter()
                                .filter(move |(sym, _)| match sym {
                                    Symbol::Wildcard => true,
                                    Symbol::Literal(x) => *x == v,
                                })
                                .map(|&(_, t)| t)
                        })
                        .collect();
                    if !targets.is_empty() {
                        list.push((v, intern(targets)));
                    }
                }
                Edges::Literal(list)
            };
            states.push(State { edges, accepting });
            next += 1;
        }

        let subset_states = states.len();
        let dfa = Dafsa::from_parts(self.domains.clone(), states, 0).minimize();
        let stats = DeterminizeStats {
            nfa_states,
            subset_states,
            dfa_states: dfa.state_count(),
        };
        (dfa, stats)
    }
}
