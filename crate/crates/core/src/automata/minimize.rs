use std::collections::{HashMap, VecDeque};

use super::{Dafsa, Edges, State, StateId};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Unvisited,
    Open,
    Dead,
    Live(StateId),
}

impl Dafsa {
    /// Minimal, trimmed, canonically numbered automaton for the same
    /// language.
    ///
    /// States are merged bottom-up through a register keyed on
    /// (accepting, outgoing edges), which is exact for acyclic automata.
    /// Before registration a literal fan-out covering the whole domain with a
    /// single target is rewritten as one wildcard edge, so equivalent states
    /// always end up with identical keys.
    pub fn minimize(&self) -> Dafsa {
        let n = self.states.len();
        let mut mark = vec![Mark::Unvisited; n];
        let mut depth = vec![0usize; n];
        let mut register: HashMap<State, StateId> = HashMap::new();
        let mut merged: Vec<State> = Vec::new();

        // frames of (state, index of the next edge to descend into)
        let mut stack = vec![(self.start, 0usize)];
        mark[self.start as usize] = Mark::Open;
        while let Some(frame) = stack.last_mut() {
            let s = frame.0;
            let state = &self.states[s as usize];
            if let Some(t) = state.edges.nth_target(frame.1) {
                frame.1 += 1;
                if mark[t as usize] == Mark::Unvisited {
                    mark[t as usize] = Mark::Open;
                    depth[t as usize] = depth[s as usize] + 1;
                    stack.push((t, 0));
                }
                continue;
            }
            stack.pop();
            let live = |t: StateId| match mark[t as usize] {
                Mark::Live(id) => Some(id),
                _ => None,
            };
            let edges = match &state.edges {
                Edges::Wildcard(t) => match live(*t) {
                    Some(id) => Edges::Wildcard(id),
                    None => Edges::none(),
                },
                Edges::Literal(list) => {
                    let kept: Vec<(u32, StateId)> = list
                        .iter()
                        .filter_map(|&(v, t)| live(t).map(|id| (v, id)))
                        .collect();
                    let domain = self.domains.get(depth[s as usize]).copied();
                    match (kept.first(), domain) {
                        (Some(&(_, first)), Some(k))
                            if kept.len() == k as usize
                                && kept.iter().all(|&(_, t)| t == first) =>
                        {
                            Edges::Wildcard(first)
                        }
                        _ => Edges::Literal(kept),
                    }
                }
            };
            if edges.is_empty() && !state.accepting {
                mark[s as usize] = Mark::Dead;
                continue;
            }
            let key = State {
                edges,
                accepting: state.accepting,
            };
            let id = *register.entry(key.clone()).or_insert_with(|| {
                merged.push(key);
                (merged.len() - 1) as StateId
            });
            mark[s as usize] = Mark::Live(id);
        }

        match mark[self.start as usize] {
            Mark::Live(root) => renumber(self.domains.clone(), &merged, root),
            _ => Dafsa::empty(&self.domains),
        }
    }
}

/// Breadth-first renumbering from `root`, visiting edges in symbol order.
fn renumber(domains: Vec<u32>, states: &[State], root: StateId) -> Dafsa {
    let mut ids = vec![StateId::MAX; states.len()];
    let mut order = Vec::with_capacity(states.len());
    let mut queue = VecDeque::new();
    ids[root as usize] = 0;
    queue.push_back(root);
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for t in states[s as usize].edges.targets() {
            if ids[t as usize] == StateId::MAX {
                ids[t as usize] = (order.len() + queue.len()) as StateId;
                queue.push_back(t);
            }
        }
    }
    let out = order
        .iter()
        .map(|&s| {
            let st = &states[s as usize];
            let edges = match &st.edges {
                Edges::Wildcard(t) => Edges::Wildcard(ids[*t as usize]),
                Edges::Literal(v) => {
                    Edges::Literal(v.iter().map(|&(x, t)| (x, ids[t as usize])).collect())
                }
            };
            State {
                edges,
                accepting: st.accepting,
            }
        })
        .collect();
    Dafsa::from_parts(domains, out, 0)
}
