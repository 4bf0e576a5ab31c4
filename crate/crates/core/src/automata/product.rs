//! Synchronous product of two automata over the same levels.

use std::collections::HashMap;

use super::{AutomatonError, Dafsa, Edges, State, StateId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Intersect,
    Union,
    Difference,
}

impl Kind {
    fn accepting(self, a: bool, b: bool) -> bool {
        match self {
            Kind::Intersect => a && b,
            Kind::Union => a || b,
            Kind::Difference => a && !b,
        }
    }

    // Whether a pair of (possibly missing) states can still lead to an
    // accepted string.
    fn live(self, a: Option<StateId>, b: Option<StateId>) -> bool {
        match self {
            Kind::Intersect => a.is_some() && b.is_some(),
            Kind::Union => a.is_some() || b.is_some(),
            Kind::Difference => a.is_some(),
        }
    }
}

type Pair = (Option<StateId>, Option<StateId>);

/// `Some(t)` when the edges send every symbol to the same target `t` (a
/// wildcard, or no edge at all as `t = None`).
fn uniform(edges: Option<&Edges>) -> Option<Option<StateId>> {
    match edges {
        None => Some(None),
        Some(Edges::Wildcard(t)) => Some(Some(*t)),
        Some(e) if e.is_empty() => Some(None),
        Some(_) => None,
    }
}

fn product(a: &Dafsa, b: &Dafsa, kind: Kind) -> Result<Dafsa, AutomatonError> {
    a.ensure_compatible(b)?;
    let mut index: HashMap<Pair, StateId> = HashMap::new();
    let mut pairs: Vec<(Pair, usize)> = Vec::new();
    let mut states: Vec<State> = Vec::new();

    let root: Pair = (Some(a.start), Some(b.start));
    index.insert(root, 0);
    pairs.push((root, 0));
    states.push(State {
        edges: Edges::none(),
        accepting: false,
    });

    let mut next = 0;
    while next < pairs.len() {
        let ((pa, pb), depth) = pairs[next];
        let sa = pa.map(|s| a.state(s));
        let sb = pb.map(|s| b.state(s));
        let accepting = kind.accepting(
            sa.is_some_and(|s| s.accepting),
            sb.is_some_and(|s| s.accepting),
        );
        let ea = sa.map(|s| &s.edges);
        let eb = sb.map(|s| &s.edges);

        let mut intern = |pair: Pair| -> StateId {
            *index.entry(pair).or_insert_with(|| {
                pairs.push((pair, depth + 1));
                states.push(State {
                    edges: Edges::none(),
                    accepting: false,
                });
                (pairs.len() - 1) as StateId
            })
        };

        let edges = match (uniform(ea), uniform(eb)) {
            (Some(ta), Some(tb)) => {
                if kind.live(ta, tb) {
                    Edges::Wildcard(intern((ta, tb)))
                } else {
                    Edges::none()
                }
            }
            _ => {
                let k = a.domains[depth];
                let mut list = Vec::new();
                for v in 0..k {
                    let ta = ea.and_then(|e| e.target(v));
                    let tb = eb.and_then(|e| e.target(v));
                    if kind.live(ta, tb) {
                        list.push((v, intern((ta, tb))));
                    }
                }
                Edges::Literal(list)
            }
        };
        states[next] = State { edges, accepting };
        next += 1;
    }

    Ok(Dafsa::from_parts(a.domains.clone(), states, 0).minimize())
}

impl Dafsa {
    /// Automaton for the intersection of both languages.
    pub fn intersect(&self, other: &Dafsa) -> Result<Dafsa, AutomatonError> {
        product(self, other, Kind::Intersect)
    }

    /// Automaton for the union of both languages.
    pub fn union(&self, other: &Dafsa) -> Result<Dafsa, AutomatonError> {
        product(self, other, Kind::Union)
    }

    /// Automaton for the strings of `self` not accepted by `other`.
    pub fn difference(&self, other: &Dafsa) -> Result<Dafsa, AutomatonError> {
        product(self, other, Kind::Difference)
    }

    /// Whether the two languages share a string, without building the
    /// product automaton.
    pub fn intersects(&self, other: &Dafsa) -> Result<bool, AutomatonError> {
        self.ensure_compatible(other)?;
        let mut seen: HashMap<(StateId, StateId), bool> = HashMap::new();
        Ok(self.meet(other, self.start, other.start, &mut seen))
    }

    fn meet(
        &self,
        other: &Dafsa,
        a: StateId,
        b: StateId,
        seen: &mut HashMap<(StateId, StateId), bool>,
    ) -> bool {
        if let Some(&r) = seen.get(&(a, b)) {
            return r;
        }
        let sa = self.state(a);
        let sb = other.state(b);
        let found = if sa.accepting && sb.accepting {
            true
        } else {
            match (&sa.edges, &sb.edges) {
                (Edges::Wildcard(ta), Edges::Wildcard(tb)) => self.meet(other, *ta, *tb, seen),
                (Edges::Wildcard(ta), Edges::Literal(list)) => {
                    list.iter().any(|&(_, tb)| self.meet(other, *ta, tb, seen))
                }
                (Edges::Literal(list), Edges::Wildcard(tb)) => {
                    list.iter().any(|&(_, ta)| self.meet(other, ta, *tb, seen))
                }
                (Edges::Literal(la), Edges::Literal(lb)) => {
                    let (mut i, mut j) = (0, 0);
                    let mut hit = false;
                    while i < la.len() && j < lb.len() && !hit {
                        match la[i].0.cmp(&lb[j].0) {
                            std::cmp::Ordering::Less => i += 1,
                            std::cmp::Ordering::Greater => j += 1,
                            std::cmp::Ordering::Equal => {
                                hit = self.meet(other, la[i].1, lb[j].1, seen);
                                i += 1;
                                j += 1;
                            }
                        }
                    }
                    hit
                }
            }
        };
        seen.insert((a, b), found);
        found
    }
}
