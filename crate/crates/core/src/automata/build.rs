//! Incremental construction of a minimal automaton from sorted input
//! (Daciuk et al.'s algorithm for sorted data).

use std::collections::HashMap;

use super::{AutomatonError, Dafsa, Edges, State, StateId};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    edges: Vec<(u32, StateId)>,
    accepting: bool,
}

/// Builds a minimal [`Dafsa`] from strings inserted in strictly increasing
/// lexicographic order.
///
/// Only the path of the most recently inserted string is left unminimized;
/// every other state is already in the register when the next string
/// arrives.
#[derive(Debug)]
pub struct DafsaBuilder {
    domains: Vec<u32>,
    nodes: Vec<Node>,
    register: HashMap<Node, StateId>,
    // path[i] is the state reached after i symbols of the last string
    path: Vec<StateId>,
    last: Option<Vec<u32>>,
    inserted: usize,
}

impl DafsaBuilder {
    pub fn new(domains: &[u32]) -> Self {
        DafsaBuilder {
            domains: domains.to_vec(),
            nodes: vec![Node {
                edges: Vec::new(),
                accepting: false,
            }],
            register: HashMap::new(),
            path: vec![0],
            last: None,
            inserted: 0,
        }
    }

    pub fn insert(&mut self, string: &[u32]) -> Result<(), AutomatonError> {
        let index = self.inserted;
        if string.len() != self.domains.len() {
            return Err(AutomatonError::LengthMismatch {
                index,
                expected: self.domains.len(),
                found: string.len(),
            });
        }
        for (level, (&v, &k)) in string.iter().zip(&self.domains).enumerate() {
            if v >= k {
                return Err(AutomatonError::SymbolOutOfDomain {
                    level,
                    symbol: v,
                    domain: k,
                });
            }
        }
        let prefix = match &self.last {
            Some(last) => {
                if last.as_slice() >= string {
                    return Err(AutomatonError::Unsorted { index });
                }
                last.iter().zip(string).take_while(|(a, b)| a == b).count()
            }
            None => 0,
        };
        self.register_below(prefix);
        self.path.truncate(prefix + 1);
        for &v in &string[prefix..] {
            let id = self.nodes.len() as StateId;
            self.nodes.push(Node {
                edges: Vec::new(),
                accepting: false,
            });
            let parent = *self.path.last().expect("path holds the root");
            self.nodes[parent as usize].edges.push((v, id));
            self.path.push(id);
        }
        let tail = *self.path.last().expect("path holds the root");
        self.nodes[tail as usize].accepting = true;
        self.last = Some(string.to_vec());
        self.inserted += 1;
        Ok(())
    }

    /// Replace-or-register every state on the current path deeper than
    /// `depth`, deepest first.
    fn register_below(&mut self, depth: usize) {
        for d in (depth + 1..self.path.len()).rev() {
            let child = self.path[d];
            let parent = self.path[d - 1];
            let node = &self.nodes[child as usize];
            match self.register.get(node) {
                Some(&rep) => {
                    let edge = self.nodes[parent as usize]
                        .edges
                        .last_mut()
                        .expect("parent has an edge to child");
                    edge.1 = rep;
                }
                None => {
                    self.register.insert(node.clone(), child);
                }
            }
        }
    }

    pub fn finish(mut self) -> Dafsa {
        self.register_below(0);
        let states = self
            .nodes
            .into_iter()
            .map(|n| State {
                edges: Edges::Literal(n.edges),
                accepting: n.accepting,
            })
            .collect();
        // Drops the states replaced during registration, introduces wildcard
        // edges and renumbers canonically.
        Dafsa::from_parts(self.domains, states, 0).minimize()
    }
}
