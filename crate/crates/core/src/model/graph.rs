use std::collections::BTreeSet;

use super::{GraphicalModel, ModelError};

/// Undirected graph with an edge between every two variables sharing a
/// factor scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimalGraph {
    adjacency: Vec<BTreeSet<usize>>,
}

impl PrimalGraph {
    pub fn new(n: usize) -> Self {
        PrimalGraph {
            adjacency: vec![BTreeSet::new(); n],
        }
    }

    pub fn of_model(m: &GraphicalModel) -> Self {
        let mut g = PrimalGraph::new(m.variable_count());
        for f in m.factors() {
            g.add_clique(f.scope());
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adjacency[a].insert(b);
            self.adjacency[b].insert(a);
        }
    }

    pub fn add_clique(&mut self, vars: &[usize]) {
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                self.add_edge(a, b);
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.range(a + 1..).map(move |&b| (a, b)))
            .collect()
    }

    fn remove_vertex(&mut self, v: usize) -> BTreeSet<usize> {
        let ns = std::mem::take(&mut self.adjacency[v]);
        for &u in &ns {
            self.adjacency[u].remove(&v);
        }
        ns
    }
}

/// How an ordering was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderingSource {
    MinFill,
    WeightedMinFill,
    User,
}

/// A permutation of the variables. Buckets are processed from the last
/// position to the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationOrder {
    order: Vec<usize>,
    source: OrderingSource,
}

impl EliminationOrder {
    pub fn new(order: Vec<usize>, source: OrderingSource) -> Result<Self, ModelError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(ModelError::InvalidOrdering { n });
            }
        }
        Ok(EliminationOrder { order, source })
    }

    /// Variables in id order.
    pub fn identity(n: usize) -> Self {
        EliminationOrder {
            order: (0..n).collect(),
            source: OrderingSource::User,
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn source(&self) -> OrderingSource {
        self.source
    }

    /// `positions()[v]` is the index of variable `v` in the ordering.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

fn fill_metric(g: &PrimalGraph, v: usize, domains: &[u32], weighted: bool) -> u128 {
    let ns: Vec<usize> = g.neighbors(v).iter().copied().collect();
    let mut total = 0u128;
    for (i, &a) in ns.iter().enumerate() {
        for &b in &ns[i + 1..] {
            if !g.neighbors(a).contains(&b) {
                total += if weighted {
                    domains[a] as u128 * domains[b] as u128
                } else {
                    1
                };
            }
        }
    }
    total
}

/// Greedy min-fill: repeatedly eliminate the variable whose neighbors need
/// the fewest fill edges (ties to the lowest id). With `weighted`, each fill
/// edge counts the product of its endpoints' domain sizes. The first
/// variable eliminated is placed last in the ordering.
pub fn min_fill_ordering(m: &GraphicalModel, weighted: bool) -> EliminationOrder {
    let mut g = PrimalGraph::of_model(m);
    let n = g.vertex_count();
    let domains = m.domains();
    let mut alive = vec![true; n];
    let mut metric: Vec<u128> = (0..n)
        .map(|v| fill_metric(&g, v, domains, weighted))
        .collect();
    let mut eliminated = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (metric[v], v))
            .expect("a vertex remains");
        let ns: Vec<usize> = g.neighbors(v).iter().copied().collect();
        g.add_clique(&ns);
        g.remove_vertex(v);
        alive[v] = false;
        eliminated.push(v);
        let mut touched: BTreeSet<usize> = ns.iter().copied().collect();
        for &u in &ns {
            touched.extend(g.neighbors(u).iter().copied());
        }
        for u in touched {
            metric[u] = fill_metric(&g, u, domains, weighted);
        }
    }
    eliminated.reverse();
    let source = if weighted {
        OrderingSource::WeightedMinFill
    } else {
        OrderingSource::MinFill
    };
    EliminationOrder {
        order: eliminated,
        source,
    }
}

/// Largest number of neighbors a variable has when it is eliminated,
/// processing the ordering from last to first.
pub fn induced_width(m: &GraphicalModel, order: &EliminationOrder) -> usize {
    let mut g = PrimalGraph::of_model(m);
    let mut width = 0;
    for &v in order.as_slice().iter().rev() {
        let ns: Vec<usize> = g.neighbors(v).iter().copied().collect();
        width = width.max(ns.len());
        g.add_clique(&ns);
        g.remove_vertex(v);
    }
    width
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{TabularFactor, Value};
    use crate::model::Task;

    fn model(n: usize, scopes: &[&[usize]]) -> GraphicalModel {
        let factors = scopes
            .iter()
            .map(|s| {
                TabularFactor::constant(s.to_vec(), vec![2; s.len()], Value::Finite(0.0)).unwrap()
            })
            .collect();
        GraphicalModel::new(vec![2; n], factors, Task::Wcsp).unwrap()
    }

    #[test]
    fn primal_graph_of_chain_and_triangle() {
        let m = model(4, &[&[1, 2], &[2, 3]]);
        assert_eq!(PrimalGraph::of_model(&m).edges(), vec![(1, 2), (2, 3)]);
        let m = model(4, &[&[1, 2, 3]]);
        assert_eq!(
            PrimalGraph::of_model(&m).edges(),
            vec![(1, 2), (1, 3), (2, 3)]
        );
    }

    #[test]
    fn chain_has_width_one() {
        let m = model(4, &[&[0, 1], &[1, 2], &[2, 3]]);
        for weighted in [false, true] {
            let d = min_fill_ordering(&m, weighted);
            assert_eq!(induced_width(&m, &d), 1);
        }
    }

    #[test]
    fn clique_width_is_order_independent() {
        let m = model(4, &[&[0, 1, 2, 3]]);
        assert_eq!(induced_width(&m, &min_fill_ordering(&m, false)), 3);
        for order in [[0, 1, 2, 3], [3, 1, 0, 2], [2, 3, 1, 0]] {
            let d = EliminationOrder::new(order.to_vec(), OrderingSource::User).unwrap();
            assert_eq!(induced_width(&m, &d), 3);
        }
    }

    #[test]
    fn cycle_needs_one_fill_edge() {
        let m = model(4, &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]]);
        let d = min_fill_ordering(&m, false);
        assert_eq!(induced_width(&m, &d), 2);
        // every vertex has fill 1, so the lowest id goes first, i.e. last
        assert_eq!(*d.as_slice().last().unwrap(), 0);
    }

    #[test]
    fn ordering_must_be_permutation() {
        assert!(EliminationOrder::new(vec![0, 0, 1], OrderingSource::User).is_err());
        assert!(EliminationOrder::new(vec![0, 3, 1], OrderingSource::User).is_err());
        let d = EliminationOrder::new(vec![2, 0, 1], OrderingSource::User).unwrap();
        assert_eq!(d.positions(), vec![1, 2, 0]);
    }
}
