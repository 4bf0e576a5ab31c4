use std::collections::BTreeSet;

use dafsa_be::factor::{TabularFactor, Value};
use dafsa_be::generate::{micro_instance, MicroSpec};
use dafsa_be::model::{
    bucket_elimination, induced_width, min_fill_ordering, EliminationOrder, GraphicalModel,
    OrderingSource, PrimalGraph, SolveOptions, Task,
};
use dafsa_be::oracle::{brute_force, tabular_be, OracleBudget};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fin(xs: &[f64]) -> Vec<Value> {
    xs.iter().map(|&x| Value::Finite(x)).collect()
}

fn worked_table() -> TabularFactor {
    let inf = Value::Infinity;
    let v = |x| Value::Finite(x);
    TabularFactor::new(
        vec![0, 1, 2],
        vec![2, 2, 2],
        vec![v(1.0), v(1.0), v(2.0), v(1.0), v(3.0), inf, v(3.0), inf],
    )
    .unwrap()
}

#[test]
fn worked_model_optimum_and_lowest_assignment() {
    let m = GraphicalModel::new(vec![2, 2, 2], vec![worked_table()], Task::Wcsp).unwrap();
    let brute = brute_force(&m, &OracleBudget::default(), None).unwrap();
    assert_eq!(brute.optimum, Value::Finite(1.0));
    assert_eq!(brute.assignment, Some(vec![0, 0, 0]));
    for d in [min_fill_ordering(&m, false), EliminationOrder::identity(3)] {
        let r = bucket_elimination(&m, &d, &SolveOptions::default()).unwrap();
        assert_eq!(r.optimum, Value::Finite(1.0));
        assert_eq!(r.assignment, Some(vec![0, 0, 0]));
    }
}

#[test]
fn unary_model_optimum_is_op_over_values() {
    let f = TabularFactor::new(vec![0], vec![4], fin(&[0.3, 0.9, 0.1, 0.9])).unwrap();
    let m = GraphicalModel::new(vec![4], vec![f], Task::Map).unwrap();
    let d = EliminationOrder::identity(1);
    let r = bucket_elimination(&m, &d, &SolveOptions::default()).unwrap();
    assert_eq!(r.optimum, Value::Finite(0.9));
    assert_eq!(r.assignment, Some(vec![1]));
    let t = tabular_be(&m, &d, &OracleBudget::default(), None).unwrap();
    assert_eq!(
        (t.optimum, t.assignment),
        (Value::Finite(0.9), Some(vec![1]))
    );
    let m = m.with_task(Task::Wcsp);
    let r = bucket_elimination(&m, &d, &SolveOptions::default()).unwrap();
    assert_eq!(
        (r.optimum, r.assignment),
        (Value::Finite(0.1), Some(vec![2]))
    );
}

#[test]
fn chain_model_hand_computed() {
    // costs: f(x0,x1) = |x0 - x1| * 2, g(x1,x2) = x1 + x2, h(x0) = 2 - x0 over domains 3
    let f = TabularFactor::new(
        vec![0, 1],
        vec![3, 3],
        fin(&[0.0, 2.0, 4.0, 2.0, 0.0, 2.0, 4.0, 2.0, 0.0]),
    )
    .unwrap();
    let g = TabularFactor::new(
        vec![1, 2],
        vec![3, 3],
        fin(&[0.0, 1.0, 2.0, 1.0, 2.0, 3.0, 2.0, 3.0, 4.0]),
    )
    .unwrap();
    let h = TabularFactor::new(vec![0], vec![3], fin(&[2.0, 1.0, 0.0])).unwrap();
    let m = GraphicalModel::new(vec![3, 3, 3], vec![f, g, h], Task::Wcsp).unwrap();
    // x=(0,0,0): 0+0+2 = 2; x=(1,1,0): 0+1+1 = 2; x=(2,2,0): 0+2+0 = 2; (1,0,0): 2+0+1 = 3
    let budget = OracleBudget::default();
    for order in [vec![0, 1, 2], vec![2, 1, 0], vec![1, 2, 0]] {
        let d = EliminationOrder::new(order, OrderingSource::User).unwrap();
        let t = tabular_be(&m, &d, &budget, None).unwrap();
        assert_eq!(t.optimum, Value::Finite(2.0));
        let r = bucket_elimination(&m, &d, &SolveOptions::default()).unwrap();
        assert_eq!(r.optimum, Value::Finite(2.0));
        assert_eq!(
            m.evaluate(r.assignment.as_ref().unwrap()),
            Value::Finite(2.0)
        );
    }
    assert_eq!(
        brute_force(&m, &budget, None).unwrap().assignment,
        Some(vec![0, 0, 0])
    );
}

fn check_agreement(m: &GraphicalModel, seed: u64) {
    let task = m.task();
    let budget = OracleBudget::default();
    let brute = brute_force(m, &budget, None).unwrap();
    let d = min_fill_ordering(m, seed.is_multiple_of(2));
    let table = tabular_be(m, &d, &budget, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled: Vec<usize> = (0..m.variable_count()).collect();
    shuffled.shuffle(&mut rng);
    let other = EliminationOrder::new(shuffled, OrderingSource::User).unwrap();
    for (label, order, prune) in [
        ("min-fill", &d, true),
        ("min-fill", &d, false),
        ("shuffled", &other, true),
    ] {
        let opts = SolveOptions {
            prune_infinity: prune,
            ..SolveOptions::default()
        };
        let r = bucket_elimination(m, order, &opts).unwrap();
        assert_eq!(
            r.is_feasible(),
            brute.is_feasible(),
            "seed {seed} {label} prune={prune}"
        );
        assert!(
            task.optima_agree(r.optimum, brute.optimum),
            "seed {seed} {label}: {} vs {}",
            r.optimum,
            brute.optimum
        );
        if let Some(x) = &r.assignment {
            assert!(
                task.optima_agree(m.evaluate(x), r.optimum),
                "seed {seed} {label}: certificate"
            );
        }
    }
    assert!(
        task.optima_agree(table.optimum, brute.optimum),
        "seed {seed} tabular"
    );
    if let Some(x) = &table.assignment {
        assert!(task.optima_agree(m.evaluate(x), table.optimum));
    }
    if let Some(x) = &brute.assignment {
        assert_eq!(m.evaluate(x), brute.optimum);
    }
}

#[test]
fn three_way_agreement_on_random_models() {
    let specs = [
        MicroSpec::new(Task::Map, false),
        MicroSpec::new(Task::Wcsp, false),
        MicroSpec::new(Task::Wcsp, true),
    ];
    for seed in 0..120u64 {
        let spec = &specs[seed as usize % specs.len()];
        check_agreement(&micro_instance(seed, spec), seed);
    }
}

#[test]
fn all_infinite_factor_is_infeasible_everywhere() {
    let f = TabularFactor::constant(vec![0, 1], vec![2, 3], Value::Infinity).unwrap();
    let m = GraphicalModel::new(vec![2, 3], vec![f], Task::Wcsp).unwrap();
    let budget = OracleBudget::default();
    assert!(!brute_force(&m, &budget, None).unwrap().is_feasible());
    let d = min_fill_ordering(&m, false);
    assert!(!tabular_be(&m, &d, &budget, None).unwrap().is_feasible());
    assert!(!bucket_elimination(&m, &d, &SolveOptions::default())
        .unwrap()
        .is_feasible());
}

fn random_scopes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<usize>> {
    let count = rng.gen_range(1..=2 * n);
    (0..count)
        .map(|_| {
            let arity = rng.gen_range(1..=3.min(n));
            let vars: Vec<usize> = (0..n).collect();
            let mut s: Vec<usize> = vars.choose_multiple(rng, arity).copied().collect();
            s.sort_unstable();
            s
        })
        .collect()
}

fn model_of(scopes: &[Vec<usize>], domains: Vec<u32>) -> GraphicalModel {
    let factors = scopes
        .iter()
        .map(|s| {
            let d = s.iter().map(|&v| domains[v]).collect();
            TabularFactor::constant(s.clone(), d, Value::Finite(0.0)).unwrap()
        })
        .collect();
    GraphicalModel::new(domains, factors, Task::Wcsp).unwrap()
}

fn adjacency_matrix(n: usize, scopes: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for s in scopes {
        for &a in s {
            for &b in s {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
    }
    adj
}

/// Elimination simulated on an adjacency matrix, last position first.
fn matrix_width(mut adj: Vec<Vec<bool>>, order: &[usize]) -> usize {
    let n = adj.len();
    let mut alive = vec![true; n];
    let mut width = 0;
    for &v in order.iter().rev() {
        let ns: Vec<usize> = (0..n).filter(|&u| alive[u] && adj[v][u]).collect();
        width = width.max(ns.len());
        for &a in &ns {
            for &b in &ns {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
        alive[v] = false;
    }
    width
}

/// Exact treewidth by dynamic programming over eliminated sets.
fn exact_treewidth(adj: &[Vec<bool>]) -> usize {
    let n = adj.len();
    // q(s, v): vertices outside s ∪ {v} reachable from v through s
    let q = |s: usize, v: usize| -> usize {
        let mut seen = 1usize << v;
        let mut stack = vec![v];
        let mut count = 0;
        while let Some(u) = stack.pop() {
            for w in 0..n {
                if adj[u][w] && seen & (1 << w) == 0 {
                    seen |= 1 << w;
                    if s & (1 << w) != 0 {
                        stack.push(w);
                    } else {
                        count += 1;
                    }
                }
            }
        }
        count
    };
    let mut tw = vec![usize::MAX; 1 << n];
    tw[0] = 0;
    for s in 1usize..(1 << n) {
        for v in 0..n {
            if s & (1 << v) != 0 {
                let rest = s & !(1 << v);
                let cand = tw[rest].max(q(rest, v));
                tw[s] = tw[s].min(cand);
            }
        }
    }
    tw[(1 << n) - 1]
}

#[test]
fn primal_graph_matches_clique_union() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(1..=10);
        let scopes = random_scopes(&mut rng, n);
        let m = model_of(&scopes, vec![2; n]);
        let mut expected = BTreeSet::new();
        for s in &scopes {
            for &a in s {
                for &b in s {
                    if a < b {
                        expected.insert((a, b));
                    }
                }
            }
        }
        let g = PrimalGraph::of_model(&m);
        assert_eq!(g.edges(), expected.into_iter().collect::<Vec<_>>());
        for v in 0..n {
            assert!(!g.neighbors(v).contains(&v));
            assert!(g.neighbors(v).iter().all(|&u| g.neighbors(u).contains(&v)));
        }
    }
}

#[test]
fn induced_width_matches_matrix_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let n = rng.gen_range(1..=12);
        let scopes = random_scopes(&mut rng, n);
        let m = model_of(&scopes, vec![2; n]);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let d = EliminationOrder::new(order.clone(), OrderingSource::User).unwrap();
        assert_eq!(
            induced_width(&m, &d),
            matrix_width(adjacency_matrix(n, &scopes), &order)
        );
    }
}

#[test]
fn min_fill_is_close_to_treewidth() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut exact_hits = 0;
    let trials = 150;
    for _ in 0..trials {
        let n = rng.gen_range(1..=10);
        let scopes = random_scopes(&mut rng, n);
        let domains: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
        let m = model_of(&scopes, domains);
        let tw = exact_treewidth(&adjacency_matrix(n, &scopes));
        for weighted in [false, true] {
            let d = min_fill_ordering(&m, weighted);
            let w = induced_width(&m, &d);
            assert!(w >= tw);
            assert!(w <= tw + 2, "n={n} width {w} treewidth {tw}");
            if !weighted && w == tw {
                exact_hits += 1;
            }
        }
    }
    assert!(
        exact_hits * 10 >= trials * 8,
        "min-fill optimal on only {exact_hits}/{trials}"
    );
}
