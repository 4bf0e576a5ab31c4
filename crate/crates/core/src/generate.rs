//! Seeded random instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::factor::{TabularFactor, Value};
use crate::model::{GraphicalModel, Task};

/// Shape of a random micro-instance.
#[derive(Clone, Debug)]
pub struct MicroSpec {
    pub task: Task,
    pub max_variables: usize,
    pub max_domain: u32,
    pub max_factors: usize,
    pub max_arity: usize,
    /// Probability that a WCSP cell is a hard violation (∞).
    pub hard_probability: f64,
    /// Instances are resampled until their assignment count fits.
    pub max_assignments: u128,
}

impl MicroSpec {
    pub fn new(task: Task, hard: bool) -> Self {
        MicroSpec {
            task,
            max_variables: 12,
            max_domain: 4,
            max_factors: 12,
            max_arity: 3,
            hard_probability: if hard && task == Task::Wcsp { 0.2 } else { 0.0 },
            max_assignments: 1_000_000,
        }
    }
}

const MAP_PALETTE: [f64; 6] = [0.05, 0.1, 0.25, 0.5, 0.75, 1.0];

fn random_value<R: Rng>(rng: &mut R, task: Task, palette: bool, hard_probability: f64) -> Value {
    match task {
        Task::Map if palette => Value::Finite(*MAP_PALETTE.choose(rng).expect("non-empty")),
        Task::Map => Value::Finite(rng.gen_range(0.01..1.0)),
        Task::Wcsp if rng.gen_bool(hard_probability) => Value::Infinity,
        Task::Wcsp if palette => Value::Finite(rng.gen_range(0..5) as f64),
        Task::Wcsp => Value::Finite((rng.gen_range(0.0..10.0f64) * 1000.0).round() / 1000.0),
    }
}

fn random_factor<R: Rng>(
    rng: &mut R,
    scope: Vec<usize>,
    domains: &[u32],
    spec: &MicroSpec,
) -> TabularFactor {
    let doms: Vec<u32> = scope.iter().map(|&v| domains[v]).collect();
    let size: usize = doms.iter().map(|&k| k as usize).product();
    let palette = rng.gen_bool(0.5);
    let values = (0..size)
        .map(|_| random_value(rng, spec.task, palette, spec.hard_probability))
        .collect();
    TabularFactor::new(scope, doms, values).expect("consistent by construction")
}

/// A random model within `spec`, deterministic in `seed`.
pub fn micro_instance(seed: u64, spec: &MicroSpec) -> GraphicalModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, domains) = loop {
        let n = rng.gen_range(1..=spec.max_variables);
        let domains: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=spec.max_domain)).collect();
        let count = domains.iter().fold(1u128, |a, &k| a * k as u128);
        if count <= spec.max_assignments {
            break (n, domains);
        }
    };
    let factor_count = rng.gen_range(1..=spec.max_factors);
    let vars: Vec<usize> = (0..n).collect();
    let factors = (0..factor_count)
        .map(|_| {
            let arity = rng.gen_range(0..=spec.max_arity.min(n));
            let mut scope: Vec<usize> = vars.choose_multiple(&mut rng, arity).copied().collect();
            scope.sort_unstable();
            random_factor(&mut rng, scope, &domains, spec)
        })
        .collect();
    GraphicalModel::new(domains, factors, spec.task).expect("consistent by construction")
}

/// Shape of a banded binary instance with highly redundant factors.
#[derive(Clone, Debug)]
pub struct BandedSpec {
    pub task: Task,
    pub variables: usize,
    /// Every factor scope lies within `window` consecutive variables.
    pub window: usize,
    pub arity: usize,
    /// Distance between the first variables of consecutive windows.
    pub stride: usize,
    /// Factors drawn per window.
    pub factors_per_window: usize,
}

impl BandedSpec {
    pub fn new(task: Task, variables: usize, window: usize) -> Self {
        BandedSpec {
            task,
            variables,
            window,
            arity: 8,
            stride: 2,
            factors_per_window: 2,
        }
    }
}

/// A binary factor that either depends only on its two leading variables or
/// is constant outside the all-ones row, with up to two rows overwritten.
fn structured_factor<R: Rng>(rng: &mut R, scope: Vec<usize>, task: Task) -> TabularFactor {
    let m = scope.len();
    let size = 1usize << m;
    let levels: Vec<Value> = (0..3)
        .map(|_| match task {
            Task::Map => Value::Finite(*MAP_PALETTE[2..].choose(rng).expect("non-empty")),
            Task::Wcsp => Value::Finite(rng.gen_range(0..4) as f64),
        })
        .collect();
    let by_leading = rng.gen_bool(0.5);
    let mut values: Vec<Value> = (0..size)
        .map(|row| {
            if by_leading {
                // depends on the two leading variables
                levels[(row >> (m - 2)).min(2)]
            } else if row == size - 1 {
                levels[1]
            } else {
                levels[0]
            }
        })
        .collect();
    // a few exception tuples
    for _ in 0..rng.gen_range(0..3) {
        let row = rng.gen_range(0..size);
        values[row] = match task {
            Task::Wcsp if rng.gen_bool(0.5) => Value::Infinity,
            _ => levels[2],
        };
    }
    TabularFactor::new(scope, vec![2; m], values).expect("consistent by construction")
}

/// A banded binary model, deterministic in `seed`.
pub fn banded_instance(seed: u64, spec: &BandedSpec) -> GraphicalModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.variables;
    let window = spec.window.min(n);
    let arity = spec.arity.min(window).max(2);
    let mut factors = Vec::new();
    let mut first = 0;
    loop {
        let last = first + window - 1;
        let inner: Vec<usize> = (first + 1..last).collect();
        for _ in 0..spec.factors_per_window {
            let mut scope: Vec<usize> = inner
                .choose_multiple(&mut rng, arity - 2)
                .copied()
                .collect();
            scope.push(first);
            scope.push(last);
            scope.sort_unstable();
            factors.push(structured_factor(&mut rng, scope, spec.task));
        }
        if last + 1 >= n {
            break;
        }
        first = (first + spec.stride).min(n - window);
    }
    GraphicalModel::new(vec![2; n], factors, spec.task).expect("consistent by construction")
}
