//! Graphical models, elimination orderings and bucket elimination over
//! automaton-compressed factors.

mod elimination;
mod graph;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::factor::{CombineOp, FactorError, ProjectOp, TabularFactor, Value, DEFAULT_EPSILON};

pub use elimination::bucket_elimination;
pub use graph::{induced_width, min_fill_ordering, EliminationOrder, OrderingSource, PrimalGraph};

/// Optimization task solved over the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    /// Maximize the product of factors (probabilities).
    Map,
    /// Minimize the sum of costs; ∞ marks violated hard constraints.
    Wcsp,
}

impl Task {
    pub fn combine_op(self) -> CombineOp {
        match self {
            Task::Map => CombineOp::Product,
            Task::Wcsp => CombineOp::Sum,
        }
    }

    pub fn project_op(self) -> ProjectOp {
        match self {
            Task::Map => ProjectOp::Max,
            Task::Wcsp => ProjectOp::Min,
        }
    }

    /// Value of an assignment that was pruned from a factor.
    pub fn pruned_value(self) -> Value {
        match self {
            Task::Map => Value::Finite(0.0),
            Task::Wcsp => Value::Infinity,
        }
    }

    /// Whether two optima agree: relative 1e-6 for products, absolute 1e-9
    /// for sums.
    pub fn optima_agree(self, a: Value, b: Value) -> bool {
        match (a, b) {
            (Value::Finite(x), Value::Finite(y)) => match self {
                Task::Map => (x - y).abs() <= 1e-6 * x.abs().max(y.abs()),
                Task::Wcsp => (x - y).abs() <= 1e-9,
            },
            (Value::Infinity, Value::Infinity) => true,
            _ => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Map => "map",
            Task::Wcsp => "wcsp",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("factor {factor} refers to variable {var}, but the model has {n} variables")]
    UnknownVariable { factor: usize, var: usize, n: usize },
    #[error("factor {factor} gives variable {var} domain {found}, model says {expected}")]
    DomainMismatch {
        factor: usize,
        var: usize,
        expected: u32,
        found: u32,
    },
    #[error("variable {var} has an empty domain")]
    EmptyDomain { var: usize },
    #[error("ordering is not a permutation of 0..{n}")]
    InvalidOrdering { n: usize },
}

/// Variables with finite domains, a list of factors and the task.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphicalModel {
    domains: Vec<u32>,
    factors: Vec<TabularFactor>,
    task: Task,
}

impl GraphicalModel {
    pub fn new(
        domains: Vec<u32>,
        factors: Vec<TabularFactor>,
        task: Task,
    ) -> Result<Self, ModelError> {
        let n = domains.len();
        if let Some(var) = domains.iter().position(|&k| k == 0) {
            return Err(ModelError::EmptyDomain { var });
        }
        for (i, f) in factors.iter().enumerate() {
            for (&var, &k) in f.scope().iter().zip(f.domains()) {
                if var >= n {
                    return Err(ModelError::UnknownVariable { factor: i, var, n });
                }
                if domains[var] != k {
                    return Err(ModelError::DomainMismatch {
                        factor: i,
                        var,
                        expected: domains[var],
                        found: k,
                    });
                }
            }
        }
        Ok(GraphicalModel {
            domains,
            factors,
            task,
        })
    }

    pub fn variable_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[u32] {
        &self.domains
    }

    pub fn factors(&self) -> &[TabularFactor] {
        &self.factors
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn with_task(mut self, task: Task) -> Self {
        self.task = task;
        self
    }

    /// Objective value of a full assignment.
    pub fn evaluate(&self, assignment: &[u32]) -> Value {
        let op = self.task.combine_op();
        self.factors.iter().fold(op.identity(), |acc, f| {
            acc.combine(f.value_at_full(assignment), op)
        })
    }

    /// Number of full assignments, saturating.
    pub fn assignment_count(&self) -> u128 {
        self.domains
            .iter()
            .fold(1u128, |acc, &k| acc.saturating_mul(k as u128))
    }
}

/// Knobs shared by every engine.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub epsilon: f64,
    /// Leave ∞-valued assignments out of automaton factors (WCSP only).
    pub prune_infinity: bool,
    pub deadline: Option<Instant>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon: DEFAULT_EPSILON,
            prune_infinity: true,
            deadline: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("time limit exceeded")]
    Timeout,
    #[error("over budget: {what} needs {needed}, limit {limit}")]
    OverBudget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Factor(FactorError),
}

impl From<FactorError> for SolveError {
    fn from(e: FactorError) -> Self {
        match e {
            FactorError::Timeout => SolveError::Timeout,
            other => SolveError::Factor(other),
        }
    }
}

/// Counters collected while solving. Memory is reported as logical sizes:
/// automaton states for the automaton engine, table cells for the dense one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub induced_width: Option<usize>,
    pub buckets_processed: usize,
    /// Largest number of value entries in any factor built.
    pub max_entry_count: usize,
    /// Largest total state count of any single factor built.
    pub max_automaton_states: usize,
    /// Peak of the summed states of all stored factors plus the one under
    /// construction.
    pub peak_live_states: usize,
    /// Same peak, in table cells, for the dense engine.
    pub peak_table_cells: usize,
    pub determinizations: usize,
    pub mean_determinization_growth: Option<f64>,
    pub elapsed: Duration,
}

/// Optimum, one optimal assignment and instrumentation.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverResult {
    pub optimum: Value,
    /// `None` when the instance is infeasible.
    pub assignment: Option<Vec<u32>>,
    pub stats: SolveStats,
}

impl SolverResult {
    pub fn infeasible(stats: SolveStats) -> Self {
        SolverResult {
            optimum: Value::Infinity,
            assignment: None,
            stats,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.assignment.is_some()
    }
}
