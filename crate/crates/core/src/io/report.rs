use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::factor::{redundancy, Value};
use crate::model::{induced_width, EliminationOrder, GraphicalModel, OrderingSource, SolverResult};

/// Outcome of one engine run on one instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    Timeout,
    OverBudget,
    Disagreement,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Timeout => "timeout",
            Status::OverBudget => "over-budget",
            Status::Disagreement => "disagreement",
            Status::Error => "error",
        }
    }
}

fn ordering_name(source: OrderingSource) -> &'static str {
    match source {
        OrderingSource::MinFill => "min-fill",
        OrderingSource::WeightedMinFill => "weighted-min-fill",
        OrderingSource::User => "file",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordStats {
    pub ordering: &'static str,
    pub induced_width: Option<usize>,
    pub buckets_processed: usize,
    pub max_entry_count: usize,
    pub max_automaton_states: usize,
    pub peak_live_states: usize,
    pub peak_table_cells: usize,
    pub determinizations: usize,
    pub mean_determinization_growth: Option<f64>,
    pub redundancy: Vec<f64>,
    pub mean_redundancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve_ms: Option<f64>,
}

/// One instance's result, serialized with a fixed field order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub file: String,
    pub engine: String,
    pub task: &'static str,
    pub status: Status,
    pub optimum: Option<f64>,
    pub assignment: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub stats: RecordStats,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

impl ResultRecord {
    /// A record for `model` with empty result fields; `epsilon` decides value
    /// equality for the redundancy figures.
    pub fn new(
        file: &str,
        engine: &str,
        model: &GraphicalModel,
        order: &EliminationOrder,
        epsilon: f64,
    ) -> Self {
        let red: Vec<f64> = model
            .factors()
            .iter()
            .map(|f| redundancy(f, epsilon))
            .collect();
        ResultRecord {
            file: file.to_string(),
            engine: engine.to_string(),
            task: model.task().name(),
            status: Status::Error,
            optimum: None,
            assignment: None,
            checks: None,
            message: None,
            stats: RecordStats {
                ordering: ordering_name(order.source()),
                induced_width: Some(induced_width(model, order)),
                buckets_processed: 0,
                max_entry_count: 0,
                max_automaton_states: 0,
                peak_live_states: 0,
                peak_table_cells: 0,
                determinizations: 0,
                mean_determinization_growth: None,
                mean_redundancy: mean(&red),
                redundancy: red,
                solve_ms: None,
            },
        }
    }

    /// Fills status, optimum, assignment and counters from a solver result.
    /// Timing is kept only when `timings` is set.
    pub fn with_result(mut self, r: &SolverResult, timings: bool) -> Self {
        self.status = if r.is_feasible() {
            Status::Optimal
        } else {
            Status::Infeasible
        };
        self.optimum = match r.optimum {
            Value::Finite(x) if r.is_feasible() => Some(x),
            _ => None,
        };
        self.assignment = r.assignment.clone();
        let s = &r.stats;
        self.stats.buckets_processed = s.buckets_processed;
        self.stats.max_entry_count = s.max_entry_count;
        self.stats.max_automaton_states = s.max_automaton_states;
        self.stats.peak_live_states = s.peak_live_states;
        self.stats.peak_table_cells = s.peak_table_cells;
        self.stats.determinizations = s.determinizations;
        self.stats.mean_determinization_growth = s.mean_determinization_growth;
        self.stats.solve_ms = timings.then_some(s.elapsed.as_secs_f64() * 1e3);
        self
    }

    pub fn with_status(mut self, status: Status, message: Option<String>) -> Self {
        self.status = status;
        self.message = message;
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.file);
        let _ = writeln!(
            out,
            "  engine {}  task {}  status {}",
            self.engine,
            self.task,
            self.status.as_str()
        );
        if let Some(m) = &self.message {
            let _ = writeln!(out, "  message: {m}");
        }
        if let Some(v) = self.optimum {
            let _ = writeln!(out, "  optimum: {v}");
        }
        if let Some(x) = &self.assignment {
            let cells: Vec<String> = x.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "  assignment: {}", cells.join(" "));
        }
        if let Some(checks) = &self.checks {
            let cells: Vec<String> = checks.iter().map(|(k, v)| format!("{k} {v}")).collect();
            let _ = writeln!(out, "  checks: {}", cells.join(", "));
        }
        let s = &self.stats;
        let _ = writeln!(
            out,
            "  ordering {}  induced width {}  buckets {}",
            s.ordering,
            s.induced_width.map_or("-".into(), |w| w.to_string()),
            s.buckets_processed
        );
        let _ = writeln!(
            out,
            "  max entries {}  max automaton states {}  peak live states {}  peak table cells {}",
            s.max_entry_count, s.max_automaton_states, s.peak_live_states, s.peak_table_cells
        );
        if let Some(g) = s.mean_determinization_growth {
            let _ = writeln!(
                out,
                "  determinizations {}  mean growth {g:.4}",
                s.determinizations
            );
        }
        if let Some(r) = s.mean_redundancy {
            let _ = writeln!(
                out,
                "  redundancy mean {r:.4} over {} factors",
                s.redundancy.len()
            );
        }
        if let Some(ms) = s.solve_ms {
            let _ = writeln!(out, "  solve time {ms:.3} ms");
        }
        out
    }
}

/// Structural summary of one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceStats {
    pub file: String,
    pub task: &'static str,
    pub variables: usize,
    pub factors: usize,
    pub max_arity: usize,
    pub mean_arity: f64,
    pub max_domain: u32,
    pub ordering: &'static str,
    pub induced_width: usize,
    pub redundancy: Vec<f64>,
    pub mean_redundancy: Option<f64>,
}

impl InstanceStats {
    pub fn new(file: &str, model: &GraphicalModel, order: &EliminationOrder, epsilon: f64) -> Self {
        let arities: Vec<usize> = model.factors().iter().map(|f| f.scope().len()).collect();
        let red: Vec<f64> = model
            .factors()
            .iter()
            .map(|f| redundancy(f, epsilon))
            .collect();
        InstanceStats {
            file: file.to_string(),
            task: model.task().name(),
            variables: model.variable_count(),
            factors: arities.len(),
            max_arity: arities.iter().copied().max().unwrap_or(0),
            mean_arity: if arities.is_empty() {
                0.0
            } else {
                arities.iter().sum::<usize>() as f64 / arities.len() as f64
            },
            max_domain: model.domains().iter().copied().max().unwrap_or(0),
            ordering: ordering_name(order.source()),
            induced_width: induced_width(model, order),
            mean_redundancy: mean(&red),
            redundancy: red,
        }
    }

    /// Mean over instances of their mean factor redundancy.
    pub fn aggregate_redundancy(all: &[InstanceStats]) -> Option<f64> {
        let per: Vec<f64> = all.iter().filter_map(|s| s.mean_redundancy).collect();
        mean(&per)
    }
}
