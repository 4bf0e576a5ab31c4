//! Reference solvers used to cross-check the automaton engine: exhaustive
//! enumeration and bucket elimination over dense tables.

use std::time::Instant;

use crate::factor::{CombineOp, ProjectOp, TabularFactor, Value};
use crate::model::{
    induced_width, EliminationOrder, GraphicalModel, ModelError, SolveError, SolveStats,
    SolverResult, Task,
};

/// Size limits for the reference solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest number of full assignments brute force will enumerate.
    pub max_assignments: u128,
    /// Largest number of table cells tabular elimination may hold at once.
    pub max_table_cells: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_assignments: 1_000_000,
            max_table_cells: 10_000_000,
        }
    }
}

fn check_deadline(deadline: Option<Instant>) -> Result<(), SolveError> {
    match deadline {
        Some(d) if Instant::now() >= d => Err(SolveError::Timeout),
        _ => Ok(()),
    }
}

fn finish(task: Task, best: Option<(Vec<u32>, Value)>, stats: SolveStats) -> SolverResult {
    match best {
        Some((x, v)) if !(task == Task::Wcsp && v.is_infinite()) => SolverResult {
            optimum: v,
            assignment: Some(x),
            stats,
        },
        _ => SolverResult::infeasible(stats),
    }
}

/// Enumerates every full assignment in lexicographic order and keeps the
/// first optimal one.
pub fn brute_force(
    model: &GraphicalModel,
    budget: &OracleBudget,
    deadline: Option<Instant>,
) -> Result<SolverResult, SolveError> {
    let total = model.assignment_count();
    if total > budget.max_assignments {
        return Err(SolveError::OverBudget {
            what: "assignments",
            needed: total,
            limit: budget.max_assignments,
        });
    }
    let start = Instant::now();
    let task = model.task();
    let project = task.project_op();
    let domains = model.domains();
    let n = domains.len();
    let mut x = vec![0u32; n];
    let mut best: Option<(Vec<u32>, Value)> = None;
    for step in 0u128.. {
        if step % 4096 == 0 {
            check_deadline(deadline)?;
        }
        let v = model.evaluate(&x);
        if best.as_ref().is_none_or(|(_, b)| project.better(v, *b)) {
            best = Some((x.clone(), v));
        }
        // odometer, last variable fastest
        let mut i = n;
        loop {
            if i == 0 {
                let stats = SolveStats {
                    elapsed: start.elapsed(),
                    ..SolveStats::default()
                };
                return Ok(finish(task, best, stats));
            }
            i -= 1;
            x[i] += 1;
            if x[i] < domains[i] {
                break;
            }
            x[i] = 0;
        }
    }
    unreachable!()
}

/// Dense table over a sorted scope; last variable varies fastest.
struct Table {
    scope: Vec<usize>,
    values: Vec<Value>,
}

impl Table {
    fn from_factor(f: &TabularFactor) -> Self {
        Table {
            scope: f.scope().to_vec(),
            values: f.values().to_vec(),
        }
    }

    fn get(&self, domains: &[u32], full: &[u32]) -> Value {
        let mut idx = 0usize;
        for &v in &self.scope {
            idx = idx * domains[v] as usize + full[v] as usize;
        }
        self.values[idx]
    }
}

fn cells(scope: &[usize], domains: &[u32]) -> u128 {
    scope
        .iter()
        .fold(1u128, |acc, &v| acc.saturating_mul(domains[v] as u128))
}

/// Builds the message of a bucket: every bucket table combined, with `var`
/// optimized out, over the union scope minus `var`.
fn eliminate(
    bucket: &[Table],
    var: usize,
    domains: &[u32],
    combine: CombineOp,
    project: ProjectOp,
    full: &mut [u32],
    deadline: Option<Instant>,
) -> Result<Table, SolveError> {
    let mut scope: Vec<usize> = bucket
        .iter()
        .flat_map(|t| t.scope.iter().copied())
        .collect();
    scope.sort_unstable();
    scope.dedup();
    scope.retain(|&v| v != var);
    let size = cells(&scope, domains) as usize;
    let mut values = Vec::with_capacity(size);
    for &v in &scope {
        full[v] = 0;
    }
    for cell in 0..size {
        if cell % 4096 == 0 {
            check_deadline(deadline)?;
        }
        let mut best = project.worst();
        for x in 0..domains[var] {
            full[var] = x;
            let s = bucket.iter().fold(combine.identity(), |acc, t| {
                acc.combine(t.get(domains, full), combine)
            });
            if project.better(s, best) {
                best = s;
            }
        }
        values.push(best);
        for &v in scope.iter().rev() {
            full[v] += 1;
            if full[v] < domains[v] {
                break;
            }
            full[v] = 0;
        }
    }
    Ok(Table { scope, values })
}

/// Bucket elimination over dense tables along `order`, with the same bucket
/// placement and recovery rules as the automaton engine.
pub fn tabular_be(
    model: &GraphicalModel,
    order: &EliminationOrder,
    budget: &OracleBudget,
    deadline: Option<Instant>,
) -> Result<SolverResult, SolveError> {
    let n = model.variable_count();
    if order.len() != n {
        return Err(ModelError::InvalidOrdering { n }.into());
    }
    let start = Instant::now();
    let task = model.task();
    let (combine, project) = (task.combine_op(), task.project_op());
    let domains = model.domains();
    let positions = order.positions();
    let mut stats = SolveStats {
        induced_width: Some(induced_width(model, order)),
        ..SolveStats::default()
    };

    let mut global = combine.identity();
    let mut buckets: Vec<Vec<Table>> = (0..n).map(|_| Vec::new()).collect();
    let mut stored: u128 = 0;
    for f in model.factors() {
        let t = Table::from_factor(f);
        match t.scope.iter().max_by_key(|&&v| positions[v]) {
            None => global = global.combine(t.values[0], combine),
            Some(&v) => {
                stored += t.values.len() as u128;
                buckets[v].push(t);
            }
        }
    }
    if stored > budget.max_table_cells {
        return Err(SolveError::OverBudget {
            what: "table cells",
            needed: stored,
            limit: budget.max_table_cells,
        });
    }
    let mut peak = stored;

    let mut full = vec![0u32; n];
    for &var in order.as_slice().iter().rev() {
        check_deadline(deadline)?;
        if buckets[var].is_empty() {
            continue;
        }
        stats.buckets_processed += 1;
        let mut scope: Vec<usize> = buckets[var]
            .iter()
            .flat_map(|t| t.scope.iter().copied())
            .collect();
        scope.sort_unstable();
        scope.dedup();
        scope.retain(|&v| v != var);
        let needed = stored + cells(&scope, domains);
        if needed > budget.max_table_cells {
            return Err(SolveError::OverBudget {
                what: "table cells",
                needed,
                limit: budget.max_table_cells,
            });
        }
        let message = eliminate(
            &buckets[var],
            var,
            domains,
            combine,
            project,
            &mut full,
            deadline,
        )?;
        stored = needed;
        peak = peak.max(stored);
        match message.scope.iter().max_by_key(|&&v| positions[v]) {
            None => global = global.combine(message.values[0], combine),
            Some(&v) => buckets[v].push(message),
        }
    }
    stats.peak_table_cells = peak as usize;

    if task == Task::Wcsp && global.is_infinite() {
        stats.elapsed = start.elapsed();
        return Ok(SolverResult::infeasible(stats));
    }

    let mut x = vec![0u32; n];
    for &var in order.as_slice() {
        let bucket = &buckets[var];
        if bucket.is_empty() {
            continue;
        }
        let mut best: Option<(u32, Value)> = None;
        for val in 0..domains[var] {
            x[var] = val;
            let s = bucket.iter().fold(combine.identity(), |acc, t| {
                acc.combine(t.get(domains, &x), combine)
            });
            if best.is_none_or(|(_, b)| project.better(s, b)) {
                best = Some((val, s));
            }
        }
        x[var] = best.expect("non-empty domain").0;
    }
    stats.elapsed = start.elapsed();
    Ok(finish(task, Some((x, global)), stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(xs: &[f64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::Finite(x)).collect()
    }

    fn small() -> GraphicalModel {
        let a = TabularFactor::new(vec![0, 1], vec![2, 3], fin(&[4.0, 1.0, 2.0, 0.0, 3.0, 3.0]))
            .unwrap();
        let b = TabularFactor::new(vec![1, 2], vec![3, 2], fin(&[0.0, 1.0, 5.0, 5.0, 0.0, 2.0]))
            .unwrap();
        GraphicalModel::new(vec![2, 3, 2], vec![a, b], Task::Wcsp).unwrap()
    }

    #[test]
    fn brute_force_finds_lowest_optimum() {
        // optimum 1 at (0,1,x)? a(0,1)=1 + b(1,x)=5 -> 6; a(1,0)=0 + b(0,0)=0 -> 0
        let r = brute_force(&small(), &OracleBudget::default(), None).unwrap();
        assert_eq!(r.optimum, Value::Finite(0.0));
        assert_eq!(r.assignment, Some(vec![1, 0, 0]));
    }

    #[test]
    fn tabular_agrees_with_brute_force() {
        let m = small();
        for order in [[0, 1, 2], [2, 1, 0], [1, 0, 2]] {
            let d =
                EliminationOrder::new(order.to_vec(), crate::model::OrderingSource::User).unwrap();
            let r = tabular_be(&m, &d, &OracleBudget::default(), None).unwrap();
            assert_eq!(r.optimum, Value::Finite(0.0));
            assert_eq!(
                m.evaluate(r.assignment.as_ref().unwrap()),
                Value::Finite(0.0)
            );
        }
    }

    #[test]
    fn budgets_are_enforced() {
        let m = small();
        let tight = OracleBudget {
            max_assignments: 11,
            max_table_cells: 12,
        };
        assert!(matches!(
            brute_force(&m, &tight, None),
            Err(SolveError::OverBudget { needed: 12, .. })
        ));
        assert!(matches!(
            tabular_be(&m, &EliminationOrder::identity(3), &tight, None),
            Err(SolveError::OverBudget { .. })
        ));
    }

    #[test]
    fn infeasible_wcsp() {
        let f = TabularFactor::constant(vec![0], vec![2], Value::Infinity).unwrap();
        let m = GraphicalModel::new(vec![2], vec![f], Task::Wcsp).unwrap();
        assert!(!brute_force(&m, &OracleBudget::default(), None)
            .unwrap()
            .is_feasible());
        let r = tabular_be(
            &m,
            &EliminationOrder::identity(1),
            &OracleBudget::default(),
            None,
        )
        .unwrap();
        assert!(!r.is_feasible());
    }
}
