use std::time::Instant;

use crate::factor::{DafsaFactor, OpContext, Value};

use super::{
    induced_width, EliminationOrder, GraphicalModel, SolveError, SolveOptions, SolveStats,
    SolverResult, Task,
};

struct Tracker {
    stored: usize,
    stats: SolveStats,
}

impl Tracker {
    fn observe(&mut self, f: &DafsaFactor, transient: bool) {
        let states = f.total_states();
        self.stats.max_entry_count = self.stats.max_entry_count.max(f.entry_count());
        self.stats.max_automaton_states = self.stats.max_automaton_states.max(states);
        let live = self.stored + if transient { states } else { 0 };
        self.stats.peak_live_states = self.stats.peak_live_states.max(live);
    }

    fn store(&mut self, f: &DafsaFactor) {
        self.stored += f.total_states();
        self.observe(f, false);
    }
}

/// Exact bucket elimination with automaton factors.
///
/// Each factor goes to the bucket of its scope variable that comes last in
/// `order`. Buckets are processed from last to first: their factors are
/// combined in one left fold and the bucket variable is projected out. The
/// optimal assignment is then recovered by a forward pass over `order`,
/// choosing for each variable the lowest value that optimizes the combined
/// bucket factors given the values fixed so far.
pub fn bucket_elimination(
    model: &GraphicalModel,
    order: &EliminationOrder,
    options: &SolveOptions,
) -> Result<SolverResult, SolveError> {
    let n = model.variable_count();
    if order.len() != n {
        return Err(super::ModelError::InvalidOrdering { n }.into());
    }
    let task = model.task();
    let (combine, project) = (task.combine_op(), task.project_op());
    let eps = options.epsilon;
    let drop_infinity = options.prune_infinity && task == Task::Wcsp;
    let positions = order.positions();
    let start = Instant::now();
    let mut ctx = OpContext::with_deadline(options.deadline);
    let mut tracker = Tracker {
        stored: 0,
        stats: SolveStats {
            induced_width: Some(induced_width(model, order)),
            ..SolveStats::default()
        },
    };

    let mut global = combine.identity();
    let mut feasible = true;
    let mut buckets: Vec<Vec<DafsaFactor>> = vec![Vec::new(); n];
    let bucket_of = |scope: &[usize]| {
        *scope
            .iter()
            .max_by_key(|&&v| positions[v])
            .expect("non-empty scope")
    };

    for table in model.factors() {
        ctx.check_deadline()?;
        let f = DafsaFactor::from_table(table, eps, drop_infinity);
        if f.scope().is_empty() {
            match f.scalar_value() {
                Some(v) => global = global.combine(v, combine),
                None => feasible = false,
            }
            continue;
        }
        if f.is_empty() {
            feasible = false;
        }
        tracker.store(&f);
        buckets[bucket_of(f.scope())].push(f);
    }

    if feasible {
        for &var in order.as_slice().iter().rev() {
            if buckets[var].is_empty() {
                continue;
            }
            tracker.stats.buckets_processed += 1;
            let mut acc = buckets[var][0].clone();
            for f in &buckets[var][1..] {
                acc = acc.combine_in(f, combine, eps, &mut ctx)?;
                tracker.observe(&acc, true);
            }
            let message = acc.project_in(var, project, &mut ctx)?;
            tracker.observe(&message, true);
            if message.is_empty() {
                feasible = false;
                break;
            }
            if message.scope().is_empty() {
                global = global.combine(message.scalar_value().expect("non-empty scalar"), combine);
            } else {
                tracker.store(&message);
                buckets[bucket_of(message.scope())].push(message);
            }
        }
    }

    tracker.stats.determinizations = ctx.determinizations.len();
    tracker.stats.mean_determinization_growth = ctx.mean_growth();
    if !feasible || (task == Task::Wcsp && global.is_infinite()) {
        tracker.stats.elapsed = start.elapsed();
        return Ok(SolverResult::infeasible(tracker.stats));
    }

    let pruned = task.pruned_value();
    let mut assignment = vec![0u32; n];
    for &var in order.as_slice() {
        let bucket = &buckets[var];
        if bucket.is_empty() {
            continue;
        }
        let mut best: Option<(u32, Value)> = None;
        for x in 0..model.domains()[var] {
            assignment[var] = x;
            let score = bucket.iter().fold(combine.identity(), |acc, f| {
                acc.combine(f.value_at_full(&assignment).unwrap_or(pruned), combine)
            });
            if best.is_none_or(|(_, b)| project.better(score, b)) {
                best = Some((x, score));
            }
        }
        assignment[var] = best.expect("non-empty domain").0;
    }

    tracker.stats.elapsed = start.elapsed();
    Ok(SolverResult {
        optimum: global,
        assignment: Some(assignment),
        stats: tracker.stats,
    })
}
