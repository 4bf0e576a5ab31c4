use std::fmt::Write as _;
use std::time::Instant;

use crate::automata::{Dafsa, DafsaBuilder, DeterminizeStats};

use super::table::{check_scope, table_size};
use super::{CombineOp, FactorError, ProjectOp, TabularFactor, Value, ValueKeySet};

/// Per-operation bookkeeping threaded through factor operations.
#[derive(Clone, Debug, Default)]
pub struct OpContext {
    /// Operations abort with [`FactorError::Timeout`] once this passes.
    pub deadline: Option<Instant>,
    /// One record per determinization performed by level removal.
    pub determinizations: Vec<DeterminizeStats>,
}

impl OpContext {
    pub fn with_deadline(deadline: Option<Instant>) -> Self {
        OpContext {
            deadline,
            determinizations: Vec::new(),
        }
    }

    pub fn check_deadline(&self) -> Result<(), FactorError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(FactorError::Timeout),
            _ => Ok(()),
        }
    }

    /// Mean ratio of subset-construction states to input states.
    pub fn mean_growth(&self) -> Option<f64> {
        if self.determinizations.is_empty() {
            return None;
        }
        let sum: f64 = self.determinizations.iter().map(|s| s.growth()).sum();
        Some(sum / self.determinizations.len() as f64)
    }
}

/// A factor stored as one minimal automaton per distinct value, each
/// accepting the scope assignments mapped to that value.
///
/// Level `i` of every automaton reads the value of `scope[i]`. Entries are
/// kept sorted by value and their languages are pairwise disjoint; an
/// assignment that no entry accepts has been pruned as infeasible.
#[derive(Clone, Debug, PartialEq)]
pub struct DafsaFactor {
    scope: Vec<usize>,
    domains: Vec<u32>,
    entries: Vec<(Value, Dafsa)>,
}

impl DafsaFactor {
    /// Builds a factor from parts, validating the scope and the automaton
    /// levels. Entries are sorted by value; disjointness is not checked.
    pub fn from_entries(
        scope: Vec<usize>,
        domains: Vec<u32>,
        mut entries: Vec<(Value, Dafsa)>,
    ) -> Result<Self, FactorError> {
        check_scope(&scope, &domains)?;
        for (_, d) in &entries {
            if d.domains() != domains.as_slice() {
                return Err(FactorError::Automaton(
                    crate::automata::AutomatonError::LevelMismatch {
                        left: d.domains().to_vec(),
                        right: domains.clone(),
                    },
                ));
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(DafsaFactor {
            scope,
            domains,
            entries,
        })
    }

    /// Zero-scope factor holding a single value.
    pub fn scalar(value: Value) -> Self {
        DafsaFactor {
            scope: Vec::new(),
            domains: Vec::new(),
            entries: vec![(value, Dafsa::universal(&[]))],
        }
    }

    /// Groups the table's assignments by ε-keyed value and compiles each
    /// group. With `drop_infinity`, assignments valued ∞ are left out.
    pub fn from_table(table: &TabularFactor, epsilon: f64, drop_infinity: bool) -> Self {
        let keys = ValueKeySet::new(table.values().iter().copied(), epsilon);
        let mut builders: Vec<Option<DafsaBuilder>> = keys
            .representatives()
            .iter()
            .map(|v| {
                (!(drop_infinity && v.is_infinite())).then(|| DafsaBuilder::new(table.domains()))
            })
            .collect();
        for (assignment, value) in table.rows() {
            let key = keys.index_of(value).expect("every table value has a key");
            if let Some(b) = &mut builders[key] {
                b.insert(&assignment)
                    .expect("rows are generated in increasing order");
            }
        }
        let entries = keys
            .representatives()
            .iter()
            .zip(builders)
            .filter_map(|(&v, b)| b.map(|b| (v, b.finish())))
            .collect();
        DafsaFactor {
            scope: table.scope().to_vec(),
            domains: table.domains().to_vec(),
            entries,
        }
    }

    /// Expands to a dense table; assignments in no entry get `default`.
    pub fn to_table(&self, default: Value, cap: usize) -> Result<TabularFactor, FactorError> {
        let cells =
            table_size(&self.domains)
                .filter(|&n| n <= cap)
                .ok_or(FactorError::TooLarge {
                    cells: self.domains.iter().map(|&k| k as u128).product(),
                    cap,
                })?;
        let mut values = vec![default; cells];
        let shape = TabularFactor::constant(self.scope.clone(), self.domains.clone(), default)?;
        for (v, d) in &self.entries {
            for s in d.enumerate_capped(cap)? {
                values[shape.index_of(&s)] = *v;
            }
        }
        TabularFactor::new(self.scope.clone(), self.domains.clone(), values)
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn domains(&self) -> &[u32] {
        &self.domains
    }

    pub fn entries(&self) -> &[(Value, Dafsa)] {
        &self.entries
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total states over all entry automata.
    pub fn total_states(&self) -> usize {
        self.entries.iter().map(|(_, d)| d.state_count()).sum()
    }

    /// The value of a zero-scope factor, `None` if it has been pruned.
    pub fn scalar_value(&self) -> Option<Value> {
        debug_assert!(self.scope.is_empty());
        self.entries.first().map(|e| e.0)
    }

    /// Value of an assignment given in scope order; `None` when pruned.
    pub fn value_of(&self, assignment: &[u32]) -> Option<Value> {
        self.entries
            .iter()
            .find(|(_, d)| d.accepts(assignment).unwrap_or(false))
            .map(|(v, _)| *v)
    }

    /// Value at a full assignment indexed by variable id.
    pub fn value_at_full(&self, full: &[u32]) -> Option<Value> {
        let local: Vec<u32> = self.scope.iter().map(|&v| full[v]).collect();
        self.value_of(&local)
    }

    /// Whether entry languages are pairwise disjoint.
    pub fn is_disjoint(&self) -> bool {
        for (i, (_, a)) in self.entries.iter().enumerate() {
            for (_, b) in &self.entries[i + 1..] {
                if a.intersects(b).unwrap_or(true) {
                    return false;
                }
            }
        }
        true
    }

    /// Re-expresses the factor over a wider sorted scope by inserting
    /// wildcard levels for the new variables.
    pub fn widen(&self, scope: &[usize], domains: &[u32]) -> Result<DafsaFactor, FactorError> {
        if scope == self.scope.as_slice() {
            if domains != self.domains.as_slice() {
                return Err(FactorError::DomainMismatch { var: scope[0] });
            }
            return Ok(self.clone());
        }
        let mut positions = Vec::with_capacity(self.scope.len());
        for (&var, &k) in self.scope.iter().zip(&self.domains) {
            let p = scope
                .binary_search(&var)
                .map_err(|_| FactorError::VariableNotInScope { var })?;
            if domains[p] != k {
                return Err(FactorError::DomainMismatch { var });
            }
            positions.push(p);
        }
        let entries = self
            .entries
            .iter()
            .map(|(v, d)| Ok((*v, d.insert_wildcard_levels(domains, &positions)?)))
            .collect::<Result<Vec<_>, FactorError>>()?;
        Ok(DafsaFactor {
            scope: scope.to_vec(),
            domains: domains.to_vec(),
            entries,
        })
    }

    /// Brings both factors onto the sorted union of their scopes.
    pub fn add_levels(
        f1: &DafsaFactor,
        f2: &DafsaFactor,
    ) -> Result<(DafsaFactor, DafsaFactor), FactorError> {
        let (scope, domains) = merge_scopes(&f1.scope, &f1.domains, &f2.scope, &f2.domains)?;
        Ok((f1.widen(&scope, &domains)?, f2.widen(&scope, &domains)?))
    }

    /// Drops `var` from the scope, projecting every entry's language. The
    /// resulting entries may overlap.
    pub fn remove_level(
        &self,
        var: usize,
        ctx: &mut OpContext,
    ) -> Result<DafsaFactor, FactorError> {
        let level = self
            .scope
            .iter()
            .position(|&v| v == var)
            .ok_or(FactorError::VariableNotInScope { var })?;
        let mut scope = self.scope.clone();
        let mut domains = self.domains.clone();
        scope.remove(level);
        domains.remove(level);
        let mut entries = Vec::with_capacity(self.entries.len());
        for (v, d) in &self.entries {
            ctx.check_deadline()?;
            let (p, stats) = d.project_out(level)?;
            ctx.determinizations.push(stats);
            if !p.is_empty() {
                entries.push((*v, p));
            }
        }
        Ok(DafsaFactor {
            scope,
            domains,
            entries,
        })
    }

    /// Pointwise combination over the union of scopes. Assignments pruned in
    /// either input stay pruned. Result values are ε-keyed afresh.
    pub fn combine(
        &self,
        other: &DafsaFactor,
        op: CombineOp,
        epsilon: f64,
    ) -> Result<DafsaFactor, FactorError> {
        self.combine_in(other, op, epsilon, &mut OpContext::default())
    }

    pub fn combine_in(
        &self,
        other: &DafsaFactor,
        op: CombineOp,
        epsilon: f64,
        ctx: &mut OpContext,
    ) -> Result<DafsaFactor, FactorError> {
        let (a, b) = DafsaFactor::add_levels(self, other)?;
        let mut products: Vec<(Value, Dafsa)> = Vec::new();
        for (vi, di) in &a.entries {
            for (vj, dj) in &b.entries {
                ctx.check_deadline()?;
                if !di.intersects(dj)? {
                    continue;
                }
                products.push((vi.combine(*vj, op), di.intersect(dj)?));
            }
        }
        let keys = ValueKeySet::new(products.iter().map(|p| p.0), epsilon);
        let mut merged: Vec<Option<Dafsa>> = vec![None; keys.len()];
        for (v, d) in products {
            let slot = &mut merged[keys.index_of(v).expect("keyed above")];
            *slot = Some(match slot.take() {
                None => d,
                Some(prev) => {
                    ctx.check_deadline()?;
                    prev.union(&d)?
                }
            });
        }
        let entries = keys
            .representatives()
            .iter()
            .zip(merged)
            .filter_map(|(&v, d)| d.map(|d| (v, d)))
            .collect();
        Ok(DafsaFactor {
            scope: a.scope,
            domains: a.domains,
            entries,
        })
    }

    /// Eliminates `var`, keeping for each remaining assignment the best
    /// value among its extensions.
    pub fn project(&self, var: usize, op: ProjectOp) -> Result<DafsaFactor, FactorError> {
        self.project_in(var, op, &mut OpContext::default())
    }

    pub fn project_in(
        &self,
        var: usize,
        op: ProjectOp,
        ctx: &mut OpContext,
    ) -> Result<DafsaFactor, FactorError> {
        let reduced = self.remove_level(var, ctx)?;
        let mut order: Vec<&(Value, Dafsa)> = reduced.entries.iter().collect();
        order.sort_by(|a, b| op.best_first(&a.0, &b.0));
        let mut covered: Option<Dafsa> = None;
        let mut entries = Vec::with_capacity(order.len());
        let last = order.len().saturating_sub(1);
        for (i, (v, d)) in order.into_iter().enumerate() {
            ctx.check_deadline()?;
            let rest = match &covered {
                None => d.clone(),
                Some(c) => d.difference(c)?,
            };
            if !rest.is_empty() {
                entries.push((*v, rest));
            }
            if i < last {
                covered = Some(match covered {
                    None => d.clone(),
                    Some(c) => c.union(d)?,
                });
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(DafsaFactor {
            scope: reduced.scope,
            domains: reduced.domains,
            entries,
        })
    }

    /// Debug listing: one line per entry with its accepted assignments,
    /// truncated after `cap` strings per entry.
    pub fn dump(&self, cap: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scope {:?}", self.scope);
        for (v, d) in &self.entries {
            let total = d.count();
            let shown = match d.enumerate_capped(cap) {
                Ok(strings) => strings,
                Err(_) => Vec::new(),
            };
            let body = shown
                .iter()
                .map(|s| s.iter().map(u32::to_string).collect::<String>())
                .collect::<Vec<_>>()
                .join(" ");
            if shown.len() as u128 == total {
                let _ = writeln!(out, "{v} -> {{{body}}}");
            } else {
                let _ = writeln!(out, "{v} -> {total} assignments");
            }
        }
        out
    }
}

/// Sorted union of two scopes with their domains.
pub fn merge_scopes(
    s1: &[usize],
    d1: &[u32],
    s2: &[usize],
    d2: &[u32],
) -> Result<(Vec<usize>, Vec<u32>), FactorError> {
    let mut scope = Vec::with_capacity(s1.len() + s2.len());
    let mut domains = Vec::with_capacity(s1.len() + s2.len());
    let (mut i, mut j) = (0, 0);
    while i < s1.len() || j < s2.len() {
        let take_left = j >= s2.len() || (i < s1.len() && s1[i] <= s2[j]);
        if i < s1.len() && j < s2.len() && s1[i] == s2[j] {
            if d1[i] != d2[j] {
                return Err(FactorError::DomainMismatch { var: s1[i] });
            }
            scope.push(s1[i]);
            domains.push(d1[i]);
            i += 1;
            j += 1;
        } else if take_left {
            scope.push(s1[i]);
            domains.push(d1[i]);
            i += 1;
        } else {
            scope.push(s2[j]);
            domains.push(d2[j]);
            j += 1;
        }
    }
    Ok((scope, domains))
}
