use super::{FactorError, Value, ValueKeySet};

/// Dense factor: one value per assignment of the scope, indexed in
/// mixed radix with the last scope variable varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularFactor {
    scope: Vec<usize>,
    domains: Vec<u32>,
    values: Vec<Value>,
}

impl TabularFactor {
    pub fn new(
        scope: Vec<usize>,
        domains: Vec<u32>,
        values: Vec<Value>,
    ) -> Result<Self, FactorError> {
        check_scope(&scope, &domains)?;
        let expected = table_size(&domains).ok_or(FactorError::TooLarge {
            cells: u128::MAX,
            cap: usize::MAX,
        })?;
        if values.len() != expected {
            return Err(FactorError::TableSize {
                expected,
                found: values.len(),
            });
        }
        Ok(TabularFactor {
            scope,
            domains,
            values,
        })
    }

    /// Every assignment mapped to `value`.
    pub fn constant(
        scope: Vec<usize>,
        domains: Vec<u32>,
        value: Value,
    ) -> Result<Self, FactorError> {
        let n = table_size(&domains).ok_or(FactorError::TooLarge {
            cells: u128::MAX,
            cap: usize::MAX,
        })?;
        Self::new(scope, domains, vec![value; n])
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn domains(&self) -> &[u32] {
        &self.domains
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, assignment: &[u32]) -> usize {
        assignment
            .iter()
            .zip(&self.domains)
            .fold(0usize, |acc, (&v, &k)| acc * k as usize + v as usize)
    }

    pub fn assignment_of(&self, mut index: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.domains.len()];
        for (slot, &k) in out.iter_mut().zip(&self.domains).rev() {
            *slot = (index % k as usize) as u32;
            index /= k as usize;
        }
        out
    }

    /// Value at an assignment of the scope variables, in scope order.
    pub fn value_at(&self, assignment: &[u32]) -> Value {
        self.values[self.index_of(assignment)]
    }

    /// Value at a full assignment indexed by variable id.
    pub fn value_at_full(&self, full: &[u32]) -> Value {
        let idx = self
            .scope
            .iter()
            .zip(&self.domains)
            .fold(0usize, |acc, (&var, &k)| {
                acc * k as usize + full[var] as usize
            });
        self.values[idx]
    }

    /// Iterates `(assignment, value)` in index order.
    pub fn rows(&self) -> impl Iterator<Item = (Vec<u32>, Value)> + '_ {
        let mut current = vec![0u32; self.domains.len()];
        let mut first = true;
        self.values.iter().map(move |&v| {
            if !first {
                for (slot, &k) in current.iter_mut().zip(&self.domains).rev() {
                    *slot += 1;
                    if *slot < k {
                        break;
                    }
                    *slot = 0;
                }
            }
            first = false;
            (current.clone(), v)
        })
    }
}

/// Share of repeated cells: `1 - unique / total`, with uniqueness decided by
/// ε-keying.
pub fn redundancy(table: &TabularFactor, epsilon: f64) -> f64 {
    if table.is_empty() {
        return 0.0;
    }
    let keys = ValueKeySet::new(table.values().iter().copied(), epsilon);
    1.0 - keys.len() as f64 / table.len() as f64
}

pub(crate) fn table_size(domains: &[u32]) -> Option<usize> {
    domains
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k as usize))
}

pub(crate) fn check_scope(scope: &[usize], domains: &[u32]) -> Result<(), FactorError> {
    if scope.len() != domains.len() {
        return Err(FactorError::ScopeLength {
            scope: scope.len(),
            domains: domains.len(),
        });
    }
    if scope.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FactorError::ScopeNotSorted);
    }
    if let Some(pos) = domains.iter().position(|&k| k == 0) {
        return Err(FactorError::EmptyDomain { var: scope[pos] });
    }
    Ok(())
}
