use std::cmp::Ordering;
use std::fmt;

/// Default tolerance under which two values are treated as the same key.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// A factor value: a real number or +∞ (a violated hard constraint).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Finite(f64),
    Infinity,
}

impl Value {
    pub fn is_infinite(self) -> bool {
        matches!(self, Value::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Infinity => None,
        }
    }

    /// Total order with Infinity above every finite value.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => a.total_cmp(b),
            (Value::Finite(_), Value::Infinity) => Ordering::Less,
            (Value::Infinity, Value::Finite(_)) => Ordering::Greater,
            (Value::Infinity, Value::Infinity) => Ordering::Equal,
        }
    }

    /// Infinity is absorbing under both operations.
    pub fn combine(self, other: Value, op: CombineOp) -> Value {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(match op {
                CombineOp::Product => a * b,
                CombineOp::Sum => a + b,
            }),
            _ => Value::Infinity,
        }
    }

    pub fn approx_eq(self, other: Value, epsilon: f64) -> bool {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => (a - b).abs() <= epsilon,
            (Value::Infinity, Value::Infinity) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(v) => write!(f, "{v}"),
            Value::Infinity => f.write_str("inf"),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Value::Infinity
        } else {
            Value::Finite(v)
        }
    }
}

/// Pointwise combination of factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Product,
    Sum,
}

impl CombineOp {
    pub fn identity(self) -> Value {
        match self {
            CombineOp::Product => Value::Finite(1.0),
            CombineOp::Sum => Value::Finite(0.0),
        }
    }
}

/// Elimination of a variable by keeping the best value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectOp {
    Max,
    Min,
}

impl ProjectOp {
    /// Orders values best first.
    pub fn best_first(self, a: &Value, b: &Value) -> Ordering {
        match self {
            ProjectOp::Max => b.total_cmp(a),
            ProjectOp::Min => a.total_cmp(b),
        }
    }

    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: Value, b: Value) -> bool {
        self.best_first(&a, &b) == Ordering::Less
    }

    /// The worst possible value, used to seed searches.
    pub fn worst(self) -> Value {
        match self {
            ProjectOp::Max => Value::Finite(f64::NEG_INFINITY),
            ProjectOp::Min => Value::Infinity,
        }
    }
}

/// Representatives of ε-clustered values.
///
/// Values are sorted and scanned once; a new representative starts whenever
/// a value lies more than ε above the current representative, and every
/// value maps to the first element of its cluster. Infinity is its own key.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueKeySet {
    representatives: Vec<Value>,
    epsilon: f64,
}

impl ValueKeySet {
    pub fn new(values: impl IntoIterator<Item = Value>, epsilon: f64) -> Self {
        let mut finite: Vec<f64> = Vec::new();
        let mut has_infinity = false;
        for v in values {
            match v {
                Value::Finite(x) => finite.push(x),
                Value::Infinity => has_infinity = true,
            }
        }
        finite.sort_unstable_by(f64::total_cmp);
        finite.dedup();
        let mut representatives: Vec<Value> = Vec::new();
        let mut current: Option<f64> = None;
        for x in finite {
            match current {
                Some(r) if x - r <= epsilon => {}
                _ => {
                    current = Some(x);
                    representatives.push(Value::Finite(x));
                }
            }
        }
        if has_infinity {
            representatives.push(Value::Infinity);
        }
        ValueKeySet {
            representatives,
            epsilon,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Representatives in increasing order.
    pub fn representatives(&self) -> &[Value] {
        &self.representatives
    }

    /// Index of the representative `v` belongs to. Among two candidates
    /// within ε the lower one wins.
    pub fn index_of(&self, v: Value) -> Option<usize> {
        let x = match v {
            Value::Infinity => {
                return self
                    .representatives
                    .last()
                    .filter(|r| r.is_infinite())
                    .map(|_| self.representatives.len() - 1)
            }
            Value::Finite(x) => x,
        };
        // first representative strictly greater than x
        let upper = self
            .representatives
            .partition_point(|r| r.total_cmp(&v) != Ordering::Greater);
        if upper > 0 {
            if let Value::Finite(r) = self.representatives[upper - 1] {
                if x - r <= self.epsilon {
                    return Some(upper - 1);
                }
            }
        }
        match self.representatives.get(upper) {
            Some(Value::Finite(r)) if r - x <= self.epsilon => Some(upper),
            _ => None,
        }
    }

    pub fn lookup(&self, v: Value) -> Option<Value> {
        self.index_of(v).map(|i| self.representatives[i])
    }
}
