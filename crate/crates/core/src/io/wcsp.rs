use std::collections::HashMap;
use std::fmt::Write as _;

use crate::factor::{TabularFactor, Value};
use crate::model::{GraphicalModel, Task};

use super::{format_number, sort_table, IoError, Tokens};

/// Parses a WCSP instance into a cost-minimization model.
///
/// Header: `name n max_domain function_count upper_bound`, then the `n`
/// domain sizes. Each function is `arity vars... default tuple_count`
/// followed by `tuple_count` lines of `values... cost`. Costs at or above
/// the upper bound become ∞.
pub fn parse_wcsp(text: &str) -> Result<GraphicalModel, IoError> {
    let mut tok = Tokens::new(text);
    tok.next_token("instance name")?;
    let n: usize = tok.parse("variable count")?;
    let max_domain: u32 = tok.parse("maximum domain size")?;
    let count: usize = tok.parse("function count")?;
    let ub = tok.number("upper bound")?;
    let cost = |x: f64| {
        if x >= ub {
            Value::Infinity
        } else {
            Value::Finite(x)
        }
    };

    let mut domains = Vec::with_capacity(n);
    for _ in 0..n {
        let line = tok.line();
        let k: u32 = tok.parse("domain size")?;
        if k == 0 || k > max_domain {
            return Err(IoError::Parse {
                line,
                message: format!("domain size {k} outside 1..={max_domain}"),
            });
        }
        domains.push(k);
    }

    let mut factors = Vec::with_capacity(count);
    for _ in 0..count {
        let line = tok.line();
        let arity: usize = tok.parse("function arity")?;
        let mut scope = Vec::with_capacity(arity);
        for _ in 0..arity {
            let var_line = tok.line();
            let v: usize = tok.parse("variable id")?;
            if v >= n || scope.contains(&v) {
                return Err(IoError::Parse {
                    line: var_line,
                    message: format!("variable {v} out of range or repeated"),
                });
            }
            scope.push(v);
        }
        let default_line = tok.line();
        let default = tok.number("default cost")?;
        if default < 0.0 {
            return Err(IoError::Parse {
                line: default_line,
                message: "negative default cost (global cost functions are not supported)".into(),
            });
        }
        let tuples: usize = tok.parse("tuple count")?;
        let doms: Vec<u32> = scope.iter().map(|&v| domains[v]).collect();
        let size: usize = doms.iter().map(|&k| k as usize).product();
        let mut values = vec![cost(default); size];
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for _ in 0..tuples {
            let tuple_line = tok.line();
            let mut index = 0usize;
            for &k in &doms {
                let x: u32 = tok.parse("tuple value")?;
                if x >= k {
                    return Err(IoError::Parse {
                        line: tuple_line,
                        message: format!("value {x} outside domain of size {k}"),
                    });
                }
                index = index * k as usize + x as usize;
            }
            let c = tok.number("tuple cost")?;
            if c < 0.0 {
                return Err(IoError::Parse {
                    line: tuple_line,
                    message: format!("negative cost {c}"),
                });
            }
            if let Some(first) = seen.insert(index, tuple_line) {
                return Err(IoError::Parse {
                    line: tuple_line,
                    message: format!("tuple repeats the one on line {first}"),
                });
            }
            values[index] = cost(c);
        }
        let (s, d, v) = sort_table(&scope, &doms, &values);
        factors
            .push(TabularFactor::new(s, d, v).map_err(|source| IoError::Factor { line, source })?);
    }
    tok.finish()?;
    let line = tok.line();
    GraphicalModel::new(domains, factors, Task::Wcsp)
        .map_err(|source| IoError::Model { line, source })
}

/// Most frequent value of a table, ties to the smallest.
fn most_frequent(values: &[Value]) -> Value {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut best = (0usize, sorted[0]);
    let mut i = 0;
    while i < sorted.len() {
        let j = i + sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        if j - i > best.0 {
            best = (j - i, sorted[i]);
        }
        i = j;
    }
    best.1
}

/// Writes a model in WCSP format. The upper bound is one more than the
/// largest finite total cost, rounded up to an integer; ∞ is written as the
/// upper bound and each function lists the cells that differ from its most
/// frequent value.
pub fn write_wcsp(model: &GraphicalModel, name: &str) -> String {
    let worst: f64 = model
        .factors()
        .iter()
        .map(|f| {
            f.values()
                .iter()
                .filter_map(|v| v.finite())
                .fold(0.0f64, |a, x| a.max(x))
        })
        .sum();
    let ub = (worst + 1.0).ceil();
    let text = |v: Value| match v {
        Value::Finite(x) => format_number(x),
        Value::Infinity => format_number(ub),
    };
    let mut out = String::new();
    let max_domain = model.domains().iter().copied().max().unwrap_or(1);
    let _ = writeln!(
        out,
        "{name} {} {max_domain} {} {}",
        model.variable_count(),
        model.factors().len(),
        format_number(ub)
    );
    let doms: Vec<String> = model.domains().iter().map(u32::to_string).collect();
    let _ = writeln!(out, "{}", doms.join(" "));
    for f in model.factors() {
        let default = most_frequent(f.values());
        let exceptions: Vec<(Vec<u32>, Value)> = f.rows().filter(|(_, v)| *v != default).collect();
        let mut head = f.scope().len().to_string();
        for v in f.scope() {
            let _ = write!(head, " {v}");
        }
        let _ = writeln!(out, "{head} {} {}", text(default), exceptions.len());
        for (row, v) in exceptions {
            let cells: Vec<String> = row.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{} {}", cells.join(" "), text(v));
        }
    }
    out
}
