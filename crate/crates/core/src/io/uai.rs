use std::fmt::Write as _;

use crate::factor::{TabularFactor, Value};
use crate::model::{GraphicalModel, Task};

use super::{format_number, sort_table, IoError, Tokens};

/// Parses a UAI `MARKOV` (or `BAYES`, read as plain factors) network into a
/// MAP model. Tables list values with the last scope variable fastest.
pub fn parse_uai(text: &str) -> Result<GraphicalModel, IoError> {
    let mut tok = Tokens::new(text);
    let (kind, line) = tok.next_token("network type")?;
    if kind != "MARKOV" && kind != "BAYES" {
        return Err(IoError::Parse {
            line,
            message: format!("expected MARKOV or BAYES, found `{kind}`"),
        });
    }
    let n: usize = tok.parse("variable count")?;
    let mut domains = Vec::with_capacity(n);
    for _ in 0..n {
        let line = tok.line();
        let k: u32 = tok.parse("domain size")?;
        if k == 0 {
            return Err(IoError::Parse {
                line,
                message: "domain size must be positive".into(),
            });
        }
        domains.push(k);
    }
    let count: usize = tok.parse("function count")?;
    let mut scopes = Vec::with_capacity(count);
    for _ in 0..count {
        let line = tok.line();
        let arity: usize = tok.parse("scope size")?;
        let mut scope = Vec::with_capacity(arity);
        for _ in 0..arity {
            let var_line = tok.line();
            let v: usize = tok.parse("variable id")?;
            if v >= n {
                return Err(IoError::Parse {
                    line: var_line,
                    message: format!("variable {v} out of range 0..{n}"),
                });
            }
            if scope.contains(&v) {
                return Err(IoError::Parse {
                    line: var_line,
                    message: format!("variable {v} repeated in scope"),
                });
            }
            scope.push(v);
        }
        scopes.push((scope, line));
    }
    let mut factors = Vec::with_capacity(count);
    for (scope, _) in &scopes {
        let doms: Vec<u32> = scope.iter().map(|&v| domains[v]).collect();
        let expected: usize = doms.iter().map(|&k| k as usize).product();
        let line = tok.line();
        let size: usize = tok.parse("table size")?;
        if size != expected {
            return Err(IoError::Parse {
                line,
                message: format!("table size {size}, scope needs {expected}"),
            });
        }
        let mut values = Vec::with_capacity(size);
        for _ in 0..size {
            let line = tok.line();
            let x = tok.number("table value")?;
            if x < 0.0 {
                return Err(IoError::Parse {
                    line,
                    message: format!("negative table value {x}"),
                });
            }
            values.push(Value::Finite(x));
        }
        let (s, d, v) = sort_table(scope, &doms, &values);
        factors
            .push(TabularFactor::new(s, d, v).map_err(|source| IoError::Factor { line, source })?);
    }
    tok.finish()?;
    let line = tok.line();
    GraphicalModel::new(domains, factors, Task::Map)
        .map_err(|source| IoError::Model { line, source })
}

/// Writes a model as a UAI `MARKOV` network. Costs are written as they are,
/// so WCSP models come out as plain nonnegative tables; ∞ is written as `inf`,
/// which the parser rejects.
pub fn write_uai(model: &GraphicalModel) -> String {
    let mut out = String::from("MARKOV\n");
    let _ = writeln!(out, "{}", model.variable_count());
    let doms: Vec<String> = model.domains().iter().map(u32::to_string).collect();
    let _ = writeln!(out, "{}", doms.join(" "));
    let _ = writeln!(out, "{}", model.factors().len());
    for f in model.factors() {
        let mut line = f.scope().len().to_string();
        for v in f.scope() {
            let _ = write!(line, " {v}");
        }
        let _ = writeln!(out, "{line}");
    }
    for f in model.factors() {
        let _ = writeln!(out, "\n{}", f.len());
        let row = f.domains().last().map_or(1, |&k| k as usize);
        for chunk in f.values().chunks(row) {
            let cells: Vec<String> = chunk
                .iter()
                .map(|v| match v {
                    Value::Finite(x) => format_number(*x),
                    Value::Infinity => "inf".to_string(),
                })
                .collect();
            let _ = writeln!(out, " {}", cells.join(" "));
        }
    }
    out
}
