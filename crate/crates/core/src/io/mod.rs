//! Instance formats (UAI Markov networks, WCSP) and result records.

mod report;
mod uai;
mod wcsp;

use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::factor::FactorError;
use crate::model::{GraphicalModel, ModelError};

pub use report::{InstanceStats, ResultRecord, Status};
pub use uai::{parse_uai, write_uai};
pub use wcsp::{parse_wcsp, write_wcsp};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
    #[error("line {line}: {source}")]
    Factor { line: usize, source: FactorError },
    #[error("cannot infer the format of {0}; expected a .uai or .wcsp extension")]
    UnknownFormat(String),
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
}

/// Supported instance formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Uai,
    Wcsp,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "uai" => Some(Format::Uai),
            "wcsp" => Some(Format::Wcsp),
            _ => None,
        }
    }
}

pub fn parse(text: &str, format: Format) -> Result<GraphicalModel, IoError> {
    match format {
        Format::Uai => parse_uai(text),
        Format::Wcsp => parse_wcsp(text),
    }
}

/// Reads and parses a file, choosing the format by extension.
pub fn read_instance(path: &Path) -> Result<GraphicalModel, IoError> {
    let format = Format::from_path(path)
        .ok_or_else(|| IoError::UnknownFormat(path.display().to_string()))?;
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text, format)
}

/// Whitespace-separated tokens tagged with their 1-based line numbers.
struct Tokens<'a> {
    tokens: Vec<(&'a str, usize)>,
    next: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let tokens: Vec<(&str, usize)> = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| line.split_whitespace().map(move |t| (t, i + 1)))
            .collect();
        Tokens {
            tokens,
            next: 0,
            last_line: text.lines().count().max(1),
        }
    }

    /// Line of the next token, or of the end of input.
    fn line(&self) -> usize {
        self.tokens.get(self.next).map_or(self.last_line, |t| t.1)
    }

    fn error(&self, message: impl Into<String>) -> IoError {
        IoError::Parse {
            line: self.line(),
            message: message.into(),
        }
    }

    fn next_token(&mut self, what: &str) -> Result<(&'a str, usize), IoError> {
        let t = self
            .tokens
            .get(self.next)
            .copied()
            .ok_or_else(|| self.error(format!("unexpected end of input, expected {what}")))?;
        self.next += 1;
        Ok(t)
    }

    fn parse<T: FromStr>(&mut self, what: &str) -> Result<T, IoError> {
        let (tok, line) = self.next_token(what)?;
        tok.parse().map_err(|_| IoError::Parse {
            line,
            message: format!("expected {what}, found `{tok}`"),
        })
    }

    fn number(&mut self, what: &str) -> Result<f64, IoError> {
        let (tok, line) = self.next_token(what)?;
        match tok.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(IoError::Parse {
                line,
                message: format!("expected {what}, found `{tok}`"),
            }),
        }
    }

    fn finish(&self) -> Result<(), IoError> {
        match self.tokens.get(self.next) {
            None => Ok(()),
            Some((tok, line)) => Err(IoError::Parse {
                line: *line,
                message: format!("trailing input starting at `{tok}`"),
            }),
        }
    }
}

/// Shortest text that parses back to the same number.
fn format_number(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

/// Reorders a table over `scope` (file order, last variable fastest) into
/// the sorted-scope layout. Returns the sorted scope, its domains and values.
fn sort_table<T: Copy>(
    scope: &[usize],
    domains: &[u32],
    values: &[T],
) -> (Vec<usize>, Vec<u32>, Vec<T>) {
    let mut perm: Vec<usize> = (0..scope.len()).collect();
    perm.sort_by_key(|&i| scope[i]);
    let sorted_scope: Vec<usize> = perm.iter().map(|&i| scope[i]).collect();
    let sorted_domains: Vec<u32> = perm.iter().map(|&i| domains[i]).collect();
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return (sorted_scope, sorted_domains, values.to_vec());
    }
    // stride of each file position in the file layout
    let mut stride = vec![1usize; scope.len()];
    for i in (0..scope.len().saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * domains[i + 1] as usize;
    }
    let mut out = Vec::with_capacity(values.len());
    let mut digits = vec![0u32; scope.len()];
    for _ in 0..values.len() {
        let src: usize = digits
            .iter()
            .zip(&perm)
            .map(|(&x, &p)| x as usize * stride[p])
            .sum();
        out.push(values[src]);
        for j in (0..digits.len()).rev() {
            digits[j] += 1;
            if digits[j] < sorted_domains[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    (sorted_scope, sorted_domains, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sort_table_transposes() {
        // file scope (1, 0) with domains (2, 3): value = 10 * x1 + x0
        let values: Vec<u32> = (0..2)
            .flat_map(|x1| (0..3).map(move |x0| 10 * x1 + x0))
            .collect();
        let (scope, doms, sorted) = sort_table(&[1, 0], &[2, 3], &values);
        assert_eq!(scope, vec![0, 1]);
        assert_eq!(doms, vec![3, 2]);
        assert_eq!(sorted, vec![0, 10, 1, 11, 2, 12]);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 3.0, 0.1, 1e-300, 123456.789, 2.5e20] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_number(7.0), "7");
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(Format::from_path(Path::new("a/b.UAI")), Some(Format::Uai));
        assert_eq!(Format::from_path(Path::new("x.wcsp")), Some(Format::Wcsp));
        assert_eq!(Format::from_path(Path::new("x.txt")), None);
    }
}
