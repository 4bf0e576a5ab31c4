//! Deterministic text dump of an automaton.
//!
//! ```text
//! # levels 3
//! # domains 2 2 2
//! # start 0
//! # accepting 4
//! 0 0 0 1
//! 1 1 0 2
//! 1 1 1 3
//! 2 2 * 4
//! 2 3 1 4
//! ```
//!
//! Body lines are `level src symbol dst`, with `*` for the wildcard, in
//! breadth-first order of the source state.

use std::fmt::{self, Write as _};

use super::{AutomatonError, Dafsa, StateId, Symbol};

impl Dafsa {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let (order, depth) = self.bfs();
        let domains = self
            .domains
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        let accepting = order
            .iter()
            .filter(|&&s| self.is_accepting(s))
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "# levels {}", self.level_count());
        let _ = writeln!(out, "# domains {domains}");
        let _ = writeln!(out, "# start {}", self.start);
        let _ = writeln!(out, "# accepting {accepting}");
        for &s in &order {
            for (sym, t) in self.transitions_from(s) {
                let _ = writeln!(out, "{} {} {} {}", depth[s as usize], s, sym, t);
            }
        }
        out
    }

    /// Parses the format written by [`Dafsa::to_text`]. The automaton is not
    /// minimized, only validated.
    pub fn from_text(text: &str) -> Result<Dafsa, AutomatonError> {
        let err = |line: usize, message: &str| AutomatonError::Text {
            line,
            message: message.to_string(),
        };
        let mut domains: Option<Vec<u32>> = None;
        let mut start: StateId = 0;
        let mut accepting: Vec<StateId> = Vec::new();
        let mut transitions = Vec::new();
        let mut max_state: StateId = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            if let Some(header) = raw.strip_prefix('#') {
                let mut words = header.split_whitespace();
                let key = words.next().unwrap_or("");
                let nums: Result<Vec<u32>, _> = words.map(str::parse::<u32>).collect();
                let nums = nums.map_err(|_| err(line, "non-numeric header value"))?;
                match key {
                    "levels" => {}
                    "domains" => domains = Some(nums),
                    "start" => {
                        start = *nums.first().ok_or_else(|| err(line, "missing start"))?;
                        max_state = max_state.max(start);
                    }
                    "accepting" => {
                        max_state = nums.iter().copied().fold(max_state, StateId::max);
                        accepting = nums;
                    }
                    _ => return Err(err(line, "unknown header")),
                }
                continue;
            }
            let fields: Vec<&str> = raw.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(err(line, "expected `level src symbol dst`"));
            }
            let num = |s: &str| s.parse::<u32>().map_err(|_| err(line, "non-numeric field"));
            let src = num(fields[1])?;
            let sym = match fields[2] {
                "*" => Symbol::Wildcard,
                s => Symbol::Literal(num(s)?),
            };
            let dst = num(fields[3])?;
            max_state = max_state.max(src).max(dst);
            transitions.push((src, sym, dst));
        }
        let domains = domains.ok_or_else(|| err(0, "missing domains header"))?;
        Dafsa::from_transitions(
            &domains,
            max_state as usize + 1,
            start,
            &accepting,
            &transitions,
        )
    }
}

impl fmt::Display for Dafsa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIRST_VALUE: &str = "\
# levels 3
# domains 2 2 2
# start 0
# accepting 4
0 0 0 1
1 1 0 2
1 1 1 3
2 2 * 4
2 3 1 4
";

    #[test]
    fn golden_dump() {
        let a = Dafsa::compile(&[2, 2, 2], &[[0, 0, 0], [0, 0, 1], [0, 1, 1]]).unwrap();
        assert_eq!(a.to_text(), FIRST_VALUE);
    }

    #[test]
    fn parse_back() {
        let a = Dafsa::from_text(FIRST_VALUE).unwrap();
        assert_eq!(a.to_text(), FIRST_VALUE);
        assert_eq!(a.count(), 3);
    }

    #[test]
    fn empty_string_automaton_dump() {
        let a = Dafsa::universal(&[]);
        assert_eq!(
            a.to_text(),
            "# levels 0\n# domains \n# start 0\n# accepting 0\n"
        );
        assert_eq!(Dafsa::from_text(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Dafsa::from_text("# domains 2\n0 0 x 1\n").is_err());
        assert!(Dafsa::from_text("0 0 0 1\n").is_err());
    }
}
