//! GOBNILP-style local score files.
//!
//! ```text
//! 2
//! A 2
//! -1.5 1 B
//! -2 0
//! B 2
//! -1.25 0
//! -3 1 A
//! ```
//!
//! The first line is the variable count. Each variable block starts with
//! `NAME COUNT` and is followed by `COUNT` lines of `SCORE k PARENT_1 .. PARENT_k`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{ParentSetEntry, ScoreError, ScoreTable};

struct RawEntry {
    line: usize,
    score: f64,
    parents: Vec<String>,
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-blank line with its 1-based line number.
    fn next_line(&mut self) -> Result<Option<(usize, String)>, ScoreError> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            let trimmed = l.trim();
            if !trimmed.is_empty() {
                return Ok(Some((self.line, trimmed.to_owned())));
            }
        }
        Ok(None)
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> ScoreError {
    ScoreError::Syntax {
        line,
        message: msg.into(),
    }
}

pub fn parse_score_file<R: BufRead>(stream: R) -> Result<ScoreTable, ScoreError> {
    let mut lines = Lines {
        inner: stream.lines(),
        line: 0,
    };
    let (line, header) = lines
        .next_line()?
        .ok_or_else(|| syntax(1, "empty score file"))?;
    let n: usize = header
        .parse()
        .map_err(|_| syntax(line, format!("expected variable count, found {header:?}")))?;

    let mut blocks: Vec<(String, Vec<RawEntry>)> = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, text) = lines.next_line()?.ok_or_else(|| ScoreError::CountMismatch {
            what: "variables".into(),
            declared: n,
            found: blocks.len(),
        })?;
        let mut tok = text.split_whitespace();
        let name = tok.next().unwrap_or_default().to_owned();
        let count: usize = tok
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| syntax(line, format!("expected \"NAME COUNT\", found {text:?}")))?;
        if tok.next().is_some() {
            return Err(syntax(line, format!("trailing tokens in {text:?}")));
        }
        let mut entries = Vec::with_capacity(count);
        for found in 0..count {
            let mismatch = || ScoreError::CountMismatch {
                what: format!("parent sets of {name}"),
                declared: count,
                found,
            };
            let (line, text) = lines.next_line()?.ok_or_else(mismatch)?;
            let mut tok = text.split_whitespace();
            // A line that does not start with a number is the next block header.
            let score: f64 = match tok.next().and_then(|s| s.parse().ok()) {
                Some(s) => s,
                None => return Err(mismatch()),
            };
            let k: usize = tok
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| syntax(line, "expected parent count after score"))?;
            let parents: Vec<String> = tok.map(str::to_owned).collect();
            if parents.len() != k {
                return Err(syntax(
                    line,
                    format!("declared {k} parents but listed {}", parents.len()),
                ));
            }
            entries.push(RawEntry {
                line,
                score,
                parents,
            });
        }
        blocks.push((name, entries));
    }
    if let Some((line, text)) = lines.next_line()? {
        return Err(syntax(line, format!("unexpected trailing content {text:?}")));
    }

    let names: Vec<String> = blocks.iter().map(|(n, _)| n.clone()).collect();
    let ids: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    if ids.len() != names.len() {
        let dup = names
            .iter()
            .enumerate()
            .find(|(i, n)| ids[n.as_str()] != *i)
            .map(|(_, n)| n.clone())
            .unwrap_or_default();
        return Err(ScoreError::DuplicateVariable(dup));
    }

    let mut entries = Vec::with_capacity(n);
    for (_, raw) in &blocks {
        let mut list = Vec::with_capacity(raw.len());
        for r in raw {
            let mut parents = Vec::with_capacity(r.parents.len());
            for p in &r.parents {
                let id = *ids
                    .get(p.as_str())
                    .ok_or_else(|| ScoreError::UnknownVariable {
                        line: r.line,
                        name: p.clone(),
                    })?;
                parents.push(id);
            }
            parents.sort_unstable();
            if parents.windows(2).any(|w| w[0] == w[1]) {
                return Err(syntax(r.line, "parent listed twice"));
            }
            list.push(ParentSetEntry::new(parents, r.score));
        }
        entries.push(list);
    }
    ScoreTable::new(names, entries)
}

/// Writes variables in id order and entries in descending score.
///
/// Scores use the shortest decimal that parses back to the same `f64`.
pub fn write_score_file<W: Write>(table: &ScoreTable, mut out: W) -> Result<(), ScoreError> {
    writeln!(out, "{}", table.num_nodes())?;
    for v in 0..table.num_nodes() {
        let entries = table.entries(v);
        writeln!(out, "{} {}", table.name(v), entries.len())?;
        for e in entries {
            write!(out, "{} {}", e.score, e.parents.len())?;
            for &p in &e.parents {
                write!(out, " {}", table.name(p))?;
            }
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}
