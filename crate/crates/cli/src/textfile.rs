//! Plain-text matrix blocks.
//!
//! A block starts with a header `NAME rows cols` followed by `rows` lines of `cols`
//! whitespace-separated entries. An entry is `re` or `re,im`. `#` starts a comment.

use crate::CliError;
use qfb_core::{CMatrix64, Complex64};
use std::collections::BTreeMap;

fn entry(tok: &str, line: usize) -> Result<Complex64, CliError> {
    let bad = || CliError::Config(format!("line {line}: cannot parse entry {tok:?}"));
    let (re, im) = match tok.split_once(',') {
        Some((r, i)) => (r.parse().map_err(|_| bad())?, i.parse().map_err(|_| bad())?),
        None => (tok.parse().map_err(|_| bad())?, 0.0),
    };
    Ok(Complex64::new(re, im))
}

/// Parses every block; block names must be unique.
pub fn parse_blocks(text: &str) -> Result<BTreeMap<String, CMatrix64>, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut out = BTreeMap::new();
    while let Some((n, header)) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [name, rows, cols] = parts[..] else {
            return Err(CliError::Config(format!("line {n}: expected `NAME rows cols`")));
        };
        let dim = |s: &str| s.parse::<usize>().map_err(|_| CliError::Config(format!("line {n}: bad dimension {s:?}")));
        let (rows, cols) = (dim(rows)?, dim(cols)?);
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (m, line) = lines
                .next()
                .ok_or_else(|| CliError::Config(format!("block {name}: missing row {}", r + 1)))?;
            let row = line.split_whitespace().map(|t| entry(t, m)).collect::<Result<Vec<_>, _>>()?;
            if row.len() != cols {
                return Err(CliError::Config(format!("line {m}: expected {cols} entries, got {}", row.len())));
            }
            data.extend(row);
        }
        if out.insert(name.to_string(), CMatrix64::from_rows(rows, cols, data)).is_some() {
            return Err(CliError::Config(format!("duplicate block {name}")));
        }
    }
    Ok(out)
}
