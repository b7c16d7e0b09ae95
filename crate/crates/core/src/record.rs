//! Plain-text record format for graphons and matrices.
//!
//! ```text
//! stepgraphon k
//! w_1 ... w_k
//! Q_11 ... Q_1k
//! ...
//! Q_k1 ... Q_kk
//! ```
//!
//! Matrices use the header `matrix n` followed by `n` rows. Values are
//! written with the shortest representation that parses back to the same
//! `f64`, so writing and re-reading is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::{Matrix, StepGraphon};

fn push_row(out: &mut String, values: &[f64]) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v:?}").unwrap();
    }
    out.push('\n');
}

pub fn graphon_to_string(w: &StepGraphon) -> String {
    let k = w.k();
    let mut out = format!("stepgraphon {k}\n");
    push_row(&mut out, w.weights());
    for row in w.values().chunks(k) {
        push_row(&mut out, row);
    }
    out
}

pub fn matrix_to_string(m: &Matrix) -> String {
    let n = m.n();
    let mut out = format!("matrix {n}\n");
    for i in 0..n {
        push_row(&mut out, m.row(i));
    }
    out
}

struct Tokens<'a> {
    iter: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn new(s: &'a str) -> Self {
        Self { iter: s.split_whitespace() }
    }

    fn word(&mut self) -> Result<&'a str> {
        self.iter.next().ok_or_else(|| Error::Parse("unexpected end of record".into()))
    }

    fn header(&mut self, tag: &str) -> Result<usize> {
        let t = self.word()?;
        if t != tag {
            return Err(Error::Parse(format!("expected header `{tag}`, found `{t}`")));
        }
        let size = self.word()?;
        size.parse().map_err(|_| Error::Parse(format!("bad size `{size}`")))
    }

    fn floats(&mut self, count: usize) -> Result<Vec<f64>> {
        (0..count)
            .map(|_| {
                let t = self.word()?;
                t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{t}`")))
            })
            .collect()
    }

    fn finish(mut self) -> Result<()> {
        match self.iter.next() {
            None => Ok(()),
            Some(t) => Err(Error::Parse(format!("trailing token `{t}`"))),
        }
    }
}

/// Parse a graphon record. Records containing values above one are read as
/// unbounded graphons.
pub fn parse_graphon(s: &str) -> Result<StepGraphon> {
    let mut tok = Tokens::new(s);
    let k = tok.header("stepgraphon")?;
    let weights = tok.floats(k)?;
    let q = tok.floats(k * k)?;
    tok.finish()?;
    if q.iter().any(|&v| v > 1.0) {
        StepGraphon::new_unbounded(q, weights)
    } else {
        StepGraphon::new(q, weights)
    }
}

pub fn parse_matrix(s: &str) -> Result<Matrix> {
    let mut tok = Tokens::new(s);
    let n = tok.header("matrix")?;
    let data = tok.floats(n * n)?;
    tok.finish()?;
    Matrix::from_row_major(n, data)
}

pub fn write_graphon(path: &Path, w: &StepGraphon) -> Result<()> {
    std::fs::write(path, graphon_to_string(w))?;
    Ok(())
}

pub fn read_graphon(path: &Path) -> Result<StepGraphon> {
    parse_graphon(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    std::fs::write(path, matrix_to_string(m))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

/// `key=value` lines, one per entry, in the given order.
pub fn key_values_to_string(entries: &[(&str, String)]) -> String {
    entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

/// Parse `key=value` lines; blank lines and `#` comments are skipped.
/// Repeated keys are kept in order.
pub fn parse_key_values(s: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in s.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
