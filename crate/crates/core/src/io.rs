//! Plain-text hypergraph and witness formats.
//!
//! A hypergraph file starts with a `k n m` header line followed by `m`
//! lines of `k` space-separated vertex indices. Lines starting with `#`
//! are comments and blank lines are ignored. The writer emits edges in
//! ascending lexicographic order with ascending vertices, so writing a
//! parsed file reproduces the canonical form byte for byte.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::Parse { line, msg: format!("expected {what}, found {tok:?}") })
}

/// Parses a hypergraph from text.
pub fn parse_hypergraph(text: &str) -> Result<Hypergraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(Error::Parse { line: hline, msg: format!("header must be `k n m`, found {header:?}") });
    }
    let k = parse_usize(toks[0], hline, "k")?;
    let n = parse_usize(toks[1], hline, "n")?;
    let m = parse_usize(toks[2], hline, "m")?;

    let mut edges: Vec<Vec<Vertex>> = Vec::with_capacity(m);
    for (lno, l) in lines {
        let e = l
            .split_whitespace()
            .map(|t| parse_usize(t, lno, "vertex index"))
            .collect::<Result<Vec<_>>>()?;
        if e.len() != k {
            return Err(Error::Parse { line: lno, msg: format!("edge has {} vertices, expected {k}", e.len()) });
        }
        if let Some(&v) = e.iter().find(|&&v| v >= n) {
            return Err(Error::Parse { line: lno, msg: format!("vertex {v} out of range for n = {n}") });
        }
        edges.push(e);
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    let h = Hypergraph::new(k, n, &edges)?;
    if h.edge_count() != m {
        return Err(Error::Parse { line: 0, msg: "duplicate edges".into() });
    }
    Ok(h)
}

/// Reads a hypergraph from any buffered reader.
pub fn read_hypergraph<R: BufRead>(mut r: R) -> Result<Hypergraph> {
    let mut s = String::new();
    r.read_to_string(&mut s)?;
    parse_hypergraph(&s)
}

/// Canonical text form of `h`.
pub fn format_hypergraph(h: &Hypergraph) -> String {
    let mut out = String::with_capacity(16 + h.edge_count() * h.k() * 4);
    let _ = writeln!(out, "{} {} {}", h.k(), h.n(), h.edge_count());
    for e in h.edges() {
        let mut first = true;
        for v in e {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_hypergraph<W: Write>(mut w: W, h: &Hypergraph) -> Result<()> {
    w.write_all(format_hypergraph(h).as_bytes())?;
    Ok(())
}

/// One-line, space-separated vertex order.
pub fn format_witness(order: &[Vertex]) -> String {
    let parts: Vec<String> = order.iter().map(|v| v.to_string()).collect();
    parts.join(" ")
}

/// Parses the first non-comment line of `text` as a vertex order.
pub fn parse_witness(text: &str) -> Result<Vec<Vertex>> {
    let (lno, line) = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .ok_or(Error::Parse { line: 0, msg: "empty witness".into() })?;
    line.split_whitespace().map(|t| parse_usize(t, lno, "vertex index")).collect()
}
