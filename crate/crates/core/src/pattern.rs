//! Ordered tuples, the padded l-path pattern `P_{a,x}`, and l-cycle witnesses.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};

/// A sequence of distinct vertices; order is significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderedTuple(Vec<Vertex>);

impl OrderedTuple {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return Err(Error::RepeatedVertex(*v));
            }
        }
        Ok(OrderedTuple(vertices))
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }

    pub fn reversed(&self) -> OrderedTuple {
        OrderedTuple(self.0.iter().rev().copied().collect())
    }
}

impl Deref for OrderedTuple {
    type Target = [Vertex];
    fn deref(&self) -> &[Vertex] {
        &self.0
    }
}

/// The k-graph `P_{a,x}`: an l-path with `a` edges padded by `x` isolated
/// vertices on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPattern {
    pub k: usize,
    pub ell: usize,
    pub a: usize,
    pub x: usize,
}

impl PathPattern {
    pub fn new(k: usize, ell: usize, a: usize, x: usize) -> Result<Self> {
        if ell == 0 || ell >= k {
            return Err(Error::InvalidParameter(format!("need 1 <= ell < k, got k={k}, ell={ell}")));
        }
        Ok(PathPattern { k, ell, a, x })
    }

    /// The unpadded path `P_a`.
    pub fn path(k: usize, ell: usize, a: usize) -> Result<Self> {
        Self::new(k, ell, a, 0)
    }

    /// b = 2x + l + (k - l) a
    pub fn vertex_count(&self) -> usize {
        2 * self.x + self.ell + (self.k - self.ell) * self.a
    }

    pub fn edge_count(&self) -> usize {
        self.a
    }

    /// First position of edge `i`; the edge covers `start..start + k`.
    pub fn edge_start(&self, i: usize) -> usize {
        self.x + i * (self.k - self.ell)
    }

    /// Position ranges of the pattern edges.
    pub fn edge_ranges(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        (0..self.a).map(move |i| {
            let s = self.edge_start(i);
            s..s + self.k
        })
    }
}

/// Whether the ordered tuple `t` spans a labelled copy of `pattern` in `h`.
pub fn spans_labeled_copy(h: &Hypergraph, t: &[Vertex], pattern: &PathPattern) -> Result<bool> {
    if t.len() != pattern.vertex_count() {
        return Err(Error::InvalidArity {
            expected: pattern.vertex_count().to_string(),
            got: t.len(),
        });
    }
    if pattern.k != h.k() {
        return Err(Error::InvalidParameter(format!(
            "pattern is {}-uniform, graph is {}-uniform",
            pattern.k,
            h.k()
        )));
    }
    for (i, v) in t.iter().enumerate() {
        if *v >= h.n() {
            return Err(Error::VertexOutOfRange { vertex: *v, n: h.n() });
        }
        if t[..i].contains(v) {
            return Err(Error::RepeatedVertex(*v));
        }
    }
    Ok(pattern.edge_ranges().all(|r| h.contains_edge(&t[r])))
}

/// Whether `seq` is an l-path (windows at multiples of k - l) in `h`.
/// Sequences that are too short to hold one edge are rejected.
pub fn is_ell_path(h: &Hypergraph, seq: &[Vertex], ell: usize) -> bool {
    let k = h.k();
    if ell == 0 || ell >= k || seq.len() < k || !(seq.len() - ell).is_multiple_of(k - ell) {
        return false;
    }
    let a = (seq.len() - ell) / (k - ell);
    (0..a).all(|i| h.contains_edge(&seq[i * (k - ell)..i * (k - ell) + k]))
}

/// A cyclic vertex order read as an l-cycle: edge `j` is the window of k
/// positions starting at `j (k - l)`, indices taken mod the length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleWitness {
    pub order: Vec<Vertex>,
    pub k: usize,
    pub ell: usize,
}

/// Why a cyclic order fails to be a Hamiltonian l-cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleDefect {
    MissingWindow { index: usize, vertices: Vec<Vertex> },
    Duplicate { position: usize, vertex: Vertex },
    OutOfRange { position: usize, vertex: Vertex },
    NotCovering { missing: Vec<Vertex> },
}

impl std::fmt::Display for CycleDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CycleDefect::MissingWindow { index, vertices } => {
                write!(f, "window {index} {vertices:?} is not an edge")
            }
            CycleDefect::Duplicate { position, vertex } => {
                write!(f, "vertex {vertex} repeated at position {position}")
            }
            CycleDefect::OutOfRange { position, vertex } => {
                write!(f, "vertex {vertex} at position {position} is out of range")
            }
            CycleDefect::NotCovering { missing } => write!(f, "vertices not covered: {missing:?}"),
        }
    }
}

impl CycleWitness {
    pub fn new(order: Vec<Vertex>, k: usize, ell: usize) -> Result<Self> {
        let w = CycleWitness { order, k, ell };
        w.check_shape()?;
        Ok(w)
    }

    /// Number of edges m = |order| / (k - l).
    pub fn edge_count(&self) -> usize {
        self.order.len() / (self.k - self.ell)
    }

    fn check_shape(&self) -> Result<()> {
        if self.ell == 0 || self.ell >= self.k {
            return Err(Error::MalformedWitness(format!(
                "need 1 <= ell < k, got k={}, ell={}",
                self.k, self.ell
            )));
        }
        let len = self.order.len();
        if !len.is_multiple_of(self.k - self.ell) {
            return Err(Error::MalformedWitness(format!(
                "length {len} not divisible by k - ell = {}",
                self.k - self.ell
            )));
        }
        if len / (self.k - self.ell) < 3 {
            return Err(Error::MalformedWitness(format!(
                "only {} edges; an l-cycle needs at least 3",
                len / (self.k - self.ell)
            )));
        }
        Ok(())
    }

    /// Vertices of window `j`.
    pub fn window(&self, j: usize) -> Vec<Vertex> {
        let len = self.order.len();
        let s = j * (self.k - self.ell);
        (0..self.k).map(|i| self.order[(s + i) % len]).collect()
    }

    /// All windows of this cyclic order.
    pub fn windows(&self) -> impl Iterator<Item = Vec<Vertex>> + '_ {
        (0..self.edge_count()).map(move |j| self.window(j))
    }
}

/// First defect of `w` as a Hamiltonian l-cycle of `h`, if any.
pub fn cycle_defect(h: &Hypergraph, w: &CycleWitness) -> Result<Option<CycleDefect>> {
    w.check_shape()?;
    if w.k != h.k() {
        return Err(Error::MalformedWitness(format!("witness k = {} but graph k = {}", w.k, h.k())));
    }
    let mut seen = vec![false; h.n()];
    for (pos, &v) in w.order.iter().enumerate() {
        if v >= h.n() {
            return Ok(Some(CycleDefect::OutOfRange { position: pos, vertex: v }));
        }
        if seen[v] {
            return Ok(Some(CycleDefect::Duplicate { position: pos, vertex: v }));
        }
        seen[v] = true;
    }
    for (j, win) in w.windows().enumerate() {
        if !h.contains_edge(&win) {
            return Ok(Some(CycleDefect::MissingWindow { index: j, vertices: win }));
        }
    }
    let missing: Vec<Vertex> = (0..h.n()).filter(|&v| !seen[v]).collect();
    if !missing.is_empty() {
        return Ok(Some(CycleDefect::NotCovering { missing }));
    }
    Ok(None)
}

/// Whether `w` is a Hamiltonian l-cycle of `h`.
pub fn is_hamiltonian_cycle(h: &Hypergraph, w: &CycleWitness) -> Result<bool> {
    Ok(cycle_defect(h, w)?.is_none())
}
