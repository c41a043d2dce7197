//! Exact backtracking answers for small instances: Hamiltonian l-cycles,
//! l-paths on `a` edges, and labeled copies of `P_{a,x}`.
//!
//! This search is written separately from the randomized one used by the
//! pipeline so that each can be checked against the other.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{falling, Hypergraph, Vertex};
use crate::pattern::{CycleWitness, OrderedTuple, PathPattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub node_limit: u64,
    pub time_limit_ms: Option<u64>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { node_limit: 50_000_000, time_limit_ms: None }
    }
}

impl SearchBudget {
    pub fn nodes(node_limit: u64) -> Self {
        SearchBudget { node_limit, time_limit_ms: None }
    }
}

/// Answer of a budgeted exact search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision<T> {
    Yes(T),
    No,
    BudgetExhausted,
}

impl<T> Decision<T> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Decision::Yes(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Decision::Yes(_) => "YES",
            Decision::No => "NO",
            Decision::BudgetExhausted => "UNKNOWN",
        }
    }
}

struct Meter {
    nodes: u64,
    limit: u64,
    deadline: Option<Instant>,
}

impl Meter {
    fn new(b: &SearchBudget) -> Self {
        Meter {
            nodes: 0,
            limit: b.node_limit,
            deadline: b.time_limit_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
        }
    }

    /// False once the budget is spent.
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.limit {
            return false;
        }
        if self.nodes.is_multiple_of(4096) {
            if let Some(d) = self.deadline {
                return Instant::now() < d;
            }
        }
        true
    }
}

/// Position-ordered search for a sequence whose edge windows are all edges.
struct Embed<'a> {
    h: &'a Hypergraph,
    len: usize,
    /// Windows `start..end` sorted by start; in a cyclic search `end` may
    /// pass `len` and wrap around.
    windows: Vec<(usize, usize)>,
    cyclic: bool,
    fixed: Vec<Option<Vertex>>,
    /// Vertices that appear in `fixed`.
    pinned: Vec<bool>,
}

enum Step {
    Found,
    Dead,
    OutOfBudget,
}

impl<'a> Embed<'a> {
    fn new(h: &'a Hypergraph, len: usize, windows: Vec<(usize, usize)>, cyclic: bool, fixed: Vec<Option<Vertex>>) -> Self {
        let mut pinned = vec![false; h.n()];
        for v in fixed.iter().flatten() {
            pinned[*v] = true;
        }
        Embed { h, len, windows, cyclic, fixed, pinned }
    }

    fn window_ok(&self, seq: &[Vertex]) -> bool {
        let i = seq.len() - 1;
        let k = self.h.k();
        let mut buf = [0usize; crate::hypergraph::MAX_K];
        for &(s, e) in &self.windows {
            if s > i {
                break;
            }
            if e - 1 < i {
                continue;
            }
            // positions s..=i are known; the wrapped tail of a cyclic
            // window is checked once the sequence is complete
            let part = &seq[s..=i];
            let ok = if part.len() == k { self.h.contains_edge(part) } else { part.len() < 2 || self.h.has_superset_edge(part) };
            if !ok {
                return false;
            }
        }
        if self.cyclic && i + 1 == self.len {
            for &(s, e) in &self.windows {
                if e > self.len {
                    for (j, p) in (s..e).enumerate() {
                        buf[j] = seq[p % self.len];
                    }
                    if !self.h.contains_edge(&buf[..k]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn dfs(&self, seq: &mut Vec<Vertex>, used: &mut [bool], meter: &mut Meter, accept: &dyn Fn(&[Vertex]) -> bool) -> Step {
        let i = seq.len();
        if i == self.len {
            return if accept(seq) { Step::Found } else { Step::Dead };
        }
        let cands: Vec<Vertex> = match self.fixed[i] {
            Some(v) => vec![v],
            None => (0..self.h.n()).filter(|&v| !used[v] && !self.pinned[v]).collect(),
        };
        for v in cands {
            if used[v] {
                continue;
            }
            if !meter.tick() {
                return Step::OutOfBudget;
            }
            seq.push(v);
            used[v] = true;
            if self.window_ok(seq) {
                match self.dfs(seq, used, meter, accept) {
                    Step::Dead => {}
                    other => return other,
                }
            }
            seq.pop();
            used[v] = false;
        }
        Step::Dead
    }
}

/// Decides whether `h` has a Hamiltonian l-cycle.
pub fn hamilton_exists(h: &Hypergraph, ell: usize, budget: &SearchBudget) -> Result<Decision<CycleWitness>> {
    let (k, n) = (h.k(), h.n());
    if ell == 0 || ell >= k {
        return Err(Error::InvalidParameter(format!("need 1 <= ell < k, got ell = {ell}")));
    }
    let m = k - ell;
    if n % m != 0 || n / m < 3 {
        return Err(Error::InvalidParameter(format!("n = {n} must be a multiple of k - l = {m} with at least 3 edges")));
    }
    let windows: Vec<(usize, usize)> = (0..n / m).map(|j| (j * m, j * m + k)).collect();
    let mut meter = Meter::new(budget);
    // rotations by multiples of m put vertex 0 into one of the first m slots;
    // for m = 1 reflections are removed by ordering 0's two neighbours
    for s0 in 0..m {
        let mut fixed = vec![None; n];
        fixed[s0] = Some(0);
        let e = Embed::new(h, n, windows.clone(), true, fixed);
        let accept = |seq: &[Vertex]| m > 1 || seq[1] < seq[n - 1];
        let mut seq = Vec::with_capacity(n);
        let mut used = vec![false; n];
        match e.dfs(&mut seq, &mut used, &mut meter, &accept) {
            Step::Found => return Ok(Decision::Yes(CycleWitness::new(seq, k, ell)?)),
            Step::OutOfBudget => return Ok(Decision::BudgetExhausted),
            Step::Dead => {}
        }
    }
    Ok(Decision::No)
}

/// Decides whether `h` contains an l-path with `a` edges.
pub fn ell_path_exists(h: &Hypergraph, ell: usize, a: usize, budget: &SearchBudget) -> Result<Decision<OrderedTuple>> {
    let k = h.k();
    if ell == 0 || ell >= k {
        return Err(Error::InvalidParameter(format!("need 1 <= ell < k, got ell = {ell}")));
    }
    if a == 0 {
        return Err(Error::InvalidParameter("a must be at least 1".into()));
    }
    let m = k - ell;
    let len = ell + a * m;
    if len > h.n() {
        return Ok(Decision::No);
    }
    let e = Embed::new(h, len, (0..a).map(|j| (j * m, j * m + k)).collect(), false, vec![None; len]);
    let mut seq = Vec::with_capacity(len);
    let mut used = vec![false; h.n()];
    // a path and its reversal are the same copy
    let accept = |seq: &[Vertex]| seq[0] < seq[len - 1];
    Ok(match e.dfs(&mut seq, &mut used, &mut Meter::new(budget), &accept) {
        Step::Found => Decision::Yes(OrderedTuple::new(seq)?),
        Step::Dead => Decision::No,
        Step::OutOfBudget => Decision::BudgetExhausted,
    })
}

/// Number of ordered `b`-tuples of distinct vertices spanning a labeled copy
/// of `pattern`: embeddings of the middle `l + a(k - l)` positions times the
/// free choices of the `2x` pad positions.
pub fn count_labeled_copies(h: &Hypergraph, pattern: &PathPattern) -> Result<u128> {
    if pattern.k != h.k() {
        return Err(Error::InvalidParameter(format!("pattern is {}-uniform, graph is {}-uniform", pattern.k, h.k())));
    }
    let n = h.n();
    let mid = pattern.vertex_count() - 2 * pattern.x;
    if pattern.vertex_count() > n {
        return Ok(0);
    }
    let m = pattern.k - pattern.ell;
    let windows: Vec<(usize, usize)> = (0..pattern.a).map(|j| (j * m, j * m + pattern.k)).collect();
    let e = Embed::new(h, mid, windows, false, vec![None; mid]);
    let count = std::cell::Cell::new(0u128);
    let accept = |_: &[Vertex]| {
        count.set(count.get() + 1);
        false
    };
    let mut seq = Vec::with_capacity(mid);
    let mut used = vec![false; n];
    e.dfs(&mut seq, &mut used, &mut Meter::new(&SearchBudget::nodes(u64::MAX)), &accept);
    Ok(count.get() * falling((n - mid) as u64, 2 * pattern.x as u64))
}
