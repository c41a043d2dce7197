//! Randomized backtracking search for l-paths that follow a slot template.
//!
//! Every position of the path is either fixed to a vertex or drawn from a
//! vertex pool. Windows are checked as soon as they are complete and
//! partial windows are pruned by requiring a superset edge. Candidate
//! vertices for a position inside a partially filled window come from the
//! edges through that partial window, which keeps the search local in
//! sparse graphs.

use rand::seq::SliceRandom;

use crate::hypergraph::{Hypergraph, Vertex};
use crate::random::Rand;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Slot {
    Fixed(Vertex),
    Pool(usize),
}

/// A vertex pool as a membership mask plus its listing.
#[derive(Clone, Debug)]
pub(crate) struct Pool {
    mask: Vec<bool>,
    list: Vec<Vertex>,
}

impl Pool {
    pub(crate) fn new(n: usize, vertices: impl IntoIterator<Item = Vertex>) -> Self {
        let mut mask = vec![false; n];
        let mut list = Vec::new();
        for v in vertices {
            if !mask[v] {
                mask[v] = true;
                list.push(v);
            }
        }
        Pool { mask, list }
    }

    pub(crate) fn from_mask(mask: Vec<bool>) -> Self {
        let list = (0..mask.len()).filter(|&v| mask[v]).collect();
        Pool { mask, list }
    }

    pub(crate) fn contains(&self, v: Vertex) -> bool {
        self.mask[v]
    }

    pub(crate) fn len(&self) -> usize {
        self.list.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Found {
    Yes(Vec<Vertex>),
    No,
    Exhausted,
}

type EndCheck<'a> = Box<dyn Fn(&[Vertex]) -> bool + 'a>;

pub(crate) struct PathSearch<'a> {
    graph: &'a Hypergraph,
    ell: usize,
    slots: Vec<Slot>,
    pools: Vec<&'a Pool>,
    start_ok: Option<EndCheck<'a>>,
    end_ok: Option<EndCheck<'a>>,
    node_limit: u64,
}

struct State<'r> {
    seq: Vec<Vertex>,
    in_path: Vec<bool>,
    nodes: u64,
    rng: &'r mut Rand,
}

impl<'a> PathSearch<'a> {
    /// `slots.len()` must be `ell + a (k - ell)` for some `a >= 1`.
    pub(crate) fn new(graph: &'a Hypergraph, ell: usize, slots: Vec<Slot>, pools: Vec<&'a Pool>) -> Self {
        let m = graph.k() - ell;
        debug_assert!(slots.len() >= graph.k() && (slots.len() - ell).is_multiple_of(m));
        PathSearch { graph, ell, slots, pools, start_ok: None, end_ok: None, node_limit: u64::MAX }
    }

    pub(crate) fn start_check(mut self, f: impl Fn(&[Vertex]) -> bool + 'a) -> Self {
        self.start_ok = Some(Box::new(f));
        self
    }

    pub(crate) fn end_check(mut self, f: impl Fn(&[Vertex]) -> bool + 'a) -> Self {
        self.end_ok = Some(Box::new(f));
        self
    }

    pub(crate) fn node_limit(mut self, limit: u64) -> Self {
        self.node_limit = limit;
        self
    }

    pub(crate) fn run(&self, rng: &mut Rand) -> Found {
        let mut st = State {
            seq: Vec::with_capacity(self.slots.len()),
            in_path: vec![false; self.graph.n()],
            nodes: 0,
            rng,
        };
        match self.dfs(&mut st) {
            Some(true) => Found::Yes(st.seq),
            Some(false) => Found::No,
            None => Found::Exhausted,
        }
    }

    fn m(&self) -> usize {
        self.graph.k() - self.ell
    }

    /// Start position of the first window that contains position `i`.
    fn window_start(&self, i: usize) -> usize {
        let (k, m) = (self.graph.k(), self.m());
        if i < k {
            0
        } else {
            (i + 1 - k).div_ceil(m) * m
        }
    }

    /// Checks the constraints that become decidable once position `i` is set.
    fn admissible(&self, seq: &[Vertex]) -> bool {
        let i = seq.len() - 1;
        let k = self.graph.k();
        if i + 1 == self.ell {
            if let Some(f) = &self.start_ok {
                if !f(&seq[..self.ell]) {
                    return false;
                }
            }
        }
        if i + 1 >= k && (i + 1 - k).is_multiple_of(self.m()) {
            if !self.graph.contains_edge(&seq[i + 1 - k..=i]) {
                return false;
            }
        } else {
            let ws = self.window_start(i);
            if i > ws && !self.graph.has_superset_edge(&seq[ws..=i]) {
                return false;
            }
        }
        if i + 1 == self.slots.len() {
            if let Some(f) = &self.end_ok {
                if !f(&seq[seq.len() - self.ell..]) {
                    return false;
                }
            }
        }
        true
    }

    fn candidates(&self, st: &mut State<'_>, pool: &Pool) -> Vec<Vertex> {
        let i = st.seq.len();
        let ws = self.window_start(i);
        let mut out: Vec<Vertex> = if i > ws {
            let partial = &st.seq[ws..i];
            if partial.len() + 1 == self.graph.k() {
                let mut out: Vec<Vertex> = self
                    .graph
                    .completions(partial)
                    .iter()
                    .copied()
                    .filter(|&v| !st.in_path[v] && pool.contains(v))
                    .collect();
                out.shuffle(st.rng);
                return out;
            }
            let mut seen = vec![];
            for id in self.graph.edges_containing(partial) {
                for &v in self.graph.edge(id) {
                    if !st.in_path[v] && pool.contains(v) {
                        seen.push(v);
                    }
                }
            }
            seen.sort_unstable();
            seen.dedup();
            seen
        } else {
            pool.list.iter().copied().filter(|&v| !st.in_path[v]).collect()
        };
        out.shuffle(st.rng);
        out
    }

    /// `Some(true)` found, `Some(false)` exhausted the tree, `None` out of budget.
    fn dfs(&self, st: &mut State<'_>) -> Option<bool> {
        let i = st.seq.len();
        if i == self.slots.len() {
            return Some(true);
        }
        let cands = match self.slots[i] {
            Slot::Fixed(v) => {
                if st.in_path[v] {
                    return Some(false);
                }
                vec![v]
            }
            Slot::Pool(p) => self.candidates(st, self.pools[p]),
        };
        for v in cands {
            st.nodes += 1;
            if st.nodes > self.node_limit {
                return None;
            }
            st.seq.push(v);
            st.in_path[v] = true;
            if self.admissible(&st.seq) {
                match self.dfs(st) {
                    Some(true) => return Some(true),
                    None => {
                        st.seq.pop();
                        st.in_path[v] = false;
                        return None;
                    }
                    Some(false) => {}
                }
            }
            st.seq.pop();
            st.in_path[v] = false;
        }
        Some(false)
    }
}
