//! Shaving: repeatedly delete every edge through an l-set of positive degree
//! below a threshold until each l-set has degree 0 or at least the threshold.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{for_each_subset, set_key, Hypergraph, Vertex};
use crate::random::rng_from_seed;

/// Processing order of the low l-set worklist. The final edge set does not
/// depend on it; the variants exist so that this can be tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ShaveOrder {
    #[default]
    Fifo,
    Lifo,
    /// Initial worklist shuffled, then processed in random positions.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShaveResult {
    #[serde(skip)]
    pub shaved: Hypergraph,
    /// l-sets whose stars were deleted, in processing order.
    pub zeroed_sets: Vec<Vec<Vertex>>,
    /// Vertices whose degree in `shaved` is below `vertex_bound`.
    pub low_vertices: Vec<Vertex>,
    pub threshold: usize,
    pub vertex_bound: usize,
    pub edges_before: usize,
    pub edges_after: usize,
}

impl ShaveResult {
    pub fn edges_removed(&self) -> usize {
        self.edges_before - self.edges_after
    }
}

/// Configurable shaving run.
#[derive(Clone, Copy, Debug)]
pub struct Shaver {
    pub ell: usize,
    pub threshold: usize,
    pub vertex_bound: usize,
    pub order: ShaveOrder,
}

impl Shaver {
    pub fn new(ell: usize, threshold: usize) -> Self {
        Shaver { ell, threshold, vertex_bound: 0, order: ShaveOrder::Fifo }
    }

    pub fn vertex_bound(mut self, bound: usize) -> Self {
        self.vertex_bound = bound;
        self
    }

    pub fn order(mut self, order: ShaveOrder) -> Self {
        self.order = order;
        self
    }

    pub fn run(&self, h: &Hypergraph) -> Result<ShaveResult> {
        let (k, ell, theta) = (h.k(), self.ell, self.threshold);
        if ell == 0 || ell >= k {
            return Err(Error::InvalidArity { expected: format!("1..={}", k - 1), got: ell });
        }
        if theta == 0 {
            return Err(Error::InvalidParameter("shaving threshold must be at least 1".into()));
        }

        // l-sets in first-seen order over the (sorted) edge list
        let mut ids: FxHashMap<u128, u32> = FxHashMap::default();
        let mut sets: Vec<Vec<Vertex>> = Vec::new();
        let mut star: Vec<Vec<u32>> = Vec::new();
        let mut edge_sets: Vec<u32> = Vec::new();
        for (eid, e) in h.edges().enumerate() {
            for_each_subset(e, ell, |s| {
                let id = *ids.entry(set_key(s)).or_insert_with(|| {
                    sets.push(s.to_vec());
                    star.push(Vec::new());
                    (sets.len() - 1) as u32
                });
                star[id as usize].push(eid as u32);
                edge_sets.push(id);
            });
        }
        let per_edge = edge_sets.len() / h.edge_count().max(1);
        let mut count: Vec<usize> = star.iter().map(Vec::len).collect();
        let mut alive = vec![true; h.edge_count()];

        let mut work: VecDeque<u32> =
            (0..sets.len() as u32).filter(|&s| count[s as usize] < theta).collect();
        let mut rng = match self.order {
            ShaveOrder::Random(seed) => {
                work.make_contiguous().shuffle(&mut rng_from_seed(seed));
                Some(rng_from_seed(seed ^ 0xA5A5))
            }
            _ => None,
        };

        let mut zeroed = Vec::new();
        loop {
            let next = match (self.order, rng.as_mut()) {
                (ShaveOrder::Lifo, _) => work.pop_back(),
                (ShaveOrder::Random(_), Some(r)) if !work.is_empty() => {
                    let i = rand::Rng::random_range(r, 0..work.len());
                    work.swap_remove_back(i)
                }
                _ => work.pop_front(),
            };
            let Some(s) = next else { break };
            let c = count[s as usize];
            if c == 0 || c >= theta {
                continue;
            }
            zeroed.push(sets[s as usize].clone());
            for i in 0..star[s as usize].len() {
                let eid = star[s as usize][i] as usize;
                if !alive[eid] {
                    continue;
                }
                alive[eid] = false;
                for &t in &edge_sets[eid * per_edge..(eid + 1) * per_edge] {
                    count[t as usize] -= 1;
                    let ct = count[t as usize];
                    if ct + 1 == theta && ct > 0 && t != s {
                        work.push_back(t);
                    }
                }
            }
        }

        let mut id = 0;
        let shaved = h.filter_edges(|_| {
            id += 1;
            alive[id - 1]
        });
        let (low, _) = classify_vertices(&shaved, self.vertex_bound);
        Ok(ShaveResult {
            edges_before: h.edge_count(),
            edges_after: shaved.edge_count(),
            shaved,
            zeroed_sets: zeroed,
            low_vertices: low,
            threshold: theta,
            vertex_bound: self.vertex_bound,
        })
    }
}

/// Shaves `h` at threshold `theta` with the default processing order.
pub fn shave(h: &Hypergraph, ell: usize, theta: usize) -> Result<ShaveResult> {
    Shaver::new(ell, theta).run(h)
}

/// Splits the vertices into `(V0, V*)`: below `bound` and the rest.
pub fn classify_vertices(h: &Hypergraph, bound: usize) -> (Vec<Vertex>, Vec<Vertex>) {
    (0..h.n()).partition(|&v| h.vertex_degree(v) < bound)
}
