//! Path constants, greedy l-path extension, connectors and connector
//! libraries, and the disjoint-family selection shared with absorbers.

use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, SetFamily, Vertex};
use crate::pattern::is_ell_path;
use crate::random::Rand;
use crate::search::{Found, PathSearch, Pool, Slot};

/// The integer constants that fix connector and absorber sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathConstants {
    pub k: usize,
    pub ell: usize,
    pub t1: usize,
    pub t2: usize,
    pub t3: usize,
    pub t4: usize,
    pub t5: usize,
    pub t6: usize,
}

pub fn path_constants(k: usize, ell: usize) -> Result<PathConstants> {
    if ell == 0 || ell >= k {
        return Err(Error::InvalidParameter(format!("need 1 <= ell < k, got k={k}, ell={ell}")));
    }
    let m = k - ell;
    let t1 = ell.div_ceil(m);
    let t4 = (3 * k - ell - 2).div_ceil(m);
    Ok(PathConstants {
        k,
        ell,
        t1,
        t2: t1 * m - ell,
        t3: 3 * t1 * m - ell,
        t4,
        t5: t4 * m,
        t6: (k - 1) / m + 1,
    })
}

impl PathConstants {
    pub fn m(&self) -> usize {
        self.k - self.ell
    }

    /// Vertex count of an absorber path `Q` (a copy of `P_{t5 - 1}`).
    pub fn absorber_len(&self) -> usize {
        (self.t5 - 1) * self.m() + self.ell
    }
}

/// Orders a new block so that, when possible, the resulting end can be
/// extended again (positive degree in `graph`).
fn order_block(graph: &Hypergraph, tail: &[Vertex], block: &mut [Vertex], ell: usize, rng: &mut Rand) {
    block.shuffle(rng);
    let m = block.len();
    if m == 1 {
        return;
    }
    let mut end = Vec::with_capacity(ell);
    // try a few orders; the block rarely needs more than a couple of tries
    for _ in 0..m * m {
        end.clear();
        if ell > m {
            end.extend_from_slice(&tail[tail.len() - (ell - m)..]);
            end.extend_from_slice(block);
        } else {
            end.extend_from_slice(&block[m - ell..]);
        }
        if graph.has_superset_edge(&end) {
            return;
        }
        block.shuffle(rng);
    }
}

/// Extends the l-set `start` by `steps` edges in `graph`. Each step picks a
/// uniformly random neighbour (k-l)-set of the current end that avoids the
/// path and `forbidden`. Returns the whole path including `start`.
pub fn greedy_extend(
    graph: &Hypergraph,
    start: &[Vertex],
    steps: usize,
    forbidden: &[bool],
    rng: &mut Rand,
) -> Result<Vec<Vertex>> {
    let k = graph.k();
    let ell = start.len();
    if ell == 0 || ell >= k {
        return Err(Error::InvalidArity { expected: format!("1..={}", k - 1), got: ell });
    }
    let m = k - ell;
    let mut path = start.to_vec();
    let mut in_path = vec![false; graph.n()];
    for &v in start {
        in_path[v] = true;
    }
    for step in 0..steps {
        let end: Vec<Vertex> = path[path.len() - ell..].to_vec();
        let mut chosen: Option<Vec<Vertex>> = None;
        let mut seen = 0u32;
        for id in graph.edges_containing(&end) {
            let e = graph.edge(id);
            let ok = e.iter().all(|&v| end.contains(&v) || (!in_path[v] && !forbidden[v]));
            if !ok {
                continue;
            }
            seen += 1;
            if rng.random_range(0..seen) == 0 {
                chosen = Some(e.iter().copied().filter(|v| !end.contains(v)).collect());
            }
        }
        let Some(mut block) = chosen else {
            return Err(Error::ExtensionFailure { step, end });
        };
        debug_assert_eq!(block.len(), m);
        if step + 1 < steps {
            order_block(graph, &path, &mut block, ell, rng);
        } else {
            block.shuffle(rng);
        }
        for &v in &block {
            in_path[v] = true;
        }
        path.extend_from_slice(&block);
    }
    Ok(path)
}

/// Whether the ordered `t3`-set `c` connects the ordered l-sets `a` and `b`
/// in `graph`, i.e. `a c b` spans an l-path of length `3 t1`.
pub fn connects(graph: &Hypergraph, a: &[Vertex], b: &[Vertex], c: &[Vertex], consts: &PathConstants) -> Result<bool> {
    if a.len() != consts.ell || b.len() != consts.ell {
        return Err(Error::InvalidArity { expected: consts.ell.to_string(), got: a.len().max(b.len()) });
    }
    if c.len() != consts.t3 {
        return Err(Error::InvalidArity { expected: consts.t3.to_string(), got: c.len() });
    }
    let mut seen = vec![false; graph.n()];
    for &v in a.iter().chain(c).chain(b) {
        if v >= graph.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: graph.n() });
        }
        if seen[v] {
            return Err(Error::RepeatedVertex(v));
        }
        seen[v] = true;
    }
    let seq: Vec<Vertex> = a.iter().chain(c).chain(b).copied().collect();
    Ok(is_ell_path(graph, &seq, consts.ell))
}

/// An ordered `t3`-set together with the end pair it was built for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connector {
    pub body: Vec<Vertex>,
    pub from: Vec<Vertex>,
    pub to: Vec<Vertex>,
}

/// Per-demand outcome of a library build.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LibraryReport {
    pub demands: usize,
    pub candidates_tested: usize,
    pub candidates_accepted: usize,
    pub members: usize,
    /// Demands served by fewer members than requested.
    pub shortfalls: Vec<(Vec<Vertex>, Vec<Vertex>)>,
}

/// Knobs for building a connector library.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectorConfig {
    pub candidates_per_demand: usize,
    pub multiplicity: usize,
    pub budget: usize,
    /// Random end pairs from `L` added to the explicit demands.
    pub audit_pairs: usize,
    /// Keep adding random pairs from `L` until the budget is filled.
    pub fill: bool,
}

impl Default for ConnectorConfig {
    fn default() -> Self {
        ConnectorConfig { candidates_per_demand: 48, multiplicity: 1, budget: 8, audit_pairs: 2, fill: true }
    }
}

/// Pairwise disjoint connectors plus the union graph they are checked in.
#[derive(Clone, Debug)]
pub struct ConnectorLibrary {
    consts: PathConstants,
    check: Arc<Hypergraph>,
    members: Vec<Connector>,
    used: Vec<bool>,
    pub report: LibraryReport,
}

impl ConnectorLibrary {
    pub fn empty(consts: PathConstants, check: Arc<Hypergraph>) -> Self {
        ConnectorLibrary { consts, check, members: Vec::new(), used: Vec::new(), report: LibraryReport::default() }
    }

    pub fn constants(&self) -> &PathConstants {
        &self.consts
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.check
    }

    pub fn members(&self) -> &[Connector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_used(&self, i: usize) -> bool {
        self.used[i]
    }

    /// Unused members that connect `a` to `b`.
    pub fn usable(&self, a: &[Vertex], b: &[Vertex]) -> Vec<usize> {
        (0..self.members.len())
            .filter(|&i| !self.used[i])
            .filter(|&i| {
                let body = &self.members[i].body;
                !body.iter().any(|v| a.contains(v) || b.contains(v))
                    && connects(&self.check, a, b, body, &self.consts).unwrap_or(false)
            })
            .collect()
    }

    /// Marks member `i` used and returns its body.
    pub fn take(&mut self, i: usize) -> Vec<Vertex> {
        assert!(!self.used[i], "connector {i} already used");
        self.used[i] = true;
        self.members[i].body.clone()
    }

    /// Marks member `i` used without returning it (its vertices were
    /// recycled elsewhere).
    pub fn retire(&mut self, i: usize) {
        self.used[i] = true;
    }

    /// Vertices of all members.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.members.iter().flat_map(|c| c.body.iter().copied())
    }

    /// Vertices of unused members.
    pub fn unused_vertices(&self) -> Vec<Vertex> {
        (0..self.members.len())
            .filter(|&i| !self.used[i])
            .flat_map(|i| self.members[i].body.iter().copied())
            .collect()
    }
}

/// One candidate for [`select_disjoint_family`]: an ordered tuple and the
/// demands it serves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub tuple: Vec<Vertex>,
    pub demands: Vec<usize>,
}

/// Greedy disjoint selection. Candidates are put in canonical order and
/// shuffled with `rng`; demands are then served round-robin until each has
/// `multiplicity` members, after which any remaining disjoint candidate is
/// added. The result never exceeds `budget` members and, below the budget,
/// is maximal. Returns indices into `candidates`.
pub fn select_disjoint_family(
    candidates: &[Candidate],
    demand_count: usize,
    multiplicity: usize,
    budget: usize,
    rng: &mut Rand,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].tuple.cmp(&candidates[b].tuple).then(a.cmp(&b)));
    order.dedup_by(|a, b| candidates[*a].tuple == candidates[*b].tuple);
    order.shuffle(rng);

    let n = candidates.iter().flat_map(|c| c.tuple.iter()).copied().max().map_or(0, |v| v + 1);
    let mut taken = vec![false; n];
    let mut chosen = vec![false; candidates.len()];
    let mut selected = Vec::new();
    let mut served = vec![0usize; demand_count];

    let mut by_demand: Vec<Vec<usize>> = vec![Vec::new(); demand_count];
    for &i in &order {
        for &d in &candidates[i].demands {
            by_demand[d].push(i);
        }
    }
    let mut cursor = vec![0usize; demand_count];

    let fits = |i: usize, taken: &[bool]| candidates[i].tuple.iter().all(|&v| !taken[v]);
    let mut progress = true;
    while progress && selected.len() < budget {
        progress = false;
        for d in 0..demand_count {
            if served[d] >= multiplicity || selected.len() >= budget {
                continue;
            }
            while cursor[d] < by_demand[d].len() {
                let i = by_demand[d][cursor[d]];
                cursor[d] += 1;
                if !chosen[i] && fits(i, &taken) {
                    chosen[i] = true;
                    for &v in &candidates[i].tuple {
                        taken[v] = true;
                    }
                    for &e in &candidates[i].demands {
                        served[e] += 1;
                    }
                    selected.push(i);
                    progress = true;
                    break;
                }
            }
        }
    }
    for &i in &order {
        if selected.len() >= budget {
            break;
        }
        if !chosen[i] && fits(i, &taken) {
            chosen[i] = true;
            for &v in &candidates[i].tuple {
                taken[v] = true;
            }
            selected.push(i);
        }
    }
    selected
}

/// Draws a random ordered pair of disjoint l-sets from `l` (random
/// orientation of each set), avoiding `blocked`.
pub(crate) fn random_pair(l: &[&[Vertex]], blocked: &[bool], rng: &mut Rand) -> Option<(Vec<Vertex>, Vec<Vertex>)> {
    for _ in 0..64 {
        let a = l.choose(rng)?;
        let b = l.choose(rng)?;
        if a.iter().any(|v| b.contains(v) || blocked[*v]) || b.iter().any(|v| blocked[*v]) {
            continue;
        }
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.shuffle(rng);
        b.shuffle(rng);
        return Some((a, b));
    }
    None
}

/// Samples one candidate connector body for the pair `(a, b)` following the
/// extend-extend-pad recipe; `None` if an extension gets stuck.
pub(crate) fn sample_connector(
    greedy: &Hypergraph,
    a: &[Vertex],
    b: &[Vertex],
    excluded: &[bool],
    consts: &PathConstants,
    rng: &mut Rand,
) -> Option<Vec<Vertex>> {
    let ell = consts.ell;
    let mut forbidden = excluded.to_vec();
    for &v in b {
        forbidden[v] = true;
    }
    let fwd = greedy_extend(greedy, a, consts.t1, &forbidden, rng).ok()?;
    for &v in fwd.iter() {
        forbidden[v] = true;
    }
    let rb: Vec<Vertex> = b.iter().rev().copied().collect();
    for &v in b {
        forbidden[v] = false;
    }
    let bwd = greedy_extend(greedy, &rb, consts.t1, &forbidden, rng).ok()?;
    for &v in bwd.iter() {
        forbidden[v] = true;
    }
    let free: Vec<Vertex> = (0..greedy.n()).filter(|&v| !forbidden[v]).collect();
    if free.len() < consts.t2 {
        return None;
    }
    let pads: Vec<Vertex> = free.choose_multiple(rng, consts.t2).copied().collect();
    let mut body = fwd[ell..].to_vec();
    body.extend(pads);
    body.extend(bwd[ell..].iter().rev());
    Some(body)
}

/// Builds a library of pairwise disjoint connectors avoiding `excluded`.
///
/// Candidates are grown by greedy extension in `greedy`, or in `check`
/// when that gets stuck, and accepted when they connect their pair in
/// `check`. Demands are the explicit `demands`
/// plus random pairs from `l`.
pub fn build_connector_library(
    greedy: &Hypergraph,
    check: Arc<Hypergraph>,
    l: &SetFamily,
    excluded: &[bool],
    demands: &[(Vec<Vertex>, Vec<Vertex>)],
    consts: PathConstants,
    cfg: &ConnectorConfig,
    rng: &mut Rand,
) -> ConnectorLibrary {
    let mut lib = ConnectorLibrary::empty(consts, check);
    let l_sets: Vec<&[Vertex]> = l.iter().filter(|s| s.iter().all(|&v| !excluded[v])).collect();
    let mut pairs: Vec<(Vec<Vertex>, Vec<Vertex>)> = demands.to_vec();
    for _ in 0..cfg.audit_pairs {
        if let Some(p) = random_pair(&l_sets, excluded, rng) {
            pairs.push(p);
        }
    }

    let mut blocked = excluded.to_vec();
    let mut served = vec![0usize; pairs.len()];
    let (mut tested, mut accepted) = (0, 0);
    let mut chosen: Vec<(Vec<Vertex>, usize)> = Vec::new();
    let mut sample = |d: usize, blocked: &[bool], rng: &mut Rand, out: &mut Vec<Candidate>, pairs: &[(Vec<Vertex>, Vec<Vertex>)]| {
        let (a, b) = &pairs[d];
        for _ in 0..cfg.candidates_per_demand {
            // ends that cannot be extended in `greedy` may still extend in `check`
            let body = sample_connector(greedy, a, b, blocked, &consts, rng)
                .or_else(|| sample_connector(&lib.check, a, b, blocked, &consts, rng));
            let Some(body) = body else { continue };
            tested += 1;
            if connects(&lib.check, a, b, &body, &consts).unwrap_or(false) {
                accepted += 1;
                out.push(Candidate { tuple: body, demands: vec![d] });
            }
        }
    };

    // later rounds regrow candidates around the members already chosen
    for _round in 0..4 {
        let open: Vec<usize> = (0..pairs.len()).filter(|&d| served[d] < cfg.multiplicity).collect();
        if open.is_empty() || chosen.len() >= cfg.budget {
            break;
        }
        // bodies keep clear of every demanded end so that no pair is cut off
        let mut avoid = blocked.clone();
        for v in pairs.iter().flat_map(|(a, b)| a.iter().chain(b)) {
            avoid[*v] = true;
        }
        let mut candidates = Vec::new();
        for &d in &open {
            sample(d, &avoid, rng, &mut candidates, &pairs);
        }
        let room = cfg.budget - chosen.len();
        for i in select_disjoint_family(&candidates, pairs.len(), cfg.multiplicity, room, rng) {
            let d = candidates[i].demands[0];
            served[d] += 1;
            for &v in &candidates[i].tuple {
                blocked[v] = true;
            }
            chosen.push((candidates[i].tuple.clone(), d));
        }
    }
    let shortfalls: Vec<(Vec<Vertex>, Vec<Vertex>)> = (0..pairs.len())
        .filter(|&d| served[d] < cfg.multiplicity)
        .map(|d| pairs[d].clone())
        .collect();

    // fill the budget with connectors for further random pairs
    if cfg.fill && !l_sets.is_empty() {
        let mut attempts = 0;
        while chosen.len() < cfg.budget && attempts < 4 * cfg.budget {
            attempts += 1;
            let Some(pair) = random_pair(&l_sets, &blocked, rng) else { break };
            pairs.push(pair);
            let d = pairs.len() - 1;
            let mut candidates = Vec::new();
            sample(d, &blocked, rng, &mut candidates, &pairs);
            if let Some(c) = candidates.into_iter().next() {
                for &v in &c.tuple {
                    blocked[v] = true;
                }
                chosen.push((c.tuple, d));
            }
        }
    }

    lib.report = LibraryReport {
        demands: pairs.len(),
        candidates_tested: tested,
        candidates_accepted: accepted,
        members: chosen.len(),
        shortfalls,
    };
    for (body, d) in chosen {
        lib.members.push(Connector { body, from: pairs[d].0.clone(), to: pairs[d].1.clone() });
        lib.used.push(false);
    }
    lib
}

/// Searches `graph` for an ordered set `c` of `len` vertices from `pool`
/// such that `a c b` is an l-path. `len` must be congruent to `-l` modulo
/// `k - l`.
pub(crate) fn bridge(
    graph: &Hypergraph,
    a: &[Vertex],
    b: &[Vertex],
    len: usize,
    pool: &Pool,
    node_limit: u64,
    rng: &mut Rand,
) -> Option<Vec<Vertex>> {
    let ell = a.len();
    let mut slots: Vec<Slot> = a.iter().map(|&v| Slot::Fixed(v)).collect();
    slots.extend(std::iter::repeat_n(Slot::Pool(0), len));
    slots.extend(b.iter().map(|&v| Slot::Fixed(v)));
    debug_assert_eq!((slots.len() - ell) % (graph.k() - ell), 0);
    match PathSearch::new(graph, ell, slots, vec![pool]).node_limit(node_limit).run(rng) {
        Found::Yes(seq) => Some(seq[ell..ell + len].to_vec()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_from_seed;

    #[test]
    fn constants_table() {
        let c = path_constants(3, 2).unwrap();
        assert_eq!((c.t1, c.t2, c.t3, c.t4, c.t5, c.t6), (2, 0, 4, 5, 5, 3));
        let c = path_constants(3, 1).unwrap();
        assert_eq!((c.t1, c.t2, c.t3, c.t4, c.t5, c.t6), (1, 1, 5, 3, 6, 2));
        let c = path_constants(4, 2).unwrap();
        assert_eq!((c.t1, c.t2, c.t3, c.t4, c.t5, c.t6), (1, 0, 4, 4, 8, 2));
        assert!(path_constants(3, 3).is_err());
        for k in 2..=8 {
            for ell in 1..k {
                let c = path_constants(k, ell).unwrap();
                assert!(3 * k - ell - 2 <= c.t5 && c.t5 <= 4 * k);
                assert_eq!(c.t3, 2 * c.t1 * (k - ell) + c.t2);
            }
        }
    }

    #[test]
    fn greedy_in_complete_graph() {
        let h = Hypergraph::complete(3, 20).unwrap();
        let mut rng = rng_from_seed(5);
        let p = greedy_extend(&h, &[0, 1], 2, &[false; 20], &mut rng).unwrap();
        assert_eq!(p.len(), 4);
        assert!(is_ell_path(&h, &p, 2));
    }

    #[test]
    fn greedy_failures_and_forced_paths() {
        let e = Hypergraph::empty(3, 6).unwrap();
        let mut rng = rng_from_seed(6);
        assert_eq!(
            greedy_extend(&e, &[0, 1], 1, &[false; 6], &mut rng),
            Err(Error::ExtensionFailure { step: 0, end: vec![0, 1] })
        );
        let h = Hypergraph::new(3, 6, [[0, 1, 2], [1, 2, 3], [2, 3, 4]]).unwrap();
        assert_eq!(greedy_extend(&h, &[0, 1], 3, &[false; 6], &mut rng).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn connects_in_complete_graph() {
        let h = Hypergraph::complete(3, 10).unwrap();
        let c = path_constants(3, 2).unwrap();
        assert!(connects(&h, &[0, 1], &[8, 9], &[2, 3, 4, 5], &c).unwrap());
        let cut = h.filter_edges(|e| e != [3, 4, 5]);
        assert!(!connects(&cut, &[0, 1], &[8, 9], &[2, 3, 4, 5], &c).unwrap());
        assert!(connects(&h, &[0, 1], &[8, 9], &[2, 3, 4], &c).is_err());
        assert!(connects(&h, &[0, 1], &[8, 9], &[2, 3, 4, 9], &c).is_err());
    }

    #[test]
    fn selection_resolves_conflicts() {
        let cands = vec![
            Candidate { tuple: vec![0, 1], demands: vec![0] },
            Candidate { tuple: vec![1, 2], demands: vec![1] },
        ];
        let mut rng = rng_from_seed(1);
        let s = select_disjoint_family(&cands, 2, 1, 10, &mut rng);
        assert_eq!(s.len(), 1);
        let disjoint = vec![
            Candidate { tuple: vec![0, 1], demands: vec![0] },
            Candidate { tuple: vec![2, 3], demands: vec![0] },
            Candidate { tuple: vec![4, 5], demands: vec![0] },
        ];
        assert_eq!(select_disjoint_family(&disjoint, 1, 1, 10, &mut rng).len(), 3);
        assert_eq!(select_disjoint_family(&disjoint, 1, 1, 2, &mut rng).len(), 2);
    }

    #[test]
    fn library_in_complete_graph() {
        let h = Arc::new(Hypergraph::complete(3, 40).unwrap());
        let consts = path_constants(3, 2).unwrap();
        let l = h.shadow_family(2).unwrap();
        let mut rng = rng_from_seed(2);
        let demands = vec![(vec![0, 1], vec![2, 3])];
        let cfg = ConnectorConfig { budget: 5, ..Default::default() };
        let lib = build_connector_library(&h, h.clone(), &l, &[false; 40], &demands, consts, &cfg, &mut rng);
        assert_eq!(lib.len(), 5);
        assert!(lib.report.shortfalls.is_empty());
        let mut seen = [false; 40];
        for c in lib.members() {
            assert_eq!(c.body.len(), consts.t3);
            assert!(connects(&h, &c.from, &c.to, &c.body, &consts).unwrap());
            for &v in &c.body {
                assert!(!seen[v]);
                seen[v] = true;
            }
        }
        assert!(!lib.usable(&[0, 1], &[2, 3]).is_empty() || lib.members().iter().all(|c| c.body.iter().any(|v| [0, 1, 2, 3].contains(v))));
    }

    #[test]
    fn empty_shadow_gives_empty_library() {
        let h = Arc::new(Hypergraph::empty(3, 12).unwrap());
        let consts = path_constants(3, 2).unwrap();
        let l = h.shadow_family(2).unwrap();
        let mut rng = rng_from_seed(3);
        let lib = build_connector_library(&h, h.clone(), &l, &[false; 12], &[], consts, &ConnectorConfig::default(), &mut rng);
        assert!(lib.is_empty());
        assert!(lib.report.shortfalls.is_empty());
    }

    #[test]
    fn bridge_through_pool() {
        let h = Hypergraph::complete(3, 12).unwrap();
        let pool = Pool::new(12, 4..9);
        let mut rng = rng_from_seed(4);
        let c = bridge(&h, &[0, 1], &[2, 3], 5, &pool, 10_000, &mut rng).unwrap();
        let mut s = c.clone();
        s.sort();
        assert_eq!(s, vec![4, 5, 6, 7, 8]);
    }
}
