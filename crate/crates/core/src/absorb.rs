//! W-absorbers: l-paths `Q` that can swallow a (k-l)-set `W` and become a
//! longer l-path `Q'` with the same ends.

use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::connect::{greedy_extend, select_disjoint_family, Candidate, LibraryReport, PathConstants};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};
use crate::pattern::{is_ell_path, OrderedTuple};
use crate::random::Rand;

/// Blocks `X_i, Z_i, Y_i` (`i = 1..=k-l`), the tail `T` and the ordered
/// target `W`. Vectors are indexed from zero, so `x[0]` is `X_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorberWitness {
    pub k: usize,
    pub ell: usize,
    pub w: Vec<Vertex>,
    pub x: Vec<Vec<Vertex>>,
    pub z: Vec<Vec<Vertex>>,
    pub y: Vec<Vec<Vertex>>,
    pub t: Vec<Vertex>,
}

impl AbsorberWitness {
    fn m(&self) -> usize {
        self.k - self.ell
    }

    /// `Q = X_1 Z_2 Y_1 X_2 Z_3 Y_2 ... X_m Z_1 Y_m T`.
    pub fn q(&self) -> Vec<Vertex> {
        let m = self.m();
        let mut out = Vec::new();
        for i in 0..m {
            out.extend(&self.x[i]);
            out.extend(&self.z[(i + 1) % m]);
            out.extend(&self.y[i]);
        }
        out.extend(&self.t);
        out
    }

    /// `Q' = X_1 w_1 Z_1 Y_1 ... X_m w_m Z_m Y_m T` for the target `w`.
    pub fn q_prime_with(&self, w: &[Vertex]) -> Vec<Vertex> {
        let mut out = Vec::new();
        for i in 0..self.m() {
            out.extend(&self.x[i]);
            out.push(w[i]);
            out.extend(&self.z[i]);
            out.extend(&self.y[i]);
        }
        out.extend(&self.t);
        out
    }

    pub fn q_prime(&self) -> Vec<Vertex> {
        self.q_prime_with(&self.w)
    }

    /// Checks block sizes and disjointness against the constants.
    pub fn check_shape(&self, consts: &PathConstants) -> Result<()> {
        let m = self.m();
        let bad = |msg: String| Err(Error::CorruptWitness(msg));
        if consts.k != self.k || consts.ell != self.ell {
            return bad(format!("witness is for ({}, {}), constants for ({}, {})", self.k, self.ell, consts.k, consts.ell));
        }
        if self.w.len() != m || self.x.len() != m || self.y.len() != m || self.z.len() != m {
            return bad(format!("expected {m} blocks of each kind"));
        }
        for i in 0..m {
            if self.x[i].len() != self.k - 1 {
                return bad(format!("|X_{}| = {}, expected {}", i + 1, self.x[i].len(), self.k - 1));
            }
            if self.z[i].len() != i {
                return bad(format!("|Z_{}| = {}, expected {i}", i + 1, self.z[i].len()));
            }
            let want = consts.t5 - self.k - i;
            if self.y[i].len() != want {
                return bad(format!("|Y_{}| = {}, expected {want}", i + 1, self.y[i].len()));
            }
        }
        if self.t.len() != self.ell {
            return bad(format!("|T| = {}, expected {}", self.t.len(), self.ell));
        }
        let all = self.q_prime();
        if OrderedTuple::new(all).is_err() {
            return bad("blocks and target are not pairwise disjoint".into());
        }
        Ok(())
    }

    /// Checks that `Q` spans `P_{t5-1}` and `Q'` spans `P_{t5}` in `graph`.
    pub fn verify(&self, graph: &Hypergraph, consts: &PathConstants) -> Result<()> {
        self.check_shape(consts)?;
        if !is_ell_path(graph, &self.q(), self.ell) {
            return Err(Error::CorruptWitness("Q is not an l-path".into()));
        }
        if !is_ell_path(graph, &self.q_prime(), self.ell) {
            return Err(Error::CorruptWitness("Q' is not an l-path".into()));
        }
        Ok(())
    }
}

/// Returns `Q'` for a witness whose shape is intact.
pub fn absorb_insert(w: &AbsorberWitness, consts: &PathConstants) -> Result<OrderedTuple> {
    w.check_shape(consts)?;
    OrderedTuple::new(w.q_prime())
}

/// Knobs for building an absorber library.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorberConfig {
    /// Number of sampled targets `W`.
    pub targets: usize,
    pub candidates_per_target: usize,
    pub budget: usize,
}

impl Default for AbsorberConfig {
    fn default() -> Self {
        AbsorberConfig { targets: 8, candidates_per_target: 48, budget: 4 }
    }
}

/// Pairwise disjoint absorbers and the graph their insertions are checked in.
#[derive(Clone, Debug)]
pub struct AbsorberLibrary {
    consts: PathConstants,
    check: Arc<Hypergraph>,
    members: Vec<AbsorberWitness>,
    used: Vec<bool>,
    pub report: LibraryReport,
}

/// Calls `f` on every permutation of `items` (lexicographic index order).
fn for_each_permutation(items: &[Vertex], mut f: impl FnMut(&[Vertex]) -> bool) {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    let mut buf: Vec<Vertex> = items.to_vec();
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        if f(&buf) {
            return;
        }
        // next permutation
        let Some(i) = (1..idx.len()).rev().find(|&i| idx[i - 1] < idx[i]) else { return };
        let j = (i..idx.len()).rev().find(|&j| idx[j] > idx[i - 1]).unwrap();
        idx.swap(i - 1, j);
        idx[i..].reverse();
    }
}

impl AbsorberLibrary {
    pub fn empty(consts: PathConstants, check: Arc<Hypergraph>) -> Self {
        AbsorberLibrary { consts, check, members: Vec::new(), used: Vec::new(), report: LibraryReport::default() }
    }

    pub fn constants(&self) -> &PathConstants {
        &self.consts
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.check
    }

    pub fn members(&self) -> &[AbsorberWitness] {
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

    /// Keeps only the members whose index satisfies `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(usize) -> bool) {
        let mut members = Vec::new();
        let mut used = Vec::new();
        for (i, (w, u)) in self.members.drain(..).zip(self.used.drain(..)).enumerate() {
            if keep(i) {
                members.push(w);
                used.push(u);
            }
        }
        self.members = members;
        self.used = used;
    }

    /// An ordering of `block` under which unused member `i` absorbs it.
    pub fn absorbs(&self, i: usize, block: &[Vertex]) -> Option<Vec<Vertex>> {
        let a = &self.members[i];
        if self.used[i] || block.len() != self.consts.m() {
            return None;
        }
        let q = a.q();
        if block.iter().any(|v| q.contains(v)) {
            return None;
        }
        let mut found = None;
        for_each_permutation(block, |w| {
            if is_ell_path(&self.check, &a.q_prime_with(w), a.ell) {
                found = Some(w.to_vec());
                true
            } else {
                false
            }
        });
        found
    }

    /// Unused members that can absorb `block`, with the working orderings.
    pub fn absorbers_for(&self, block: &[Vertex]) -> Vec<(usize, Vec<Vertex>)> {
        (0..self.members.len()).filter_map(|i| self.absorbs(i, block).map(|w| (i, w))).collect()
    }

    /// Marks member `i` used and returns `(Q, Q')` for the ordered target `w`.
    pub fn consume(&mut self, i: usize, w: &[Vertex]) -> Result<(Vec<Vertex>, Vec<Vertex>)> {
        if self.used[i] {
            return Err(Error::NoAbsorber(w.to_vec()));
        }
        let a = &self.members[i];
        let q_prime = a.q_prime_with(w);
        if !is_ell_path(&self.check, &q_prime, a.ell) {
            return Err(Error::CorruptWitness(format!("member {i} cannot absorb {w:?}")));
        }
        self.used[i] = true;
        Ok((a.q(), q_prime))
    }

    /// Splices `X` into the cyclic `order` block by block. `X` is split into
    /// (k-l)-sets; blocks are matched to distinct absorbers by augmenting
    /// paths, with a few random re-partitions before giving up.
    pub fn absorb_leftover(&mut self, order: &[Vertex], x: &[Vertex], rng: &mut Rand) -> Result<Vec<Vertex>> {
        let m = self.consts.m();
        if !x.len().is_multiple_of(m) {
            return Err(Error::InvalidParameter(format!("|X| = {} is not a multiple of {m}", x.len())));
        }
        if x.is_empty() {
            return Ok(order.to_vec());
        }
        let mut xs = x.to_vec();
        xs.sort_unstable();
        let mut first_stuck = None;
        for attempt in 0..8 {
            if attempt > 0 {
                xs.shuffle(rng);
            }
            let blocks: Vec<&[Vertex]> = xs.chunks(m).collect();
            let options: Vec<Vec<(usize, Vec<Vertex>)>> = blocks.iter().map(|b| self.absorbers_for(b)).collect();
            match bipartite_match(&options, self.members.len()) {
                Ok(assign) => {
                    let mut cyc = order.to_vec();
                    for (b, &(i, ref w)) in assign.iter().enumerate() {
                        let (q, qp) = self.consume(i, w)?;
                        if !splice(&mut cyc, &q, &qp) {
                            return Err(Error::CorruptWitness(format!(
                                "absorber {i} for block {:?} is not a segment of the cycle",
                                blocks[b]
                            )));
                        }
                    }
                    return Ok(cyc);
                }
                Err(b) => {
                    first_stuck.get_or_insert_with(|| blocks[b].to_vec());
                }
            }
        }
        Err(Error::NoAbsorber(first_stuck.unwrap_or_default()))
    }
}

/// Maximum matching of blocks to members; `Err(b)` names an unmatched block.
fn bipartite_match(options: &[Vec<(usize, Vec<Vertex>)>], members: usize) -> std::result::Result<Vec<(usize, Vec<Vertex>)>, usize> {
    fn augment(b: usize, options: &[Vec<(usize, Vec<Vertex>)>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for (i, _) in &options[b] {
            if seen[*i] {
                continue;
            }
            seen[*i] = true;
            if owner[*i].is_none() || augment(owner[*i].unwrap(), options, owner, seen) {
                owner[*i] = Some(b);
                return true;
            }
        }
        false
    }
    let mut owner: Vec<Option<usize>> = vec![None; members];
    for b in 0..options.len() {
        let mut seen = vec![false; members];
        if !augment(b, options, &mut owner, &mut seen) {
            return Err(b);
        }
    }
    let mut assign: Vec<Option<(usize, Vec<Vertex>)>> = vec![None; options.len()];
    for (i, o) in owner.iter().enumerate() {
        if let Some(b) = *o {
            let w = options[b].iter().find(|(j, _)| *j == i).unwrap().1.clone();
            assign[b] = Some((i, w));
        }
    }
    Ok(assign.into_iter().map(Option::unwrap).collect())
}

/// Replaces the cyclic segment `q` of `order` (in either direction) by `qp`.
pub(crate) fn splice(order: &mut Vec<Vertex>, q: &[Vertex], qp: &[Vertex]) -> bool {
    let n = order.len();
    let Some(start) = order.iter().position(|&v| v == q[0]) else { return false };
    let forward = (0..q.len()).all(|j| order[(start + j) % n] == q[j]);
    let backward = (0..q.len()).all(|j| order[(start + n - j) % n] == q[j]);
    if !forward && !backward {
        return false;
    }
    // rotate so the segment starts at 0 and runs forward
    let mut rot: Vec<Vertex> = if forward {
        (0..n).map(|j| order[(start + j) % n]).collect()
    } else {
        (0..n).map(|j| order[(start + n - j) % n]).collect()
    };
    rot.splice(0..q.len(), qp.iter().copied());
    *order = rot;
    true
}

/// Builds one candidate absorber for the ordered target `w`: paths `Q_i` in
/// `graph` with `w_i` as their k-th vertex, cut into blocks.
pub(crate) fn sample_absorber(
    graph: &Hypergraph,
    w: &[Vertex],
    blocked: &[bool],
    consts: &PathConstants,
    rng: &mut Rand,
) -> Option<AbsorberWitness> {
    let (k, ell) = (consts.k, consts.ell);
    let m = consts.m();
    let mut forbidden = blocked.to_vec();
    for &v in w {
        forbidden[v] = true;
    }
    let mut paths = Vec::with_capacity(m);
    for &wi in w {
        let firsts: Vec<&[Vertex]> = graph
            .incident(wi)
            .iter()
            .map(|&id| graph.edge(id as usize))
            .filter(|e| e.iter().all(|&v| v == wi || !forbidden[v]))
            .collect();
        let first = firsts.choose(rng)?;
        let mut xs: Vec<Vertex> = first.iter().copied().filter(|&v| v != wi).collect();
        xs.shuffle(rng);
        let mut start: Vec<Vertex> = xs.clone();
        start.push(wi);
        for &v in &xs {
            forbidden[v] = true;
        }
        let end = &start[k - ell..];
        let ext = greedy_extend(graph, end, consts.t4 - 1, &forbidden, rng).ok()?;
        let mut q = start.clone();
        q.extend_from_slice(&ext[ell..]);
        for &v in &q {
            forbidden[v] = true;
        }
        debug_assert_eq!(q.len(), consts.t5 + ell);
        paths.push(q);
    }
    let mut x = Vec::with_capacity(m);
    let mut z = Vec::with_capacity(m);
    let mut y = Vec::with_capacity(m);
    for (i, q) in paths.iter().enumerate() {
        // q = v_1 .. v_{t5 + l}; w_i = v_k
        x.push(q[..k - 1].to_vec());
        z.push(q[k..k + i].to_vec());
        y.push(q[k + i..consts.t5].to_vec());
    }
    let t = paths[m - 1][consts.t5..].to_vec();
    Some(AbsorberWitness { k, ell, w: w.to_vec(), x, z, y, t })
}

/// Builds a library of pairwise disjoint absorbers avoiding `excluded`.
///
/// Targets are random (k-l)-subsets of `targets_from`. For each target the
/// paths `Q_i` are grown in `graph` and the candidate is accepted when `Q`
/// is an l-path of `check` (its `Q'` then lies in `graph`).
pub fn build_absorber_library(
    graph: &Hypergraph,
    check: Arc<Hypergraph>,
    targets_from: &[Vertex],
    excluded: &[bool],
    consts: PathConstants,
    cfg: &AbsorberConfig,
    rng: &mut Rand,
) -> AbsorberLibrary {
    let m = consts.m();
    let mut lib = AbsorberLibrary::empty(consts, check);
    let pool: Vec<Vertex> = targets_from.iter().copied().filter(|&v| !excluded[v]).collect();
    let mut targets: Vec<Vec<Vertex>> = Vec::new();
    if pool.len() >= m {
        for _ in 0..cfg.targets {
            targets.push(pool.choose_multiple(rng, m).copied().collect());
        }
    }
    let mut blocked = excluded.to_vec();
    let mut served = vec![0usize; targets.len()];
    let (mut tested, mut accepted) = (0, 0);
    // later rounds regrow candidates around the members already chosen
    for _round in 0..4 {
        if lib.members.len() >= cfg.budget || targets.is_empty() {
            break;
        }
        let mut candidates = Vec::new();
        let mut witnesses = Vec::new();
        // candidates keep clear of every target so that none is cut off
        let mut avoid = blocked.clone();
        for v in targets.iter().flatten() {
            avoid[*v] = true;
        }
        let open: Vec<usize> = if served.contains(&0) {
            (0..targets.len()).filter(|&d| served[d] == 0).collect()
        } else {
            (0..targets.len()).collect()
        };
        for &d in &open {
            let w = &targets[d];
            if w.iter().any(|&v| blocked[v]) {
                continue;
            }
            for _ in 0..cfg.candidates_per_target {
                let Some(a) = sample_absorber(graph, w, &avoid, &consts, rng) else { continue };
                tested += 1;
                let q = a.q();
                if is_ell_path(&lib.check, &q, consts.ell) && is_ell_path(&lib.check, &a.q_prime(), consts.ell) {
                    candidates.push(Candidate { tuple: q, demands: vec![d] });
                    witnesses.push(a);
                }
            }
        }
        accepted += candidates.len();
        let room = cfg.budget - lib.members.len();
        for i in select_disjoint_family(&candidates, targets.len(), 1, room, rng) {
            served[candidates[i].demands[0]] += 1;
            for &v in &candidates[i].tuple {
                blocked[v] = true;
            }
            lib.members.push(witnesses[i].clone());
            lib.used.push(false);
        }
    }
    lib.report = LibraryReport {
        demands: targets.len(),
        candidates_tested: tested,
        candidates_accepted: accepted,
        members: lib.members.len(),
        shortfalls: (0..targets.len())
            .filter(|&d| served[d] == 0)
            .map(|d| (targets[d].clone(), Vec::new()))
            .collect(),
    };
    lib
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connect::path_constants;
    use crate::random::rng_from_seed;

    fn toy(k: usize, ell: usize) -> (AbsorberWitness, PathConstants) {
        let c = path_constants(k, ell).unwrap();
        let m = k - ell;
        let mut next = 100;
        let mut take = |s: usize| {
            let v: Vec<usize> = (next..next + s).collect();
            next += s;
            v
        };
        let w = take(m);
        let x = (0..m).map(|_| take(k - 1)).collect();
        let z = (0..m).map(&mut take).collect();
        let y = (0..m).map(|i| take(c.t5 - k - i)).collect();
        let t = take(ell);
        (AbsorberWitness { k, ell, w, x, z, y, t }, c)
    }

    #[test]
    fn block_arithmetic() {
        let (a, c) = toy(3, 1);
        let sizes: Vec<usize> = vec![a.x[0].len(), a.z[1].len(), a.y[0].len(), a.x[1].len(), a.z[0].len(), a.y[1].len(), a.t.len()];
        assert_eq!(sizes, vec![2, 1, 3, 2, 0, 2, 1]);
        assert_eq!(a.q().len(), 11);
        assert_eq!(a.q().len(), c.absorber_len());
        assert_eq!(a.q_prime().len(), 13);
        let (b, c2) = toy(3, 2);
        assert_eq!(b.q_prime().len() - b.q().len(), 1);
        assert_eq!(&b.q()[..2], &b.q_prime()[..2]);
        assert_eq!(b.q()[b.q().len() - 2..], b.q_prime()[b.q_prime().len() - 2..]);
        assert!(absorb_insert(&b, &c2).is_ok());
    }

    #[test]
    fn corrupt_shapes() {
        let (mut a, c) = toy(3, 1);
        a.y[0].pop();
        assert!(matches!(absorb_insert(&a, &c), Err(Error::CorruptWitness(_))));
        let (mut b, c) = toy(3, 1);
        b.t[0] = b.x[0][0];
        assert!(matches!(absorb_insert(&b, &c), Err(Error::CorruptWitness(_))));
    }

    #[test]
    fn permutations() {
        let mut seen = Vec::new();
        for_each_permutation(&[1, 2, 3], |p| {
            seen.push(p.to_vec());
            false
        });
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![1, 2, 3]);
        assert_eq!(seen[5], vec![3, 2, 1]);
    }

    #[test]
    fn splice_both_directions() {
        let mut o = vec![0, 1, 2, 3, 4, 5];
        assert!(splice(&mut o, &[4, 5, 0], &[4, 9, 5, 0]));
        assert_eq!(o, vec![4, 9, 5, 0, 1, 2, 3]);
        let mut o = vec![0, 1, 2, 3, 4, 5];
        assert!(splice(&mut o, &[1, 0, 5], &[1, 0, 8, 5]));
        assert_eq!(o, vec![1, 0, 8, 5, 4, 3, 2]);
        assert!(!splice(&mut o, &[1, 2, 9], &[]));
    }

    #[test]
    fn complete_graph_library() {
        for (k, ell) in [(3, 1), (3, 2), (4, 2)] {
            let h = Arc::new(Hypergraph::complete(k, 40).unwrap());
            let c = path_constants(k, ell).unwrap();
            let mut rng = rng_from_seed(k as u64 * 10 + ell as u64);
            let vs: Vec<usize> = (0..40).collect();
            let cfg = AbsorberConfig { targets: 3, candidates_per_target: 4, budget: 2 };
            let lib = build_absorber_library(&h, h.clone(), &vs, &[false; 40], c, &cfg, &mut rng);
            assert_eq!(lib.len(), 2);
            assert!(lib.report.shortfalls.len() <= 1);
            for a in lib.members() {
                a.verify(&h, &c).unwrap();
            }
        }
    }
}
