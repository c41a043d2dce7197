//! Immutable k-uniform hypergraphs over the dense vertex range `0..n`.
//!
//! Edges are stored flat in canonical (ascending) form, sorted
//! lexicographically, with a hash index for membership and a per-vertex
//! incidence list for degree and neighbourhood queries.

use std::collections::BTreeSet;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Largest supported uniformity; vertex sets of this size pack into a `u128`.
pub const MAX_K: usize = 8;
/// Largest supported vertex count.
pub const MAX_N: usize = 65_535;

/// Packs a sorted vertex set of size at most [`MAX_K`] into a hash key.
/// Vertices are stored shifted by one so sets of different sizes never collide.
#[inline]
pub(crate) fn set_key(sorted: &[Vertex]) -> u128 {
    debug_assert!(sorted.len() <= MAX_K);
    let mut key = 0u128;
    for &v in sorted {
        key = (key << 16) | (v as u128 + 1);
    }
    key
}

/// Key of an arbitrary-order vertex set.
#[inline]
pub(crate) fn unordered_key(set: &[Vertex]) -> u128 {
    let mut buf = [0usize; MAX_K];
    let s = &mut buf[..set.len()];
    s.copy_from_slice(set);
    s.sort_unstable();
    set_key(s)
}

/// A family of small vertex sets (e.g. an l-shadow) with O(1) membership.
#[derive(Clone, Debug, Default)]
pub struct SetFamily {
    size: usize,
    keys: FxHashSet<u128>,
    sets: Vec<Vec<Vertex>>,
}

impl SetFamily {
    pub fn new(size: usize) -> Self {
        SetFamily { size, keys: FxHashSet::default(), sets: Vec::new() }
    }

    /// Builds a family from sets given in any vertex order.
    pub fn from_sets<I: IntoIterator<Item = Vec<Vertex>>>(size: usize, sets: I) -> Self {
        let mut fam = SetFamily::new(size);
        for mut s in sets {
            s.sort_unstable();
            fam.insert_sorted(s);
        }
        fam.sets.sort();
        fam
    }

    fn insert_sorted(&mut self, s: Vec<Vertex>) {
        debug_assert_eq!(s.len(), self.size);
        if self.keys.insert(set_key(&s)) {
            self.sets.push(s);
        }
    }

    pub fn set_size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, set: &[Vertex]) -> bool {
        set.len() == self.size && self.keys.contains(&unordered_key(set))
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Members in ascending lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &[Vertex]> {
        self.sets.iter().map(|s| s.as_slice())
    }

    /// Members all of whose vertices satisfy `keep`.
    pub fn restrict(&self, keep: impl Fn(Vertex) -> bool) -> SetFamily {
        let mut fam = SetFamily::new(self.size);
        for s in &self.sets {
            if s.iter().all(|&v| keep(v)) {
                fam.insert_sorted(s.clone());
            }
        }
        fam
    }
}

#[derive(Clone, Debug)]
pub struct Hypergraph {
    k: usize,
    n: usize,
    flat: Vec<Vertex>,
    index: FxHashMap<u128, u32>,
    incidence: Vec<Vec<u32>>,
    /// (k-1)-set key to the vertices completing it to an edge.
    completions: FxHashMap<u128, Vec<Vertex>>,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.n == other.n && self.flat == other.flat
    }
}

impl Eq for Hypergraph {}

fn check_dims(k: usize, n: usize) -> Result<()> {
    if !(2..=MAX_K).contains(&k) {
        return Err(Error::Unsupported(format!("uniformity k = {k} (supported: 2..={MAX_K})")));
    }
    if n > MAX_N {
        return Err(Error::Unsupported(format!("vertex count n = {n} exceeds {MAX_N}")));
    }
    Ok(())
}

impl Hypergraph {
    /// Builds a k-graph from edges in any vertex order. Duplicate edges are
    /// merged; repeated vertices or out-of-range indices are errors.
    pub fn new<I, E>(k: usize, n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[Vertex]>,
    {
        check_dims(k, n)?;
        let mut sorted: Vec<Vec<Vertex>> = Vec::new();
        for e in edges {
            let e = e.as_ref();
            if e.len() != k {
                return Err(Error::InvalidArity { expected: format!("{k}"), got: e.len() });
            }
            let mut s = e.to_vec();
            s.sort_unstable();
            for w in s.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::RepeatedVertex(w[0]));
                }
            }
            if let Some(&v) = s.last() {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            sorted.push(s);
        }
        sorted.sort_unstable();
        sorted.dedup();
        Ok(Self::from_canonical(k, n, sorted))
    }

    /// `edges` must be sorted, deduplicated and each edge ascending.
    fn from_canonical(k: usize, n: usize, edges: Vec<Vec<Vertex>>) -> Self {
        let mut flat = Vec::with_capacity(edges.len() * k);
        let mut index = FxHashMap::default();
        index.reserve(edges.len());
        let mut incidence = vec![Vec::new(); n];
        let mut completions: FxHashMap<u128, Vec<Vertex>> = FxHashMap::default();
        let mut rest = Vec::with_capacity(k);
        for (id, e) in edges.iter().enumerate() {
            index.insert(set_key(e), id as u32);
            for (i, &v) in e.iter().enumerate() {
                incidence[v].push(id as u32);
                rest.clear();
                rest.extend(e.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &u)| u));
                completions.entry(set_key(&rest)).or_default().push(v);
            }
            flat.extend_from_slice(e);
        }
        Hypergraph { k, n, flat, index, incidence, completions }
    }

    pub fn empty(k: usize, n: usize) -> Result<Self> {
        check_dims(k, n)?;
        Ok(Self::from_canonical(k, n, Vec::new()))
    }

    /// The complete k-graph on `n` vertices.
    pub fn complete(k: usize, n: usize) -> Result<Self> {
        check_dims(k, n)?;
        let mut edges = Vec::new();
        for_each_combination(n, k, |c| edges.push(c.to_vec()));
        Ok(Self::from_canonical(k, n, edges))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.flat.len() / self.k
    }

    pub fn edge(&self, id: usize) -> &[Vertex] {
        &self.flat[id * self.k..(id + 1) * self.k]
    }

    /// Edges in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = &[Vertex]> + '_ {
        self.flat.chunks_exact(self.k)
    }

    pub fn contains_edge(&self, e: &[Vertex]) -> bool {
        e.len() == self.k && self.index.contains_key(&unordered_key(e))
    }

    /// Vertices `v` such that `set ∪ {v}` is an edge, for a (k-1)-set in
    /// any order.
    pub fn completions(&self, set: &[Vertex]) -> &[Vertex] {
        if set.len() + 1 != self.k {
            return &[];
        }
        self.completions.get(&unordered_key(set)).map_or(&[], |v| v.as_slice())
    }

    /// Ids of edges incident to `v`.
    pub fn incident(&self, v: Vertex) -> &[u32] {
        &self.incidence[v]
    }

    pub fn vertex_degree(&self, v: Vertex) -> usize {
        self.incidence[v].len()
    }

    fn check_set(&self, set: &[Vertex]) -> Result<()> {
        for (i, &v) in set.iter().enumerate() {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
            }
            if set[..i].contains(&v) {
                return Err(Error::RepeatedVertex(v));
            }
        }
        Ok(())
    }

    /// Smallest incidence list among the vertices of `set`.
    fn smallest_incidence(&self, set: &[Vertex]) -> &[u32] {
        set.iter()
            .map(|&v| self.incidence[v].as_slice())
            .min_by_key(|l| l.len())
            .unwrap_or(&[])
    }

    /// Ids of the edges containing every vertex of `set`.
    pub fn edges_containing<'a>(&'a self, set: &'a [Vertex]) -> impl Iterator<Item = usize> + 'a {
        self.smallest_incidence(set)
            .iter()
            .map(|&id| id as usize)
            .filter(move |&id| {
                let e = self.edge(id);
                set.iter().all(|v| e.binary_search(v).is_ok())
            })
    }

    /// Whether some edge contains all of `set` (true for the empty set iff
    /// the graph has an edge).
    pub fn has_superset_edge(&self, set: &[Vertex]) -> bool {
        match set.len() {
            0 => self.edge_count() > 0,
            l if l == self.k => self.contains_edge(set),
            l if l > self.k => false,
            l if l + 1 == self.k => !self.completions(set).is_empty(),
            _ => self.edges_containing(set).next().is_some(),
        }
    }

    /// Number of (k-|S|)-sets T with S ∪ T an edge. The order of `s` is irrelevant.
    pub fn degree(&self, s: &[Vertex]) -> Result<usize> {
        if s.is_empty() || s.len() >= self.k {
            return Err(Error::InvalidArity { expected: format!("1..={}", self.k - 1), got: s.len() });
        }
        self.check_set(s)?;
        Ok(self.edges_containing(s).count())
    }

    /// Minimum d-degree over all d-subsets of the vertex set (0 if n < d).
    pub fn min_d_degree(&self, d: usize) -> Result<usize> {
        if d == 0 || d >= self.k {
            return Err(Error::InvalidArity { expected: format!("1..={}", self.k - 1), got: d });
        }
        if self.n < d {
            return Ok(0);
        }
        if d == 1 {
            return Ok(self.incidence.iter().map(Vec::len).min().unwrap_or(0));
        }
        let mut counts: FxHashMap<u128, usize> = FxHashMap::default();
        for e in self.edges() {
            for_each_subset(e, d, |s| *counts.entry(set_key(s)).or_insert(0) += 1);
        }
        if (counts.len() as u128) < binomial(self.n as u64, d as u64) {
            return Ok(0);
        }
        Ok(counts.values().copied().min().unwrap_or(0))
    }

    /// All `ell`-subsets contained in some edge, ascending.
    pub fn shadow(&self, ell: usize) -> Result<BTreeSet<Vec<Vertex>>> {
        Ok(self.shadow_family(ell)?.iter().map(|s| s.to_vec()).collect())
    }

    /// The `ell`-shadow as a [`SetFamily`].
    pub fn shadow_family(&self, ell: usize) -> Result<SetFamily> {
        if ell == 0 || ell > self.k {
            return Err(Error::InvalidArity { expected: format!("1..={}", self.k), got: ell });
        }
        let mut fam = SetFamily::new(ell);
        for e in self.edges() {
            for_each_subset(e, ell, |s| {
                if !fam.keys.contains(&set_key(s)) {
                    fam.insert_sorted(s.to_vec());
                }
            });
        }
        fam.sets.sort();
        Ok(fam)
    }

    /// Edge union of two graphs on the same vertex range.
    pub fn union(&self, other: &Hypergraph) -> Result<Hypergraph> {
        if self.k != other.k || self.n != other.n {
            return Err(Error::InvalidParameter(format!(
                "union of ({}, {}) and ({}, {}) graphs",
                self.k, self.n, other.k, other.n
            )));
        }
        let mut edges: Vec<Vec<Vertex>> = self.edges().map(<[_]>::to_vec).collect();
        edges.extend(other.edges().filter(|e| !self.contains_edge(e)).map(<[_]>::to_vec));
        edges.sort_unstable();
        Ok(Self::from_canonical(self.k, self.n, edges))
    }

    /// Spanning subgraph keeping the edges that satisfy `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(&[Vertex]) -> bool) -> Hypergraph {
        let edges = self.edges().filter(|e| keep(e)).map(<[_]>::to_vec).collect();
        Self::from_canonical(self.k, self.n, edges)
    }

    /// Spanning subgraph with the edges lying entirely inside `inside`
    /// (the vertex range is kept, so indices stay global).
    pub fn induced(&self, inside: &[bool]) -> Hypergraph {
        self.filter_edges(|e| e.iter().all(|&v| inside[v]))
    }
}

/// Calls `f` on every ascending `r`-combination of `0..n`.
pub fn for_each_combination(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut c: Vec<usize> = (0..r).collect();
    loop {
        f(&c);
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if c[i] != i + n - r {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if c[i] == i + n - r {
            return;
        }
        c[i] += 1;
        for j in i + 1..r {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Calls `f` on every `r`-subset of `items`, preserving the order of `items`.
pub fn for_each_subset(items: &[usize], r: usize, mut f: impl FnMut(&[usize])) {
    let mut buf = vec![0usize; r];
    for_each_combination(items.len(), r, |idx| {
        for (b, &i) in buf.iter_mut().zip(idx) {
            *b = items[i];
        }
        f(&buf);
    });
}

/// Exact binomial coefficient; saturates at `u128::MAX`.
pub fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Falling factorial (n)_b = n (n-1) ... (n-b+1); saturates.
pub fn falling(n: u64, b: u64) -> u128 {
    if b > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc.saturating_mul((n - i) as u128);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    /// H0 with parts A = {0..a}, B = {a..n}.
    fn h0(n: usize, k: usize, a: usize) -> Hypergraph {
        let mut edges = Vec::new();
        for_each_combination(n, k, |c| {
            let in_a = c.iter().filter(|&&v| v < a).count();
            if in_a > 0 && in_a < k {
                edges.push(c.to_vec());
            }
        });
        Hypergraph::new(k, n, edges).unwrap()
    }

    #[test]
    fn complete_graph_degrees() {
        let h = Hypergraph::complete(3, 5).unwrap();
        assert_eq!(h.edge_count(), 10);
        assert_eq!(h.degree(&[1, 3]).unwrap(), 3);
        let h6 = Hypergraph::complete(3, 6).unwrap();
        assert_eq!(h6.min_d_degree(1).unwrap(), 10);
        assert_eq!(h6.min_d_degree(2).unwrap(), 4);
    }

    #[test]
    fn empty_graph_degree_is_zero() {
        let h = Hypergraph::empty(3, 7).unwrap();
        assert_eq!(h.degree(&[4]).unwrap(), 0);
        assert_eq!(h.min_d_degree(2).unwrap(), 0);
        assert!(h.shadow(2).unwrap().is_empty());
    }

    #[test]
    fn h0_degrees_match_enumeration() {
        let h = h0(10, 3, 2);
        // pair {a, b}: any third vertex works
        assert_eq!(h.degree(&[0, 5]).unwrap(), 8);
        assert_eq!(h.degree(&[5, 0]).unwrap(), 8);
        // brute force minimum vertex degree
        let brute = (0..10)
            .map(|v| {
                let mut c = 0;
                for_each_combination(10, 3, |e| {
                    if e.contains(&v) && e.iter().any(|&u| u < 2) && e.iter().any(|&u| u >= 2) {
                        c += 1;
                    }
                });
                c
            })
            .min()
            .unwrap();
        // a vertex of B misses the C(7, 2) pairs inside B
        assert_eq!(brute, 36 - 21);
        assert_eq!(h.min_d_degree(1).unwrap(), brute);
        assert!(brute >= 2 * 7);
    }

    #[test]
    fn degree_arity_errors() {
        let h = Hypergraph::complete(3, 5).unwrap();
        assert!(matches!(h.degree(&[]), Err(Error::InvalidArity { .. })));
        assert!(matches!(h.degree(&[0, 1, 2]), Err(Error::InvalidArity { .. })));
        assert!(matches!(h.degree(&[0, 9]), Err(Error::VertexOutOfRange { .. })));
        assert!(matches!(h.min_d_degree(3), Err(Error::InvalidArity { .. })));
        assert!(matches!(h.shadow(4), Err(Error::InvalidArity { .. })));
    }

    #[test]
    fn shadow_of_single_edge() {
        let h = Hypergraph::new(3, 4, [[0, 1, 2]]).unwrap();
        let s = h.shadow(2).unwrap();
        let expect: BTreeSet<Vec<usize>> = [vec![0, 1], vec![0, 2], vec![1, 2]].into_iter().collect();
        assert_eq!(s, expect);
        assert_eq!(Hypergraph::complete(3, 5).unwrap().shadow(2).unwrap().len(), 10);
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert!(Hypergraph::new(3, 4, [[0, 1, 1]]).is_err());
        assert!(Hypergraph::new(3, 4, [[0, 1, 4]]).is_err());
        assert!(Hypergraph::new(3, 4, [vec![0, 1]]).is_err());
        let h = Hypergraph::new(3, 4, [[2, 1, 0], [0, 1, 2]]).unwrap();
        assert_eq!(h.edge_count(), 1);
        assert!(h.contains_edge(&[1, 2, 0]));
    }

    #[test]
    fn combination_counts() {
        let mut c = 0;
        for_each_combination(7, 3, |_| c += 1);
        assert_eq!(c, 35);
        let mut z = 0;
        for_each_combination(3, 0, |s| {
            assert!(s.is_empty());
            z += 1
        });
        assert_eq!(z, 1);
        assert_eq!(binomial(20, 3), 1140);
        assert_eq!(falling(12, 4), 11880);
    }
}
