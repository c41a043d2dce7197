//! Seeded random k-graphs, multi-round exposure and the extremal graph `H0`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{binomial, for_each_combination, set_key, Hypergraph, Vertex};

/// The generator used everywhere in the crate.
pub type Rand = ChaCha8Rng;

/// Below this edge probability `gnp` samples the edge count first instead of
/// flipping a coin for every k-set.
pub const DENSE_CUTOFF: f64 = 0.01;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a tuple of
/// indices such as `(round, trial)`.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(base);
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0x5851_F42D_4C95_7F2D)));
    }
    h
}

pub fn rng_from_seed(seed: u64) -> Rand {
    Rand::seed_from_u64(seed)
}

/// Parameters of one binomial random k-graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Samples `G^(k)(n, p)`; a pure function of `spec`.
pub fn gnp(spec: &RandomSpec) -> Result<Hypergraph> {
    check_probability(spec.p)?;
    let RandomSpec { n, k, p, seed } = *spec;
    if n < k {
        return Err(Error::InvalidParameter(format!("n = {n} is smaller than k = {k}")));
    }
    // validates k and n limits before any sampling
    Hypergraph::empty(k, n)?;
    let mut rng = rng_from_seed(seed);
    let mut edges: Vec<Vec<Vertex>> = Vec::new();
    if p >= DENSE_CUTOFF {
        for_each_combination(n, k, |c| {
            if rng.random::<f64>() < p {
                edges.push(c.to_vec());
            }
        });
    } else if p > 0.0 {
        let total = binomial(n as u64, k as u64);
        let total = u64::try_from(total)
            .map_err(|_| Error::Unsupported(format!("C({n}, {k}) does not fit in 64 bits")))?;
        let m = Binomial::new(total, p)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(&mut rng);
        let mut seen = FxHashSet::default();
        while (edges.len() as u64) < m {
            let mut e: Vec<Vertex> = index::sample(&mut rng, n, k).into_vec();
            e.sort_unstable();
            if seen.insert(set_key(&e)) {
                edges.push(e);
            }
        }
    }
    Hypergraph::new(k, n, edges)
}

/// Splitting of `G(n, p)` into `rounds` independent rounds of probability
/// `per_round_p` whose union has the law of `G(n, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExposurePlan {
    pub rounds: usize,
    pub per_round_p: f64,
}

/// Returns `p' = 1 - (1 - p)^(1/r)`.
pub fn split_exposure(p: f64, rounds: usize) -> Result<ExposurePlan> {
    check_probability(p)?;
    if rounds == 0 {
        return Err(Error::InvalidParameter("exposure needs at least one round".into()));
    }
    let per_round_p = if p == 1.0 {
        1.0
    } else {
        -((-p).ln_1p() / rounds as f64).exp_m1()
    };
    Ok(ExposurePlan { rounds, per_round_p })
}

impl ExposurePlan {
    /// Samples the rounds; round `i` uses seed `derive_seed(seed, [i])`.
    pub fn sample(&self, n: usize, k: usize, seed: u64) -> Result<Vec<Hypergraph>> {
        (0..self.rounds)
            .map(|i| gnp(&RandomSpec { n, k, p: self.per_round_p, seed: derive_seed(seed, &[i as u64]) }))
            .collect()
    }
}

/// Size of the part `A` of `H0` for density `alpha`: `floor(alpha n)`.
/// A tiny tolerance keeps products such as `0.3 * 30` from rounding down.
pub fn h0_part_size(n: usize, alpha: f64) -> usize {
    (alpha * n as f64 + 1e-9).floor() as usize
}

/// `H0`: the first `floor(alpha n)` vertices form `A`, the rest `B`, and the
/// edges are all k-sets meeting both parts.
pub fn extremal_h0(n: usize, k: usize, alpha: f64) -> Result<Hypergraph> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    extremal_h0_with_part(n, k, h0_part_size(n, alpha))
}

/// `H0` with an explicit part size `|A| = a_size`.
pub fn extremal_h0_with_part(n: usize, k: usize, a_size: usize) -> Result<Hypergraph> {
    if a_size == 0 || a_size >= n {
        return Err(Error::DegeneratePartition { a_size, n });
    }
    Hypergraph::empty(k, n)?;
    let mut edges = Vec::new();
    for_each_combination(n, k, |c| {
        if c[0] < a_size && c[k - 1] >= a_size {
            edges.push(c.to_vec());
        }
    });
    Hypergraph::new(k, n, edges)
}
