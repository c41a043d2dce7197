//! Closed-form probabilistic quantities for copies of `P_{a,x}` in
//! `G^(k)(n, p)`, evaluated in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::PathPattern;

/// Largest `a` for which edge subsets are enumerated.
pub const MAX_SUBSET_EDGES: usize = 24;

fn check_np(n: usize, p: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1]")));
    }
    Ok(())
}

/// Number of vertices spanned by the edges of `pattern` selected by `mask`.
fn spanned(pattern: &PathPattern, mask: u32) -> usize {
    let mut total = 0;
    let mut reach = 0;
    for (j, r) in pattern.edge_ranges().enumerate() {
        if mask >> j & 1 == 1 {
            let start = r.start.max(reach);
            total += r.end.saturating_sub(start);
            reach = reach.max(r.end);
        }
    }
    total
}

fn edge_subsets(pattern: &PathPattern) -> Result<impl Iterator<Item = (usize, usize)> + '_> {
    if pattern.a == 0 {
        return Err(Error::InvalidParameter("the pattern has no edges".into()));
    }
    if pattern.a > MAX_SUBSET_EDGES {
        return Err(Error::Unsupported(format!("a = {} exceeds {MAX_SUBSET_EDGES}", pattern.a)));
    }
    Ok((1u32..1 << pattern.a).map(move |mask| (spanned(pattern, mask), mask.count_ones() as usize)))
}

/// `f_i` for `i = 0..=b`: the most edges of an `i`-vertex subgraph.
pub fn max_edges_profile(pattern: &PathPattern) -> Result<Vec<usize>> {
    let b = pattern.vertex_count();
    let mut f = vec![0; b + 1];
    for (v, e) in edge_subsets(pattern)? {
        f[v] = f[v].max(e);
    }
    for i in 1..=b {
        f[i] = f[i].max(f[i - 1]);
    }
    Ok(f)
}

/// `ln Φ`, the log of `min n^{v_H} p^{e_H}` over subgraphs with an edge.
pub fn ln_phi(pattern: &PathPattern, n: usize, p: f64) -> Result<f64> {
    check_np(n, p)?;
    let (ln_n, ln_p) = ((n as f64).ln(), p.ln());
    Ok(edge_subsets(pattern)?.map(|(v, e)| v as f64 * ln_n + e as f64 * ln_p).fold(f64::INFINITY, f64::min))
}

pub fn phi(pattern: &PathPattern, n: usize, p: f64) -> Result<f64> {
    ln_phi(pattern, n, p).map(f64::exp)
}

fn ln_factorial(s: usize) -> f64 {
    (2..=s).map(|i| (i as f64).ln()).sum()
}

/// `ln(2^s s! n^{2s} p^{2f} / phi)`.
pub fn ln_delta_bound(s: usize, f: usize, n: usize, p: f64, phi: f64) -> Result<f64> {
    check_np(n, p)?;
    if s == 0 || !(phi > 0.0) {
        return Err(Error::InvalidParameter("s and phi must be positive".into()));
    }
    let s_f = s as f64;
    Ok(s_f * std::f64::consts::LN_2 + ln_factorial(s) + 2.0 * s_f * (n as f64).ln() + 2.0 * f as f64 * p.ln() - phi.ln())
}

/// Upper bound `2^s s! n^{2s} p^{2f} / phi` on the correlation sum `Δ`.
pub fn delta_bound(s: usize, f: usize, n: usize, p: f64, phi: f64) -> Result<f64> {
    ln_delta_bound(s, f, n, p, phi).map(f64::exp)
}

/// Janson's bound `exp(-t² / (2Δ))` on `P(X <= λ - t)`.
pub fn janson_lower_tail(lambda: f64, t: f64, delta: f64) -> Result<f64> {
    if !(0.0..=lambda).contains(&t) {
        return Err(Error::InvalidParameter(format!("need 0 <= t <= lambda, got t = {t}, lambda = {lambda}")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    Ok((-t * t / (2.0 * delta)).exp())
}

/// Chebyshev's bound `Δ / λ²` on `P(X >= 2λ)`, clamped to 1.
pub fn chebyshev_upper_tail(lambda: f64, delta: f64) -> Result<f64> {
    if !(lambda > 0.0) || delta < 0.0 {
        return Err(Error::InvalidParameter("need lambda > 0 and delta >= 0".into()));
    }
    Ok((delta / (lambda * lambda)).min(1.0))
}

/// Chernoff bounds for `X ~ Bin(n, zeta)`: `P(X >= nζ + x)` and `P(X <= nζ - x)`.
pub fn chernoff_tails(n: usize, zeta: f64, x: f64) -> Result<(f64, f64)> {
    if !(zeta > 0.0 && zeta < 1.0) || !(x > 0.0) || n == 0 {
        return Err(Error::InvalidParameter(format!("need n >= 1, 0 < zeta < 1, x > 0; got {n}, {zeta}, {x}")));
    }
    let mean = n as f64 * zeta;
    Ok(((-x * x / (2.0 * mean + x / 3.0)).exp(), (-x * x / (2.0 * mean)).exp()))
}

/// Selection probability `β / (2 b² n^{b-1} p^a)` of binomial thinning.
pub fn thinning_q(beta: f64, b: usize, a: usize, n: usize, p: f64) -> Result<f64> {
    check_np(n, p)?;
    let ln = beta.ln() - (2.0 * (b * b) as f64).ln() - (b as f64 - 1.0) * (n as f64).ln() - a as f64 * p.ln();
    Ok(ln.exp())
}

/// Number of edges `a` of the path that `G[B]` must contain for `H0 ∪ G` to
/// be l-Hamiltonian (l >= 2).
pub fn sharpness_path_edges(k: usize, ell: usize, alpha: f64) -> Result<usize> {
    if ell == 0 || ell >= k || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("k = {k}, ell = {ell}, alpha = {alpha}")));
    }
    let a = ((1.0 / alpha - 1.0 - ell as f64) / (k - ell) as f64 + 1e-9).floor();
    if a < 1.0 {
        return Err(Error::InapplicableRegime(format!("alpha = {alpha} gives a < 1 for k = {k}, ell = {ell}")));
    }
    Ok(a as usize)
}

/// The `p` below which `H0 ∪ G^(k)(n, p)` fails to be l-Hamiltonian with
/// probability at least 1/2.
pub fn sharpness_threshold(k: usize, ell: usize, alpha: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if ell == 1 && k >= 2 && alpha > 0.0 && alpha < 1.0 {
        return Ok(nf.powi(-(k as i32 - 1)) / (2 * k) as f64);
    }
    let a = sharpness_path_edges(k, ell, alpha)? as f64;
    let m = (k - ell) as f64;
    Ok(0.5f64.powf(1.0 / a) * nf.powf(-m - ell as f64 / a))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: usize,
    pub ell: usize,
    pub a: usize,
    pub x: usize,
    pub n: usize,
    pub p: f64,
    /// Vertices `b` of the pattern.
    pub vertices: usize,
    pub phi: f64,
    /// Expected number of labeled copies `(n)_b p^a`.
    pub lambda: f64,
    pub delta_bound: f64,
    /// Janson bound on `P(X = 0)`.
    pub janson_tail: f64,
    /// Chebyshev bound on `P(X >= 2λ)`.
    pub chebyshev_tail: f64,
    pub chernoff_zeta: f64,
    pub chernoff_x: f64,
    pub chernoff_tails: (f64, f64),
    pub thinning_beta: f64,
    pub thinning_q: f64,
    pub max_edges: Vec<usize>,
}

impl BoundReport {
    /// All quantities for `P_{a,x}`; the Chernoff bounds are for
    /// `Bin(n, zeta)` at deviation `dev`.
    pub fn new(pattern: &PathPattern, n: usize, p: f64, zeta: f64, dev: f64, beta: f64) -> Result<Self> {
        let b = pattern.vertex_count();
        if b > n {
            return Err(Error::InvalidParameter(format!("pattern has {b} vertices but n = {n}")));
        }
        let phi = phi(pattern, n, p)?;
        let ln_lambda = (0..b).map(|i| ((n - i) as f64).ln()).sum::<f64>() + pattern.a as f64 * p.ln();
        let lambda = ln_lambda.exp();
        let ln_delta = ln_delta_bound(b, pattern.a, n, p, phi)?;
        let delta_bound = ln_delta.exp();
        // tails from logs so that huge λ and Δ do not overflow
        let janson_tail = (-(2.0 * ln_lambda - ln_delta - std::f64::consts::LN_2).exp()).exp();
        let chebyshev_tail = (ln_delta - 2.0 * ln_lambda).exp().min(1.0);
        Ok(BoundReport {
            k: pattern.k,
            ell: pattern.ell,
            a: pattern.a,
            x: pattern.x,
            n,
            p,
            vertices: b,
            phi,
            lambda,
            delta_bound,
            janson_tail,
            chebyshev_tail,
            chernoff_zeta: zeta,
            chernoff_x: dev,
            chernoff_tails: chernoff_tails(n, zeta, dev)?,
            thinning_beta: beta,
            thinning_q: thinning_q(beta, b, pattern.a, n, p)?,
            max_edges: max_edges_profile(pattern)?,
        })
    }
}

/// `(n)_b` as a float, for expected-count comparisons.
pub fn falling_f64(n: usize, b: usize) -> f64 {
    (0..b).map(|i| n.saturating_sub(i) as f64).product()
}
