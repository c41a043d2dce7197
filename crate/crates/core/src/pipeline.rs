//! The five-step construction of a Hamiltonian l-cycle in `H ∪ G`.
//!
//! 1. shave `H` to `H'`, split off the low-degree vertices `V0`, shave
//!    `H'[V*]` to `H*` and take `L` as the l-shadow of `H*`;
//! 2. build connector libraries `C1` (in `H* ∪ G1[V*]`) and `C2` (in
//!    `H' ∪ G2`, avoiding `C1`);
//! 3. build absorbers in `H' ∪ G3` and chain them with `C2` into `P_abs`
//!    with ends `E1, E2 ∈ L`;
//! 4. cover the rest by l-paths of `G4` (plus `H'` by default) and close
//!    everything into a cycle with `C1`;
//! 5. absorb the vertices left outside the cycle.
//!
//! Stage failures are reported in the result, never as errors. A success
//! is always re-validated against `H ∪ G` before it is returned.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::absorb::{AbsorberConfig, AbsorberLibrary, build_absorber_library};
use crate::connect::{
    bridge, build_connector_library, path_constants, ConnectorConfig, ConnectorLibrary, PathConstants,
};
use crate::cover::{path_cover, CoverConfig};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, SetFamily, Vertex};
use crate::pattern::{cycle_defect, is_ell_path, CycleWitness};
use crate::random::{derive_seed, rng_from_seed, split_exposure, Rand};
use crate::search::Pool;
use crate::shave::Shaver;

/// Runtime knobs. The real-valued parameters play the roles of the
/// asymptotic constants; their defaults are empirical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: usize,
    pub ell: usize,
    pub n: usize,
    /// Minimum-degree density; measured from `H` when absent.
    pub alpha: Option<f64>,
    pub shave_eta: f64,
    pub cover_zeta: f64,
    pub library_beta: f64,
    /// Density floor of `L` inside the cover region below which a warning
    /// is recorded.
    pub sample_gamma: f64,
    /// Phase-1 segment length; defaults to the smallest valid value `>= n`.
    pub segment_length: Option<usize>,
    pub exposure_rounds: usize,
    pub max_retries: usize,
    pub candidates_per_demand: usize,
    pub connector_multiplicity: usize,
    pub c1_budget: Option<usize>,
    pub c2_budget: Option<usize>,
    pub absorber_count: Option<usize>,
    pub absorber_targets: usize,
    pub audit_pairs: usize,
    /// Share of the vertices the absorbing path may occupy when the
    /// absorber count is chosen automatically.
    pub absorber_fraction: f64,
    pub reservoir_tries: usize,
    pub search_node_limit: u64,
    /// Let the path cover use `H'` edges besides `G4`.
    pub cover_uses_deterministic: bool,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(k: usize, ell: usize, n: usize) -> Self {
        PipelineConfig {
            k,
            ell,
            n,
            alpha: None,
            shave_eta: 0.1,
            cover_zeta: 0.1,
            library_beta: 0.1,
            sample_gamma: 0.05,
            segment_length: None,
            exposure_rounds: 4,
            max_retries: 6,
            candidates_per_demand: 48,
            connector_multiplicity: 1,
            c1_budget: None,
            c2_budget: None,
            absorber_count: None,
            absorber_targets: 8,
            audit_pairs: 2,
            absorber_fraction: 0.6,
            reservoir_tries: 16,
            search_node_limit: 20_000,
            cover_uses_deterministic: true,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.ell == 0 || self.ell >= self.k {
            return bad(format!("need 1 <= ell < k, got k={}, ell={}", self.k, self.ell));
        }
        let m = self.k - self.ell;
        if !self.n.is_multiple_of(m) {
            return bad(format!("n = {} is not divisible by k - ell = {m}", self.n));
        }
        if self.n / m < 3 {
            return bad(format!("n = {} gives fewer than 3 cycle edges", self.n));
        }
        for (name, v) in [
            ("shave_eta", self.shave_eta),
            ("cover_zeta", self.cover_zeta),
            ("library_beta", self.library_beta),
            ("sample_gamma", self.sample_gamma),
            ("absorber_fraction", self.absorber_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} = {v} must lie in (0, 1)"));
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("alpha = {a} must lie in (0, 1)"));
            }
        }
        if self.exposure_rounds == 0 {
            return bad("exposure_rounds must be at least 1".into());
        }
        if let Some(s) = self.segment_length {
            if s < self.k || !(s - self.ell).is_multiple_of(m) {
                return bad(format!("segment length {s} must be ell + a(k - ell) with a >= 1"));
            }
        }
        Ok(())
    }

    fn constants(&self) -> PathConstants {
        path_constants(self.k, self.ell).expect("validated")
    }

    /// Number of absorbers: the configured count, or the largest `a` with
    /// `2l + (a + 1) t3 + a |Q| <= absorber_fraction * n`.
    pub fn absorbers_wanted(&self) -> usize {
        if let Some(a) = self.absorber_count {
            return a;
        }
        let c = self.constants();
        let room = self.absorber_fraction * self.n as f64;
        let mut a = 0;
        while (2 * c.ell + (a + 2) * c.t3 + (a + 1) * c.absorber_len()) as f64 <= room {
            a += 1;
        }
        a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Shave,
    Connectors,
    Absorbers,
    Cover,
    Connect,
    Absorb,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Shave => "shave",
            Stage::Connectors => "connectors",
            Stage::Absorbers => "absorbers",
            Stage::Cover => "cover",
            Stage::Connect => "connect",
            Stage::Absorb => "absorb",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Success { witness: CycleWitness },
    Failure { stage: Stage, diagnostics: String },
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success { .. })
    }

    pub fn witness(&self) -> Option<&CycleWitness> {
        match self {
            Outcome::Success { witness } => Some(witness),
            Outcome::Failure { .. } => None,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Outcome::Success { .. } => None,
            Outcome::Failure { stage, .. } => Some(*stage),
        }
    }
}

/// Per-stage statistics of a run (of its last attempt for stages 2-5).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub per_round_p: f64,
    pub random_edges: usize,
    pub theta: usize,
    pub theta_star: usize,
    pub edges_shaved: usize,
    pub edges_shaved_second: usize,
    pub low_vertices: usize,
    pub shadow_size: usize,
    pub attempts: usize,
    pub c1_members: usize,
    pub c2_members: usize,
    pub absorbers_built: usize,
    pub absorbers_in_path: usize,
    pub absorbing_path_len: usize,
    pub cover_paths: usize,
    pub cover_phase2_paths: usize,
    pub cover_leftover: usize,
    pub connectors_from_library: usize,
    pub connectors_on_demand: usize,
    pub leftover_absorbed: usize,
    pub absorptions: usize,
    pub stretches: usize,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineResult {
    pub outcome: Outcome,
    pub trace: Trace,
    /// Union of the exposure rounds.
    #[serde(skip)]
    pub random_graph: Option<Hypergraph>,
}

impl PartialEq for PipelineResult {
    fn eq(&self, other: &Self) -> bool {
        self.outcome == other.outcome && self.trace == other.trace && self.random_graph == other.random_graph
    }
}

/// Runs the pipeline on `H` with random edges `G^(k)(n, p)` sampled from
/// `cfg.seed`.
pub fn find_hamilton_cycle(h: &Hypergraph, p: f64, cfg: &PipelineConfig) -> Result<PipelineResult> {
    check_input(h, cfg)?;
    let plan = split_exposure(p, cfg.exposure_rounds)?;
    let rounds = plan.sample(h.n(), h.k(), derive_seed(cfg.seed, &[0]))?;
    let mut res = run(h, &rounds, cfg)?;
    res.trace.per_round_p = plan.per_round_p;
    Ok(res)
}

/// Runs the pipeline with explicitly given exposure rounds; stage `i`
/// (1-based) uses `rounds[(i - 1) % rounds.len()]`.
pub fn find_hamilton_cycle_with_rounds(h: &Hypergraph, rounds: &[Hypergraph], cfg: &PipelineConfig) -> Result<PipelineResult> {
    check_input(h, cfg)?;
    if rounds.is_empty() {
        return Err(Error::InvalidParameter("at least one exposure round is required".into()));
    }
    if rounds.iter().any(|g| g.k() != h.k() || g.n() != h.n()) {
        return Err(Error::InvalidParameter("exposure rounds must match H in k and n".into()));
    }
    run(h, rounds, cfg)
}

fn check_input(h: &Hypergraph, cfg: &PipelineConfig) -> Result<()> {
    cfg.validate()?;
    if h.k() != cfg.k || h.n() != cfg.n {
        return Err(Error::InvalidParameter(format!(
            "config is for (k, n) = ({}, {}), graph is ({}, {})",
            cfg.k,
            cfg.n,
            h.k(),
            h.n()
        )));
    }
    Ok(())
}

/// Output of step 1.
struct Shaved {
    h_prime: Hypergraph,
    h_star: Hypergraph,
    in_vstar: Vec<bool>,
    v0: Vec<Vertex>,
    l: SetFamily,
}

fn step_shave(h: &Hypergraph, cfg: &PipelineConfig, trace: &mut Trace) -> Result<Shaved> {
    let (n, k, ell) = (h.n(), h.k(), cfg.ell);
    let delta1 = h.min_d_degree(1)?;
    let scale = (n as f64).powi(k as i32 - 1);
    let alpha = match cfg.alpha {
        Some(a) => {
            if (delta1 as f64) < a * scale {
                trace.notes.push(format!("minimum degree {delta1} is below alpha n^(k-1) = {:.1}", a * scale));
            }
            a
        }
        None => delta1 as f64 / scale,
    };
    if ell == 1 {
        let l = SetFamily::from_sets(1, (0..n).map(|v| vec![v]));
        trace.shadow_size = l.len();
        return Ok(Shaved { h_prime: h.clone(), h_star: h.clone(), in_vstar: vec![true; n], v0: Vec::new(), l });
    }
    let eta2 = cfg.shave_eta * cfg.shave_eta;
    let theta = ((eta2 * (n as f64).powi((k - ell) as i32)).ceil() as usize).max(1);
    let vertex_bound = (2.0 * alpha * scale / 3.0).ceil() as usize;
    let first = Shaver::new(ell, theta).vertex_bound(vertex_bound).run(h)?;
    let h_prime = first.shaved;
    let v0 = first.low_vertices;
    let mut in_vstar = vec![true; n];
    for &v in &v0 {
        in_vstar[v] = false;
    }
    let n_star = n - v0.len();
    let theta_star = ((eta2 * (n_star as f64).powi((k - ell) as i32)).ceil() as usize).max(1);
    let second = Shaver::new(ell, theta_star).run(&h_prime.induced(&in_vstar))?;
    let h_star = second.shaved;
    let l = h_star.shadow_family(ell)?;
    trace.theta = theta;
    trace.theta_star = theta_star;
    trace.edges_shaved = first.edges_before - first.edges_after;
    trace.edges_shaved_second = second.edges_before - second.edges_after;
    trace.low_vertices = v0.len();
    trace.shadow_size = l.len();
    Ok(Shaved { h_prime, h_star, in_vstar, v0, l })
}

/// A piece of the cycle under construction.
#[derive(Clone, Debug)]
enum Seg {
    /// A path (end set, absorber or cover path).
    Path(Vec<Vertex>),
    /// A connector body joining the neighbouring paths; `graph` indexes the
    /// union graph it was built in (0 for `C1`, 1 for `C2`, [`WIDE`] for
    /// `H ∪ G`).
    Junction { body: Vec<Vertex>, graph: usize },
}

fn flatten(segs: &[Seg]) -> Vec<Vertex> {
    let mut out = Vec::new();
    for s in segs {
        match s {
            Seg::Path(p) => out.extend(p),
            Seg::Junction { body, .. } => out.extend(body),
        }
    }
    out
}

/// Graph index of on-demand bodies built in `H ∪ G`.
const WIDE: usize = 2;

struct StageFailure(Stage, String);

type Attempt = std::result::Result<Vec<Vertex>, StageFailure>;

fn run(h: &Hypergraph, rounds: &[Hypergraph], cfg: &PipelineConfig) -> Result<PipelineResult> {
    let mut trace = Trace::default();
    let mut g_union = Hypergraph::empty(h.k(), h.n())?;
    for g in rounds {
        g_union = g_union.union(g)?;
    }
    trace.random_edges = g_union.edge_count();
    let round = |i: usize| &rounds[(i - 1) % rounds.len()];

    let shaved = step_shave(h, cfg, &mut trace)?;
    if shaved.l.len() < 2 {
        return Ok(PipelineResult {
            outcome: Outcome::Failure {
                stage: Stage::Shave,
                diagnostics: format!("the l-shadow of the shaved graph has {} sets", shaved.l.len()),
            },
            trace,
            random_graph: Some(g_union),
        });
    }

    let consts = cfg.constants();
    let check1 = Arc::new(shaved.h_star.union(&round(1).induced(&shaved.in_vstar))?);
    let check2 = Arc::new(shaved.h_prime.union(round(2))?);
    let check3 = Arc::new(shaved.h_prime.union(round(3))?);
    let cover_graph = if cfg.cover_uses_deterministic { shaved.h_prime.union(round(4))? } else { round(4).clone() };
    let full = h.union(&g_union)?;
    let graphs = Graphs { shaved: &shaved, check1, check2, check3, cover_graph, full, consts };

    // stage statistics describe the last attempt only
    let base = trace;
    let mut last = (StageFailure(Stage::Shave, String::new()), base.clone());
    for attempt in 0..=cfg.max_retries {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, &[1, attempt as u64]));
        let mut t = Trace { attempts: attempt + 1, ..base.clone() };
        match attempt_once(&graphs, cfg, &mut t, &mut rng) {
            Ok(order) => {
                let witness = CycleWitness::new(order, cfg.k, cfg.ell)?;
                match cycle_defect(&graphs.full, &witness)? {
                    None => {
                        return Ok(PipelineResult {
                            outcome: Outcome::Success { witness },
                            trace: t,
                            random_graph: Some(g_union),
                        })
                    }
                    Some(defect) => {
                        let msg = format!("assembled order failed validation: {defect}");
                        last = (StageFailure(Stage::Absorb, msg), t);
                    }
                }
            }
            Err(f) => last = (f, t),
        }
    }
    let (StageFailure(stage, diagnostics), trace) = last;
    Ok(PipelineResult { outcome: Outcome::Failure { stage, diagnostics }, trace, random_graph: Some(g_union) })
}

struct Graphs<'a> {
    shaved: &'a Shaved,
    check1: Arc<Hypergraph>,
    check2: Arc<Hypergraph>,
    check3: Arc<Hypergraph>,
    cover_graph: Hypergraph,
    full: Hypergraph,
    consts: PathConstants,
}

/// A cyclic order built from paths and the connectors between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleAssembly {
    pub order: Vec<Vertex>,
    /// `connectors[i]` follows the `i`-th path in `order`.
    pub connectors: Vec<Vec<Vertex>>,
}

/// Closes `paths` into one cyclic order, joining the end of each path to
/// the start of the next (and the last to the first) by distinct unused
/// members of `lib`, picked at random among those that fit.
pub fn connect_into_cycle(paths: &[Vec<Vertex>], lib: &mut ConnectorLibrary, rng: &mut Rand) -> Result<CycleAssembly> {
    let ell = lib.constants().ell;
    if paths.is_empty() {
        return Err(Error::InvalidParameter("no paths to connect".into()));
    }
    let n = lib.graph().n();
    let mut on_path = vec![false; n];
    for p in paths {
        if p.len() < ell {
            return Err(Error::InvalidParameter(format!("path {p:?} is shorter than l")));
        }
        for &v in p {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if on_path[v] {
                return Err(Error::RepeatedVertex(v));
            }
            on_path[v] = true;
        }
    }
    let mut order = Vec::new();
    let mut connectors = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        let next = &paths[(i + 1) % paths.len()];
        let (a, b) = (&p[p.len() - ell..], &next[..ell]);
        let fits: Vec<usize> =
            lib.usable(a, b).into_iter().filter(|&c| lib.members()[c].body.iter().all(|&v| !on_path[v])).collect();
        let Some(&c) = fits.choose(rng) else {
            return Err(Error::ConnectorShortfall { from: a.to_vec(), to: b.to_vec() });
        };
        let body = lib.take(c);
        order.extend_from_slice(p);
        order.extend_from_slice(&body);
        connectors.push(body);
    }
    Ok(CycleAssembly { order, connectors })
}

/// Joins `from`'s end to `to`'s start: an unused library member if one
/// connects them, else a fresh body from `pool` found by search, first of
/// `t3` vertices and then longer, first in the library's graph and then in
/// `wide`. Returns the body and the index of the graph it lives in.
#[allow(clippy::too_many_arguments)]
fn join(
    lib: &mut ConnectorLibrary,
    own: usize,
    wide: &Hypergraph,
    from: &[Vertex],
    to: &[Vertex],
    pool: &mut [bool],
    node_limit: u64,
    trace: &mut Trace,
    rng: &mut Rand,
) -> Option<(Vec<Vertex>, usize)> {
    let consts = lib.constants();
    let (ell, m, t3) = (consts.ell, consts.m(), consts.t3);
    let a = &from[from.len() - ell..];
    let b = &to[..ell];
    if let Some(&i) = lib.usable(a, b).first() {
        let body = lib.take(i);
        for &v in &body {
            pool[v] = false;
        }
        trace.connectors_from_library += 1;
        return Some((body, own));
    }
    // unused members double as spare vertices
    let mut spare = pool.to_vec();
    for i in 0..lib.len() {
        if !lib.is_used(i) {
            for &v in &lib.members()[i].body {
                spare[v] = true;
            }
        }
    }
    for &v in a.iter().chain(b) {
        spare[v] = false;
    }
    let spare = Pool::from_mask(spare);
    let mut found = None;
    'search: for extra in 0..3 {
        let len = t3 + extra * m;
        if len > spare.len() {
            break;
        }
        for (gi, graph) in [(own, lib.graph()), (WIDE, wide)] {
            if let Some(body) = bridge(graph, a, b, len, &spare, node_limit, rng) {
                found = Some((body, gi));
                break 'search;
            }
        }
    }
    let (body, gi) = found?;
    // members touched by the new body are spent
    for i in 0..lib.len() {
        if !lib.is_used(i) && lib.members()[i].body.iter().any(|v| body.contains(v)) {
            for &v in &lib.members()[i].body {
                pool[v] = true;
            }
            lib.retire(i);
        }
    }
    for &v in &body {
        pool[v] = false;
    }
    trace.connectors_on_demand += 1;
    Some((body, gi))
}

fn attempt_once(gr: &Graphs<'_>, cfg: &PipelineConfig, trace: &mut Trace, rng: &mut Rand) -> Attempt {
    let sh = gr.shaved;
    let n = cfg.n;
    let consts = gr.consts;
    let (ell, m, t3) = (consts.ell, consts.m(), consts.t3);
    let fail = |s: Stage, msg: String| Err(StageFailure(s, msg));

    // step 2: connector libraries
    let c1_budget = cfg.c1_budget.unwrap_or(((cfg.cover_zeta * n as f64) as usize / t3).max(1));
    let c2_budget = cfg.c2_budget.unwrap_or(((cfg.library_beta * n as f64) as usize / t3).max(1));
    let ccfg = |budget| ConnectorConfig {
        candidates_per_demand: cfg.candidates_per_demand,
        multiplicity: cfg.connector_multiplicity,
        budget,
        audit_pairs: cfg.audit_pairs,
        fill: true,
    };
    let not_vstar: Vec<bool> = sh.in_vstar.iter().map(|&b| !b).collect();
    let mut c1 = build_connector_library(&sh.h_star, gr.check1.clone(), &sh.l, &not_vstar, &[], consts, &ccfg(c1_budget), rng);
    trace.c1_members = c1.len();
    if c1.is_empty() {
        return fail(Stage::Connectors, "no connector found for the first library".into());
    }
    let mut reserved = vec![false; n];
    for v in c1.vertices() {
        reserved[v] = true;
    }
    let l2 = sh.h_prime.shadow_family(ell).map_err(|e| StageFailure(Stage::Connectors, e.to_string()))?;
    let mut c2 = build_connector_library(&sh.h_prime, gr.check2.clone(), &l2, &reserved, &[], consts, &ccfg(c2_budget), rng);
    trace.c2_members = c2.len();
    for v in c2.vertices() {
        reserved[v] = true;
    }

    // step 3: absorbers chained into the absorbing path
    let want = cfg.absorbers_wanted();
    let mut absorbers = AbsorberLibrary::empty(consts, gr.check3.clone());
    if want > 0 {
        let vstar: Vec<Vertex> = (0..n).filter(|&v| sh.in_vstar[v]).collect();
        let acfg = AbsorberConfig {
            targets: cfg.absorber_targets.max(want),
            candidates_per_target: cfg.candidates_per_demand,
            budget: want,
        };
        absorbers = build_absorber_library(&sh.h_prime, gr.check3.clone(), &vstar, &reserved, consts, &acfg, rng);
    }
    trace.absorbers_built = absorbers.len();
    for a in absorbers.members() {
        for v in a.q() {
            reserved[v] = true;
        }
    }
    let mut ends: Vec<Vec<Vertex>> = Vec::new();
    for s in sh.l.iter() {
        if s.iter().all(|&v| !reserved[v]) && ends.iter().all(|e| !e.iter().any(|v| s.contains(v))) {
            ends.push(s.to_vec());
            if ends.len() == 2 {
                break;
            }
        }
    }
    if ends.len() < 2 {
        return fail(Stage::Absorbers, "no two disjoint end sets in L avoid the libraries".into());
    }
    for e in &ends {
        for &v in e {
            reserved[v] = true;
        }
    }
    // spare vertices for on-demand C2 connectors: everything unreserved
    let mut pool2: Vec<bool> = reserved.iter().map(|&r| !r).collect();
    let mut segs: Vec<Seg> = vec![Seg::Path(ends[0].clone())];
    let mut kept = Vec::new();
    for i in 0..absorbers.len() {
        let q = absorbers.members()[i].q();
        let prev = match segs.last() {
            Some(Seg::Path(p)) => p.clone(),
            _ => unreachable!(),
        };
        let mut joined = None;
        for cand in [q.clone(), q.iter().rev().copied().collect()] {
            if let Some(j) = join(&mut c2, 1, &gr.full, &prev, &cand, &mut pool2, cfg.search_node_limit, trace, rng) {
                joined = Some((j, cand));
                break;
            }
        }
        match joined {
            Some(((body, graph), cand)) => {
                segs.push(Seg::Junction { body, graph });
                segs.push(Seg::Path(cand));
                kept.push(i);
            }
            None => {
                // the absorber is dropped and its vertices are freed
                for v in q {
                    pool2[v] = true;
                }
            }
        }
    }
    let prev = flatten(&segs);
    match join(&mut c2, 1, &gr.full, &prev, &ends[1], &mut pool2, cfg.search_node_limit, trace, rng) {
        Some((body, graph)) => {
            segs.push(Seg::Junction { body, graph });
            segs.push(Seg::Path(ends[1].clone()));
        }
        None => return fail(Stage::Absorbers, format!("could not connect the absorbing path to E2 = {:?}", ends[1])),
    }
    let dropped = absorbers.len() - kept.len();
    if dropped > 0 {
        trace.notes.push(format!("{dropped} absorber(s) could not be connected and were dropped"));
    }
    let keep_set: Vec<bool> = (0..absorbers.len()).map(|i| kept.contains(&i)).collect();
    absorbers.retain(|i| keep_set[i]);
    trace.absorbers_in_path = absorbers.len();
    let p_abs = flatten(&segs);
    trace.absorbing_path_len = p_abs.len();
    debug_assert!(is_ell_path(&gr.full, &p_abs, ell));
    let unused_c2: Vec<Vertex> = (0..c2.len()).filter(|&i| !c2.is_used(i)).flat_map(|i| c2.members()[i].body.clone()).collect();
    if !unused_c2.is_empty() {
        trace.notes.push(format!("{} vertices of unused second-library connectors returned to the cover", unused_c2.len()));
    }

    // step 4: cover V' = V \ (P_abs ∪ V(C1)) and close the cycle
    let mut in_cycle = vec![false; n];
    for &v in &p_abs {
        in_cycle[v] = true;
    }
    let mut in_c1 = vec![false; n];
    for v in c1.vertices() {
        in_c1[v] = true;
    }
    let vprime: Vec<Vertex> = (0..n).filter(|&v| !in_cycle[v] && !in_c1[v]).collect();
    let mut is_v0 = vec![false; n];
    for &v in &sh.v0 {
        is_v0[v] = true;
    }
    let in_vprime = {
        let mut b = vec![false; n];
        for &v in &vprime {
            b[v] = true;
        }
        b
    };
    let v0_here: Vec<Vertex> = sh.v0.iter().copied().filter(|&v| in_vprime[v]).collect();
    let l_cover = sh.l.restrict(|v| in_vprime[v] && !is_v0[v]);
    let denom = (vprime.len().max(1) as f64).powi(ell as i32);
    if (l_cover.len() as f64) < cfg.sample_gamma * denom {
        trace.notes.push(format!("only {} end sets available to the cover", l_cover.len()));
    }
    let mut cover_cfg = CoverConfig::new(&consts, n);
    cover_cfg.zeta = cfg.cover_zeta;
    if let Some(s) = cfg.segment_length {
        cover_cfg.segment_length = s;
    }
    cover_cfg.reservoir_tries = cfg.reservoir_tries;
    cover_cfg.node_limit = cfg.search_node_limit;
    cover_cfg.strict = false;
    let cover = if vprime.is_empty() {
        Default::default()
    } else {
        match path_cover(&gr.cover_graph, &vprime, &v0_here, &l_cover, &consts, &cover_cfg, rng) {
            Ok(c) => c,
            Err(e) => return fail(Stage::Cover, e.to_string()),
        }
    };
    trace.cover_paths = cover.paths.len();
    trace.cover_phase2_paths = cover.phase2_paths;
    trace.cover_leftover = cover.leftover.len();

    let mut pool1 = vec![false; n];
    for &v in &cover.leftover {
        pool1[v] = true;
    }
    let mut pieces: Vec<Seg> = segs;
    let mut paths: Vec<Vec<Vertex>> = cover.paths.clone();
    // longest paths first
    paths.sort_by_key(|p| std::cmp::Reverse(p.len()));
    for p in paths {
        let prev = flatten(&pieces);
        let mut joined = None;
        for cand in [p.clone(), p.iter().rev().copied().collect::<Vec<_>>()] {
            if let Some(j) = join(&mut c1, 0, &gr.full, &prev, &cand, &mut pool1, cfg.search_node_limit, trace, rng) {
                joined = Some((j, cand));
                break;
            }
        }
        match joined {
            Some(((body, graph), cand)) => {
                pieces.push(Seg::Junction { body, graph });
                pieces.push(Seg::Path(cand));
            }
            None => {
                return fail(Stage::Connect, format!("no connector for the cover path starting {:?}", &p[..ell]));
            }
        }
    }
    let prev = flatten(&pieces);
    match join(&mut c1, 0, &gr.full, &prev, &p_abs, &mut pool1, cfg.search_node_limit, trace, rng) {
        Some((body, graph)) => pieces.push(Seg::Junction { body, graph }),
        None => return fail(Stage::Connect, "could not close the cycle".into()),
    }

    // step 5: absorb X = V \ V(cycle)
    let order = flatten(&pieces);
    let mut on = vec![false; n];
    for &v in &order {
        on[v] = true;
    }
    let x: Vec<Vertex> = (0..n).filter(|&v| !on[v]).collect();
    assert_eq!(x.len() % m, 0, "leftover size must be a multiple of k - l");
    if let Some(&v) = x.iter().find(|&&v| !sh.in_vstar[v]) {
        trace.notes.push(format!("leftover vertex {v} lies outside V*"));
    }
    trace.leftover_absorbed = x.len();
    if x.is_empty() {
        return Ok(order);
    }
    if let Ok(done) = absorbers.clone().absorb_leftover(&order, &x, rng) {
        trace.absorptions = x.len() / m;
        return Ok(done);
    }
    finish_with_stretches(gr, cfg, pieces, x, &mut absorbers, trace, rng)
}

/// Fallback for step 5 when the absorbers cannot take every block: blocks are
/// absorbed one at a time where possible and the rest are threaded into
/// junction connectors, which are then longer than `t3`.
fn finish_with_stretches(
    gr: &Graphs<'_>,
    cfg: &PipelineConfig,
    mut pieces: Vec<Seg>,
    x: Vec<Vertex>,
    absorbers: &mut AbsorberLibrary,
    trace: &mut Trace,
    rng: &mut Rand,
) -> Attempt {
    let consts = gr.consts;
    let (ell, m) = (consts.ell, consts.m());
    let graph_of = |g: usize| match g {
        0 => &*gr.check1,
        1 => &*gr.check2,
        _ => &gr.full,
    };

    // one attempt to thread `extra` into junction `j`
    let stretch = |pieces: &mut Vec<Seg>, j: usize, extra: &[Vertex], rng: &mut Rand| -> bool {
        let Seg::Junction { body, graph } = &pieces[j] else { return false };
        let graph = *graph;
        let before = flatten(&pieces[..j]);
        let a: Vec<Vertex> = if before.len() >= ell {
            before[before.len() - ell..].to_vec()
        } else {
            return false;
        };
        let after = flatten(&pieces[j + 1..]);
        let b: Vec<Vertex> = if after.len() >= ell { after[..ell].to_vec() } else { flatten(pieces)[..ell].to_vec() };
        let len = body.len() + extra.len();
        let pool = Pool::new(gr.full.n(), body.iter().chain(extra).copied());
        for g in [graph, WIDE] {
            if let Some(nb) = bridge(graph_of(g), &a, &b, len, &pool, cfg.search_node_limit, rng) {
                pieces[j] = Seg::Junction { body: nb, graph: g };
                return true;
            }
        }
        false
    };
    let junctions: Vec<usize> = (0..pieces.len()).filter(|&j| matches!(pieces[j], Seg::Junction { .. })).collect();

    // everything at once into a single junction
    for &j in &junctions {
        if stretch(&mut pieces, j, &x, rng) {
            trace.stretches += 1;
            return Ok(flatten(&pieces));
        }
    }
    // block by block: absorber first, then any junction
    let mut rest = Vec::new();
    for block in x.chunks(m) {
        let options = absorbers.absorbers_for(block);
        if let Some((i, w)) = options.into_iter().next() {
            let (q, qp) = absorbers.consume(i, &w).map_err(|e| StageFailure(Stage::Absorb, e.to_string()))?;
            let mut done = false;
            for seg in pieces.iter_mut() {
                if let Seg::Path(p) = seg {
                    if splice_linear(p, &q, &qp) {
                        done = true;
                        break;
                    }
                }
            }
            if done {
                trace.absorptions += 1;
                continue;
            }
        }
        let mut placed = false;
        for &j in &junctions {
            if stretch(&mut pieces, j, block, rng) {
                trace.stretches += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            rest.extend_from_slice(block);
        }
    }
    if rest.is_empty() {
        return Ok(flatten(&pieces));
    }
    Err(StageFailure(Stage::Absorb, format!("no absorber or junction can take {:?}", rest)))
}

/// Replaces the contiguous occurrence of `q` (either direction) in the
/// linear path `p` by `qp` in the same direction.
fn splice_linear(p: &mut Vec<Vertex>, q: &[Vertex], qp: &[Vertex]) -> bool {
    let Some(s) = p.iter().position(|&v| v == q[0]) else { return false };
    if s + q.len() <= p.len() && p[s..s + q.len()] == *q {
        p.splice(s..s + q.len(), qp.iter().copied());
        return true;
    }
    if s + 1 >= q.len() && p[s + 1 - q.len()..=s].iter().rev().eq(q.iter()) {
        p.splice(s + 1 - q.len()..=s, qp.iter().rev().copied());
        return true;
    }
    false
}
