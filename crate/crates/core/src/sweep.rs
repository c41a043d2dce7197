//! Monte Carlo sweeps of the pipeline over a grid of edge probabilities.
//!
//! Trials run in a worker pool; records are written in `(n, p-index,
//! trial)` order, one grid point at a time, so the output only depends on
//! the sweep parameters. Wall-clock time sits in the last CSV column.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::oracle::{hamilton_exists, SearchBudget};
use crate::pipeline::{find_hamilton_cycle, Outcome, PipelineConfig, Trace};
use crate::random::{derive_seed, extremal_h0};

pub const CSV_SCHEMA: u32 = 1;
pub const CSV_HEADER: &str = "kind,n,p_index,grid,p,trial,seed,outcome,stage,oracle,attempts,leftover,absorptions,stretches,on_demand,trials,successes,rate,wilson_lo,wilson_hi,wall_ms";

/// z for a two-sided 95% interval.
pub const WILSON_Z: f64 = 1.959963984540054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// `H0(alpha)` plus random edges.
    H0Gnp,
    /// A fixed base graph plus random edges.
    FileGnp,
    /// Random edges only; `H` is empty.
    GnpOnly,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::H0Gnp => "h0+gnp",
            Model::FileGnp => "file+gnp",
            Model::GnpOnly => "gnp-only",
        })
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h0+gnp" | "h0" => Ok(Model::H0Gnp),
            "file+gnp" | "file" => Ok(Model::FileGnp),
            "gnp-only" | "gnp" => Ok(Model::GnpOnly),
            _ => Err(Error::InvalidParameter(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    List(Vec<f64>),
    /// `points` values from `lo` to `hi` with constant ratio.
    Geometric { lo: f64, hi: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Grid::List(v) => v.clone(),
            Grid::Geometric { lo, hi, points } => {
                if !(*lo > 0.0 && hi >= lo) || *points == 0 {
                    return Err(Error::InvalidParameter(format!("bad geometric grid {lo}..{hi} x {points}")));
                }
                if *points == 1 {
                    vec![*lo]
                } else {
                    let r = (hi / lo).powf(1.0 / (*points - 1) as f64);
                    (0..*points).map(|i| if i + 1 == *points { *hi } else { lo * r.powi(i as i32) }).collect()
                }
            }
        };
        if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidParameter("grid must be nonempty with finite nonnegative values".into()));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub k: usize,
    pub ell: usize,
    pub ns: Vec<usize>,
    pub grid: Grid,
    /// Grid values are multiples of `n^{-(k-l)}` rather than probabilities.
    pub relative: bool,
    pub trials: usize,
    pub seed: u64,
    pub model: Model,
    pub alpha: f64,
    /// Run the exact oracle on `H ∪ G` when `n` is at most this.
    pub oracle_max_n: Option<usize>,
    pub oracle_budget: SearchBudget,
    /// Template for the pipeline; `k`, `ell`, `n` and `seed` are overridden.
    pub config: PipelineConfig,
}

impl SweepSpec {
    pub fn new(k: usize, ell: usize, ns: Vec<usize>, grid: Grid, trials: usize) -> Self {
        let n0 = ns.first().copied().unwrap_or(0);
        SweepSpec {
            k,
            ell,
            ns,
            grid,
            relative: false,
            trials,
            seed: 0,
            model: Model::H0Gnp,
            alpha: 0.3,
            oracle_max_n: None,
            oracle_budget: SearchBudget::default(),
            config: PipelineConfig::new(k, ell, n0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.ns.is_empty() {
            return Err(Error::InvalidParameter("the n list is empty".into()));
        }
        self.grid.values()?;
        for &n in &self.ns {
            self.pipeline_config(n, 0).validate()?;
        }
        Ok(())
    }

    fn pipeline_config(&self, n: usize, seed: u64) -> PipelineConfig {
        PipelineConfig { k: self.k, ell: self.ell, n, seed, ..self.config.clone() }
    }

    /// Probability for grid value `g` at `n`, clamped to 1.
    pub fn probability(&self, g: f64, n: usize) -> f64 {
        let p = if self.relative { g / (n as f64).powi((self.k - self.ell) as i32) } else { g };
        p.min(1.0)
    }

    pub fn trial_seed(&self, n: usize, p_index: usize, trial: usize) -> u64 {
        derive_seed(self.seed, &[n as u64, p_index as u64, trial as u64])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub p_index: usize,
    pub grid: f64,
    pub p: f64,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    /// Failing stage, if any.
    pub stage: Option<String>,
    /// `YES`, `NO` or `UNKNOWN` when the oracle ran.
    pub oracle: Option<String>,
    pub trace: Trace,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub n: usize,
    pub p_index: usize,
    pub grid: f64,
    pub p: f64,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub wall_ms: f64,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Whether the rates never drop beyond interval overlap: every later
/// point's upper bound reaches every earlier point's lower bound.
pub fn nondecreasing_within_overlap(points: &[PointSummary]) -> bool {
    points.iter().enumerate().all(|(i, a)| points[i + 1..].iter().all(|b| b.wilson_hi >= a.wilson_lo))
}

/// Runs one trial: build `H` for the model, run the pipeline and optionally
/// the oracle on `H ∪ G`.
pub fn run_trial(spec: &SweepSpec, base: Option<&Hypergraph>, n: usize, p_index: usize, trial: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let g = spec.grid.values()?[p_index];
    let p = spec.probability(g, n);
    let seed = spec.trial_seed(n, p_index, trial);
    let h = model_graph(spec, base, n)?;
    let res = find_hamilton_cycle(&h, p, &spec.pipeline_config(n, seed))?;
    let oracle = match (spec.oracle_max_n, &res.random_graph) {
        (Some(max), Some(g)) if n <= max => {
            Some(hamilton_exists(&h.union(g)?, spec.ell, &spec.oracle_budget)?.label().to_string())
        }
        _ => None,
    };
    let (success, stage) = match &res.outcome {
        Outcome::Success { .. } => (true, None),
        Outcome::Failure { stage, .. } => (false, Some(stage.to_string())),
    };
    Ok(TrialRecord {
        n,
        p_index,
        grid: g,
        p,
        trial,
        seed,
        success,
        stage,
        oracle,
        trace: res.trace,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn model_graph(spec: &SweepSpec, base: Option<&Hypergraph>, n: usize) -> Result<Hypergraph> {
    match spec.model {
        Model::H0Gnp => extremal_h0(n, spec.k, spec.alpha),
        Model::GnpOnly => Hypergraph::empty(spec.k, n),
        Model::FileGnp => {
            let b = base.ok_or_else(|| Error::InvalidParameter("model file+gnp needs a base graph".into()))?;
            if b.n() != n || b.k() != spec.k {
                return Err(Error::InvalidParameter(format!(
                    "base graph has (k, n) = ({}, {}), sweep wants ({}, {n})",
                    b.k(),
                    b.n(),
                    spec.k
                )));
            }
            Ok(b.clone())
        }
    }
}

pub fn summarize(records: &[TrialRecord]) -> Option<PointSummary> {
    let r0 = records.first()?;
    let successes = records.iter().filter(|r| r.success).count();
    let (wilson_lo, wilson_hi) = wilson_interval(successes, records.len(), WILSON_Z);
    Some(PointSummary {
        n: r0.n,
        p_index: r0.p_index,
        grid: r0.grid,
        p: r0.p,
        trials: records.len(),
        successes,
        rate: successes as f64 / records.len() as f64,
        wilson_lo,
        wilson_hi,
        wall_ms: records.iter().map(|r| r.wall_ms).sum(),
    })
}

pub fn trial_csv_row(r: &TrialRecord) -> String {
    let outcome = if r.success { "success" } else { "failure" };
    format!(
        "trial,{},{},{},{},{},{},{},{},{},{},{},{},{},{},,,,,,{:.3}",
        r.n,
        r.p_index,
        r.grid,
        r.p,
        r.trial,
        r.seed,
        outcome,
        r.stage.as_deref().unwrap_or(""),
        r.oracle.as_deref().unwrap_or(""),
        r.trace.attempts,
        r.trace.leftover_absorbed,
        r.trace.absorptions,
        r.trace.stretches,
        r.trace.connectors_on_demand,
        r.wall_ms
    )
}

pub fn summary_csv_row(s: &PointSummary) -> String {
    format!(
        "summary,{},{},{},{},,,,,,,,,,,{},{},{:.6},{:.6},{:.6},{:.3}",
        s.n, s.p_index, s.grid, s.p, s.trials, s.successes, s.rate, s.wilson_lo, s.wilson_hi, s.wall_ms
    )
}

/// Runs the sweep on `workers` threads (0 for the rayon default), writing
/// the CSV to `out` and flushing after every grid point.
pub fn run_sweep<W: Write>(spec: &SweepSpec, base: Option<&Hypergraph>, workers: usize, out: &mut W) -> Result<Vec<PointSummary>> {
    spec.validate()?;
    let grid = spec.grid.values()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    writeln!(out, "# schema={CSV_SCHEMA}")?;
    writeln!(
        out,
        "# k={} ell={} model={} alpha={} trials={} seed={} relative={}",
        spec.k, spec.ell, spec.model, spec.alpha, spec.trials, spec.seed, spec.relative
    )?;
    writeln!(out, "{CSV_HEADER}")?;
    let mut summaries = Vec::new();
    for &n in &spec.ns {
        for p_index in 0..grid.len() {
            let records: Vec<TrialRecord> = pool.install(|| {
                (0..spec.trials).into_par_iter().map(|t| run_trial(spec, base, n, p_index, t)).collect::<Result<_>>()
            })?;
            for r in &records {
                writeln!(out, "{}", trial_csv_row(r))?;
            }
            let s = summarize(&records).expect("trials >= 1");
            writeln!(out, "{}", summary_csv_row(&s))?;
            out.flush()?;
            summaries.push(s);
        }
    }
    Ok(summaries)
}
