use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hyperham::bounds::{sharpness_threshold, BoundReport};
use hyperham::io::{format_witness, parse_witness, read_hypergraph, write_hypergraph};
use hyperham::oracle::{count_labeled_copies, ell_path_exists, hamilton_exists, Decision, SearchBudget};
use hyperham::pattern::cycle_defect;
use hyperham::pipeline::{find_hamilton_cycle, Outcome, PipelineConfig, Trace};
use hyperham::random::{extremal_h0, gnp, RandomSpec};
use hyperham::shave::{ShaveOrder, Shaver};
use hyperham::sweep::{run_sweep, Grid, Model, SweepSpec};
use hyperham::{CycleWitness, Hypergraph, PathPattern};

/// Hamiltonian l-cycles in randomly perturbed hypergraphs.
#[derive(Parser)]
#[command(name = "hyperham", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a hypergraph file.
    Gen(GenArgs),
    /// Shave a hypergraph and report the statistics.
    Shave(ShaveArgs),
    /// Look for a Hamiltonian l-cycle in H ∪ G(n, p).
    Solve(SolveArgs),
    /// Success rates over a grid of probabilities, as CSV.
    Sweep(SweepArgs),
    /// Exact search for a Hamiltonian l-cycle, an l-path, or copy counts.
    Oracle(OracleArgs),
    /// Check a witness against a graph.
    Validate(ValidateArgs),
    /// Probabilistic bounds for copies of P_{a,x}, as JSON.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenModel {
    Complete,
    H0,
    Gnp,
    /// H0 plus random edges.
    Union,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: GenModel,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Fifo,
    Lifo,
    Random,
}

#[derive(Args)]
struct ShaveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    theta: usize,
    #[arg(long, value_enum, default_value = "fifo")]
    order: OrderArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the shaved graph.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PipelineArgs {
    /// Minimum-degree density; measured from H when absent.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_retries: Option<usize>,
    #[arg(long)]
    exposure_rounds: Option<usize>,
    #[arg(long)]
    absorbers: Option<usize>,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Cover with random edges only.
    #[arg(long)]
    random_cover: bool,
}

impl PipelineArgs {
    fn apply(&self, mut c: PipelineConfig) -> PipelineConfig {
        c.alpha = self.alpha.or(c.alpha);
        if let Some(r) = self.max_retries {
            c.max_retries = r;
        }
        if let Some(r) = self.exposure_rounds {
            c.exposure_rounds = r;
        }
        c.absorber_count = self.absorbers.or(c.absorber_count);
        if let Some(l) = self.node_limit {
            c.search_node_limit = l;
        }
        if self.random_cover {
            c.cover_uses_deterministic = false;
        }
        c
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    ell: usize,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the exact oracle on H ∪ G.
    #[arg(long)]
    verify_oracle: bool,
    #[arg(long, default_value_t = 12)]
    oracle_max_n: usize,
    /// Write the cycle's vertex order here on success.
    #[arg(long)]
    witness_out: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    ell: usize,
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Explicit grid values, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "geom")]
    grid: Vec<f64>,
    /// Geometric grid `lo:hi:points`.
    #[arg(long)]
    geom: Option<String>,
    /// Read grid values as multiples of n^-(k-l).
    #[arg(long)]
    relative: bool,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// h0+gnp, file+gnp or gnp-only.
    #[arg(long, default_value = "h0+gnp")]
    model: String,
    /// Part density of H0.
    #[arg(long = "h0-alpha", default_value_t = 0.3)]
    h0_alpha: f64,
    /// Base graph for the file+gnp model.
    #[arg(long)]
    base: Option<PathBuf>,
    /// Run the exact oracle when n is at most this.
    #[arg(long)]
    oracle_max_n: Option<usize>,
    #[arg(long, env = "HYPERHAM_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    ell: usize,
    /// Look for an l-path with this many edges instead of a cycle.
    #[arg(long, conflicts_with = "count")]
    path: Option<usize>,
    /// Count labeled copies of P_{a,x} with this many edges.
    #[arg(long)]
    count: Option<usize>,
    /// Pad vertices per side for --count.
    #[arg(long, default_value_t = 0)]
    pad: usize,
    #[arg(long, default_value_t = 50_000_000)]
    node_limit: u64,
    #[arg(long)]
    time_limit_ms: Option<u64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    witness: PathBuf,
    #[arg(long)]
    ell: usize,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    a: usize,
    #[arg(long, default_value_t = 0)]
    x: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Chernoff: success probability of Bin(n, zeta).
    #[arg(long, default_value_t = 0.1)]
    zeta: f64,
    /// Chernoff deviation; half the mean when absent.
    #[arg(long)]
    dev: Option<f64>,
    /// Thinning constant.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Also report the sharpness threshold for H0 with this density.
    #[arg(long)]
    alpha: Option<f64>,
}

type CmdResult = Result<ExitCode, String>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Shave(a) => shave(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::Oracle(a) => oracle(a),
        Cmd::Validate(a) => validate(a),
        Cmd::Bounds(a) => bounds(a),
    };
    match res {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<Hypergraph, String> {
    let f = fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    read_hypergraph(BufReader::new(f)).map_err(|e| format!("{}: {e}", path.display()))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, String> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(|e| format!("{}: {e}", p.display()))?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn json_line<T: Serialize>(v: &T) -> Result<(), String> {
    println!("{}", serde_json::to_string(v).map_err(|e| e.to_string())?);
    Ok(())
}

fn gen(a: GenArgs) -> CmdResult {
    let s = |e: hyperham::Error| e.to_string();
    let h = match a.model {
        GenModel::Complete => Hypergraph::complete(a.k, a.n).map_err(s)?,
        GenModel::H0 => extremal_h0(a.n, a.k, a.alpha).map_err(s)?,
        GenModel::Gnp => gnp(&RandomSpec { n: a.n, k: a.k, p: a.p, seed: a.seed }).map_err(s)?,
        GenModel::Union => {
            let g = gnp(&RandomSpec { n: a.n, k: a.k, p: a.p, seed: a.seed }).map_err(s)?;
            extremal_h0(a.n, a.k, a.alpha).map_err(s)?.union(&g).map_err(s)?
        }
    };
    let mut w = output(a.out.as_deref())?;
    write_hypergraph(&mut w, &h).map_err(s)?;
    w.flush().map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn shave(a: ShaveArgs) -> CmdResult {
    let h = load(&a.input)?;
    let order = match a.order {
        OrderArg::Fifo => ShaveOrder::Fifo,
        OrderArg::Lifo => ShaveOrder::Lifo,
        OrderArg::Random => ShaveOrder::Random(a.seed),
    };
    let r = Shaver::new(a.ell, a.theta).order(order).run(&h).map_err(|e| e.to_string())?;
    if let Some(p) = &a.out {
        let mut w = output(Some(p))?;
        write_hypergraph(&mut w, &r.shaved).map_err(|e| e.to_string())?;
        w.flush().map_err(|e| e.to_string())?;
    }
    json_line(&r)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SolveRecord {
    k: usize,
    ell: usize,
    n: usize,
    p: f64,
    seed: u64,
    outcome: Outcome,
    oracle: Option<&'static str>,
    trace: Trace,
    wall_ms: f64,
}

fn solve(a: SolveArgs) -> CmdResult {
    let start = Instant::now();
    let h = load(&a.input)?;
    let cfg = a.pipeline.apply(PipelineConfig::new(h.k(), a.ell, h.n()).with_seed(a.seed));
    let res = find_hamilton_cycle(&h, a.p, &cfg).map_err(|e| e.to_string())?;
    let oracle = match &res.random_graph {
        Some(g) if a.verify_oracle && h.n() <= a.oracle_max_n => {
            let u = h.union(g).map_err(|e| e.to_string())?;
            Some(hamilton_exists(&u, a.ell, &SearchBudget::default()).map_err(|e| e.to_string())?.label())
        }
        _ => None,
    };
    if let (Some(path), Some(w)) = (&a.witness_out, res.outcome.witness()) {
        fs::write(path, format_witness(&w.order) + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let success = res.outcome.is_success();
    json_line(&SolveRecord {
        k: h.k(),
        ell: a.ell,
        n: h.n(),
        p: a.p,
        seed: a.seed,
        outcome: res.outcome,
        oracle,
        trace: res.trace,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })?;
    if success && oracle == Some("NO") {
        return Err("the oracle contradicts a validated cycle".into());
    }
    Ok(if success { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn parse_geom(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || format!("--geom expects lo:hi:points, got {s:?}");
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(Grid::Geometric {
        lo: parts[0].parse().map_err(|_| bad())?,
        hi: parts[1].parse().map_err(|_| bad())?,
        points: parts[2].parse().map_err(|_| bad())?,
    })
}

fn sweep(a: SweepArgs) -> CmdResult {
    let grid = match (&a.geom, a.grid.is_empty()) {
        (Some(g), _) => parse_geom(g)?,
        (None, false) => Grid::List(a.grid.clone()),
        (None, true) => return Err("give --grid or --geom".into()),
    };
    let model: Model = a.model.parse().map_err(|e: hyperham::Error| e.to_string())?;
    let base = match (&model, &a.base) {
        (Model::FileGnp, Some(p)) => Some(load(p)?),
        (Model::FileGnp, None) => return Err("model file+gnp needs --base".into()),
        _ => None,
    };
    let mut spec = SweepSpec::new(a.k, a.ell, a.n.clone(), grid, a.trials);
    spec.relative = a.relative;
    spec.seed = a.seed;
    spec.model = model;
    spec.alpha = a.h0_alpha;
    spec.oracle_max_n = a.oracle_max_n;
    spec.config = a.pipeline.apply(spec.config.clone());
    let mut w = output(a.out.as_deref())?;
    run_sweep(&spec, base.as_ref(), a.workers, &mut w).map_err(|e| e.to_string())?;
    w.flush().map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn oracle(a: OracleArgs) -> CmdResult {
    let h = load(&a.input)?;
    let budget = SearchBudget { node_limit: a.node_limit, time_limit_ms: a.time_limit_ms };
    let s = |e: hyperham::Error| e.to_string();
    if let Some(edges) = a.count {
        let pat = PathPattern::new(h.k(), a.ell, edges, a.pad).map_err(s)?;
        println!("{}", count_labeled_copies(&h, &pat).map_err(s)?);
        return Ok(ExitCode::SUCCESS);
    }
    let (label, witness) = match a.path {
        Some(edges) => match ell_path_exists(&h, a.ell, edges, &budget).map_err(s)? {
            Decision::Yes(t) => ("YES", Some(t.to_vec())),
            d => (d.label(), None),
        },
        None => match hamilton_exists(&h, a.ell, &budget).map_err(s)? {
            Decision::Yes(w) => ("YES", Some(w.order)),
            d => (d.label(), None),
        },
    };
    println!("{label}");
    if let Some(w) = witness {
        println!("{}", format_witness(&w));
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(a: ValidateArgs) -> CmdResult {
    let h = load(&a.graph)?;
    let text = fs::read_to_string(&a.witness).map_err(|e| format!("{}: {e}", a.witness.display()))?;
    let order = parse_witness(&text).map_err(|e| e.to_string())?;
    let w = match CycleWitness::new(order, h.k(), a.ell) {
        Ok(w) => w,
        Err(e) => {
            println!("invalid: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    match cycle_defect(&h, &w).map_err(|e| e.to_string())? {
        None => {
            println!("valid");
            Ok(ExitCode::SUCCESS)
        }
        Some(d) => {
            println!("invalid: {d}");
            Ok(ExitCode::from(2))
        }
    }
}

#[derive(Serialize)]
struct BoundsOutput {
    #[serde(flatten)]
    report: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    sharpness_threshold: Option<f64>,
}

fn bounds(a: BoundsArgs) -> CmdResult {
    let s = |e: hyperham::Error| e.to_string();
    let pat = PathPattern::new(a.k, a.ell, a.a, a.x).map_err(s)?;
    let dev = a.dev.unwrap_or(a.zeta * a.n as f64 / 2.0);
    let report = BoundReport::new(&pat, a.n, a.p, a.zeta, dev, a.beta).map_err(s)?;
    let sharpness_threshold = a.alpha.map(|al| sharpness_threshold(a.k, a.ell, al, a.n)).transpose().map_err(s)?;
    let out = BoundsOutput { report, sharpness_threshold };
    println!("{}", serde_json::to_string_pretty(&out).map_err(|e| e.to_string())?);
    Ok(ExitCode::SUCCESS)
}
