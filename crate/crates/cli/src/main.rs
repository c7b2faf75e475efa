use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use phee_core::baselines::{celf_im, degree_topk, greedy_im, MonteCarloOracle};
use phee_core::diffusion::{edv, estimate_spread, DiffusionParams};
use phee_core::experiment::{
    emit_report, run_plan, wilcoxon_pair, write_ranks_csv, write_wilcoxon_csv, ExperimentPlan, ResultTable,
    DATA_DIR_ENV, REPORT_FILES,
};
use phee_core::graph::load_dataset;
use phee_core::pipeline::{run_phee, run_rde_stage, PheeParams};
use phee_core::ranking::{rank, RankMethod, DEFAULT_GCI_RADIUS};
use phee_core::stats::{friedman_ranks, PValueMethod};
use phee_core::{DirectionMode, Graph, SeedSet, VertexId};

#[derive(Parser)]
#[command(name = "phee", version, about = "Influence maximization under the Independent Cascade model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank vertices and print `original_id,score,rank` rows.
    Rank(RankArgs),
    /// Select a seed set.
    Seed(SeedArgs),
    /// Estimate the spread of a seed set by Monte-Carlo simulation.
    Simulate(SimulateArgs),
    /// Batch experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Rank statistics over a results table.
    #[command(subcommand)]
    Stats(StatsCommand),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list (plain or .gz). Relative paths that do not exist are
    /// looked up in the data directory.
    graph: PathBuf,
    /// Treat each line as an arc.
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value = "directed")]
    direction_mode: DirectionMode,
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
}

impl GraphArgs {
    fn load(&self) -> Result<Graph> {
        let path = match &self.data_dir {
            Some(dir) if self.graph.is_relative() && !self.graph.exists() => dir.join(&self.graph),
            _ => self.graph.clone(),
        };
        let (g, stats) = load_dataset(&path, self.directed, self.direction_mode)
            .with_context(|| format!("loading {}", path.display()))?;
        log::info!("n={} m={} duplicates={} self_loops={}", g.n(), g.m(), stats.duplicates, stats.self_loops);
        Ok(g)
    }
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value = "mdd")]
    method: RankMethod,
    #[arg(long, default_value_t = 0.7)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_GCI_RADIUS)]
    radius: usize,
    /// Print only the first N rows.
    #[arg(long)]
    top: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Phee,
    Celf,
    Greedy,
    Degree,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage {
    /// Stop after the evolutionary stage and print the candidate set.
    Rde,
    Full,
}

#[derive(Args)]
struct SeedArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(short, long)]
    k: usize,
    /// Activation probability.
    #[arg(short, long)]
    p: f64,
    #[arg(long, value_enum, default_value = "phee")]
    algo: Algo,
    #[arg(long, value_enum, default_value = "full")]
    stage: Stage,
    #[arg(long, default_value = "mdd")]
    rank: RankMethod,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    gmax: Option<usize>,
    #[arg(long)]
    div_factor: Option<f64>,
    #[arg(long)]
    mp: Option<f64>,
    #[arg(long)]
    cp: Option<f64>,
    /// Pool ratio range as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    p_range: Option<Vec<f64>>,
    #[arg(long)]
    t_initial: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    moves_per_level: Option<usize>,
    #[arg(long)]
    max_levels: Option<usize>,
    /// Monte-Carlo runs per oracle query for CELF and greedy.
    #[arg(long, default_value_t = 10_000)]
    celf_runs: usize,
    /// Also estimate the spread of the result with this many runs.
    #[arg(long)]
    spread_runs: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl SeedArgs {
    fn phee_params(&self) -> Result<PheeParams<f64>> {
        let mut params = PheeParams::new(self.rank, self.k, self.p, self.master_seed);
        if let Some(v) = self.lambda {
            params.lambda = v;
        }
        if let Some(v) = self.radius {
            params.gci_radius = v;
        }
        let rde = &mut params.rde;
        if let Some(v) = self.pop {
            rde.pop = v;
        }
        if let Some(v) = self.gmax {
            rde.gmax = v;
        }
        if let Some(v) = self.div_factor {
            rde.div_factor = v;
        }
        if let Some(v) = self.mp {
            rde.mp = v;
        }
        if let Some(v) = self.cp {
            rde.cp = v;
        }
        if let Some(v) = &self.p_range {
            match v.as_slice() {
                [lo, hi] => rde.p_range = (*lo, *hi),
                _ => bail!("--p-range takes two values, as lo,hi"),
            }
        }
        let saa = &mut params.saa;
        if let Some(v) = self.t_initial {
            saa.t_initial = v;
        }
        if let Some(v) = self.t_final {
            saa.t_final = v;
        }
        if let Some(v) = self.theta {
            saa.theta = v;
            saa.min_decrement = v * std::f64::consts::LN_2;
        }
        if let Some(v) = self.moves_per_level {
            saa.moves_per_level = v;
        }
        if let Some(v) = self.max_levels {
            saa.max_levels = v;
        }
        params.rde.validate()?;
        params.saa.validate()?;
        Ok(params)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// File holding original vertex ids, either a seed-set JSON document or
    /// a whitespace/comma separated list.
    #[arg(long, conflicts_with = "ids", required_unless_present = "ids")]
    seeds: Option<PathBuf>,
    /// Original vertex ids, comma separated.
    #[arg(long, value_delimiter = ',')]
    ids: Option<Vec<u64>>,
    #[arg(short, long)]
    p: f64,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run every cell of a plan file and write reports.
    Run(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    plan: PathBuf,
    /// Report directory.
    #[arg(short, long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    mc_runs: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Comma separated seed sizes.
    #[arg(long)]
    seed_sizes: Option<String>,
    /// Comma separated algorithm names.
    #[arg(long)]
    algorithms: Option<String>,
    /// Override any plan key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Mean ranks per dataset and overall.
    Friedman { results: PathBuf },
    /// Signed-rank test of one algorithm against another on every dataset.
    Wilcoxon {
        results: PathBuf,
        /// `A,B`: A is the first sample.
        #[arg(long, value_delimiter = ',', required = true)]
        pair: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// auto, exact, normal or normal-uncorrected.
        #[arg(long, default_value = "auto")]
        method: PValueMethod,
    },
}

fn writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_rank(args: &RankArgs) -> Result<()> {
    let g = args.graph.load()?;
    let ordering = rank(&g, args.method, args.lambda, args.radius)?;
    let mut w = csv::Writer::from_writer(writer(&args.output)?);
    w.write_record(["original_id", "score", "rank"])?;
    let limit = args.top.unwrap_or(g.n()).min(g.n());
    for (pos, &v) in ordering.order[..limit].iter().enumerate() {
        let score = ordering.scores.as_ref().map(|s| s[v].to_string()).unwrap_or_default();
        w.write_record([g.label(v).to_string(), score, (pos + 1).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn labels(g: &Graph, seeds: &SeedSet) -> Vec<u64> {
    seeds.iter().map(|v| g.label(v)).collect()
}

fn cmd_seed(args: &SeedArgs) -> Result<()> {
    let g = args.graph.load()?;
    if args.stage == Stage::Rde {
        if args.algo != Algo::Phee {
            bail!("--stage rde only applies to --algo phee");
        }
        let (_, run) = run_rde_stage(&g, &args.phee_params()?)?;
        let mut w = csv::Writer::from_writer(writer(&args.output)?);
        w.write_record(["original_id", "count"])?;
        for (&v, &c) in run.candidates.vertices.iter().zip(&run.candidates.counts) {
            w.write_record([g.label(v).to_string(), c.to_string()])?;
        }
        w.flush()?;
        return Ok(());
    }

    let (name, seeds, extra) = match args.algo {
        Algo::Phee => {
            let params = args.phee_params()?;
            let out = run_phee(&g, &params)?;
            let extra = json!({
                "rank": params.rank,
                "candidates": out.candidates.len(),
                "initial_edv": out.saa.initial_edv,
                "levels": out.saa.levels,
                "accepted": out.saa.accepted,
            });
            (format!("{}-PHEE", params.rank.to_string().to_uppercase()), out.saa.seeds, extra)
        }
        Algo::Celf | Algo::Greedy => {
            let mut oracle = MonteCarloOracle { graph: &g, params: DiffusionParams::new(args.p, args.celf_runs, args.master_seed)? };
            let (seeds, trace) = if args.algo == Algo::Celf {
                celf_im(&g, args.k, &mut oracle)?
            } else {
                greedy_im(&g, args.k, &mut oracle)?
            };
            let name = if args.algo == Algo::Celf { "CELF" } else { "Greedy" };
            (name.to_string(), seeds, json!({ "evaluations": trace.evaluations }))
        }
        Algo::Degree => ("Degree".to_string(), degree_topk(&g, args.k)?, json!({})),
    };
    let spread = match args.spread_runs {
        Some(runs) => Some(estimate_spread(&g, seeds.slots(), &DiffusionParams::new(args.p, runs, args.master_seed)?)?),
        None => None,
    };
    let doc = json!({
        "algorithm": name,
        "k": args.k,
        "p": args.p,
        "master_seed": args.master_seed,
        "seeds": labels(&g, &seeds),
        "edv": edv(&g, seeds.slots(), args.p),
        "spread": spread,
        "details": extra,
    });
    let mut w = writer(&args.output)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}

fn read_seed_ids(path: &Path) -> Result<Vec<u64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(doc) = serde_json::from_str::<serde_json::Value>(&text) {
        if let Some(list) = doc.get("seeds").and_then(|s| s.as_array()) {
            return list
                .iter()
                .map(|v| v.as_u64().context("seed ids must be non-negative integers"))
                .collect();
        }
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().with_context(|| format!("bad seed id `{t}`")))
        .collect()
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let g = args.graph.load()?;
    let ids = match (&args.ids, &args.seeds) {
        (Some(ids), _) => ids.clone(),
        (None, Some(path)) => read_seed_ids(path)?,
        (None, None) => unreachable!("clap requires one of --ids or --seeds"),
    };
    let seeds: Vec<VertexId> = ids
        .iter()
        .map(|&id| g.vertex_of(id).with_context(|| format!("vertex {id} is not in the graph")))
        .collect::<Result<_>>()?;
    let est = estimate_spread(&g, &seeds, &DiffusionParams::new(args.p, args.runs, args.master_seed)?)?;
    println!("{}", serde_json::to_string_pretty(&est)?);
    Ok(())
}

/// Returns the number of failed cells.
fn cmd_experiment(args: &ExperimentArgs) -> Result<usize> {
    let mut plan = ExperimentPlan::load(&args.plan)?;
    if let Some(dir) = &args.data_dir {
        plan.data_dir = Some(dir.clone());
    }
    let mut set = |key: &str, value: String| plan.set(key, &value);
    if let Some(v) = args.master_seed {
        set("master_seed", v.to_string())?;
    }
    if let Some(v) = args.mc_runs {
        set("mc_runs", v.to_string())?;
    }
    if let Some(v) = args.repetitions {
        set("repetitions", v.to_string())?;
    }
    if let Some(v) = &args.seed_sizes {
        set("seed_sizes", v.clone())?;
    }
    if let Some(v) = &args.algorithms {
        set("algorithms", v.clone())?;
    }
    for kv in &args.overrides {
        let (k, v) = kv.split_once('=').with_context(|| format!("expected KEY=VALUE, got `{kv}`"))?;
        plan.set(k.trim(), v.trim())?;
    }
    plan.validate()?;

    let table = run_plan(&plan)?;
    emit_report(&plan, &table, &args.out)?;
    eprintln!(
        "{} of {} cells succeeded; reports ({}) in {}",
        table.rows.len(),
        plan.cell_count(),
        REPORT_FILES.join(", "),
        args.out.display()
    );
    Ok(table.failures.len())
}

fn cmd_stats(cmd: &StatsCommand) -> Result<()> {
    match cmd {
        StatsCommand::Friedman { results } => {
            let table = ResultTable::read_path(results)?;
            let ranks = friedman_ranks(&table.observations())?;
            write_ranks_csv(&ranks, io::stdout().lock())?;
            eprintln!("friedman chi-square = {:.4}, p = {:.4e}", ranks.chi_square, ranks.p_value);
        }
        StatsCommand::Wilcoxon { results, pair, alpha, method } => {
            if pair.len() != 2 {
                bail!("--pair takes exactly two algorithm names, as A,B");
            }
            let table = ResultTable::read_path(results)?;
            let rows = wilcoxon_pair(&table, &pair[0], &pair[1], *alpha, *method)?;
            write_wilcoxon_csv(&rows, io::stdout().lock())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Rank(a) => cmd_rank(a).map(|_| 0),
        Command::Seed(a) => cmd_seed(a).map(|_| 0),
        Command::Simulate(a) => cmd_simulate(a).map(|_| 0),
        Command::Experiment(ExperimentCommand::Run(a)) => cmd_experiment(a),
        Command::Stats(c) => cmd_stats(c).map(|_| 0),
    };
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
