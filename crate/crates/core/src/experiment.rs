//! Batch evaluation: datasets × algorithms × seed sizes, Monte-Carlo spread
//! measurement, rank statistics and machine-readable reports.
//!
//! Plans are written as flat `key = value` text. Global keys come first;
//! each dataset lives in its own `[dataset NAME]` section:
//!
//! ```text
//! master_seed = 7
//! seed_sizes = 10, 30, 50
//! algorithms = mdd-phee, degree, celf
//!
//! [dataset netscience]
//! path = netscience.txt
//! p = 0.05
//! ```

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{celf_im, degree_topk, greedy_im, random_seeds, MonteCarloOracle};
use crate::diffusion::{estimate_spread, DiffusionParams};
use crate::error::{Error, Result};
use crate::graph::{load_dataset, DirectionMode, Graph};
use crate::pipeline::{derive_seed, label_hash, run_phee, PheeParams};
use crate::ranking::{RankMethod, DEFAULT_GCI_RADIUS};
use crate::rde::RdeParams;
use crate::saa::SaaParams;
use crate::seeds::SeedSet;
use crate::stats::{friedman_ranks, wilcoxon_with, Observation, PValueMethod, RankReport, WilcoxonResult};

/// Header of the result table CSV.
pub const RESULTS_HEADER: [&str; 6] = ["dataset", "algorithm", "k", "spread_mean", "spread_stderr", "seconds"];

/// Environment variable naming the default directory for dataset paths.
pub const DATA_DIR_ENV: &str = "PHEE_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Phee(RankMethod),
    Celf,
    Greedy,
    Degree,
    Random,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Phee(r) => write!(f, "{}-PHEE", r.to_string().to_uppercase()),
            Algorithm::Celf => f.write_str("CELF"),
            Algorithm::Greedy => f.write_str("Greedy"),
            Algorithm::Degree => f.write_str("Degree"),
            Algorithm::Random => f.write_str("Random"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "phee" => Ok(Algorithm::Phee(RankMethod::Mdd)),
            "celf" => Ok(Algorithm::Celf),
            "greedy" => Ok(Algorithm::Greedy),
            "degree" => Ok(Algorithm::Degree),
            "random" => Ok(Algorithm::Random),
            other => match other.strip_suffix("-phee") {
                Some(rank) => rank.parse().map(Algorithm::Phee),
                None => Err(Error::param(format!("unknown algorithm `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
    pub directed: bool,
    /// Uniform activation probability.
    pub p: f64,
    pub direction: DirectionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub datasets: Vec<DatasetSpec>,
    pub algorithms: Vec<Algorithm>,
    pub seed_sizes: Vec<usize>,
    /// Monte-Carlo runs for the final spread measurement.
    pub mc_runs: usize,
    /// Monte-Carlo runs per CELF/greedy oracle query.
    pub celf_runs: usize,
    pub master_seed: u64,
    pub repetitions: usize,
    pub lambda: f64,
    pub gci_radius: usize,
    /// Template for the evolution stage; `k` and `p` are set per cell.
    pub rde: RdeParams<f64>,
    pub saa: SaaParams<f64>,
    /// Algorithm used as the first sample in Wilcoxon comparisons.
    pub reference: Option<Algorithm>,
    pub alpha: f64,
    pub wilcoxon: PValueMethod,
    /// When false, the `seconds` column is written as 0 so that reports are
    /// byte-reproducible.
    pub record_timing: bool,
    pub data_dir: Option<PathBuf>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            datasets: Vec::new(),
            algorithms: vec![Algorithm::Phee(RankMethod::Mdd)],
            seed_sizes: (1..=10).map(|i| i * 10).collect(),
            mc_runs: 1000,
            celf_runs: 10_000,
            master_seed: 0,
            repetitions: 1,
            lambda: 0.7,
            gci_radius: DEFAULT_GCI_RADIUS,
            rde: RdeParams::with_defaults(1, 0.01),
            saa: SaaParams::default(),
            reference: None,
            alpha: 0.05,
            wilcoxon: PValueMethod::Auto,
            record_timing: true,
            data_dir: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::param(format!("bad value `{value}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "d" => Ok(true),
        "false" | "no" | "0" | "u" => Ok(false),
        _ => Err(Error::param(format!("bad boolean `{value}` for `{key}`"))),
    }
}

impl ExperimentPlan {
    pub fn parse(text: &str) -> Result<Self> {
        let mut plan = ExperimentPlan::default();
        let mut section: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let wrap = |e: Error| Error::Parse { line: idx + 1, message: e.to_string() };
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = header
                    .trim()
                    .strip_prefix("dataset")
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| wrap(Error::param(format!("unknown section `[{header}]`"))))?;
                plan.datasets.push(DatasetSpec {
                    name: name.to_string(),
                    path: PathBuf::from(name),
                    directed: false,
                    p: 0.01,
                    direction: DirectionMode::Directed,
                });
                section = Some(plan.datasets.len() - 1);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| wrap(Error::param(format!("expected `key = value`, got `{line}`"))))?;
            let (key, value) = (key.trim(), value.trim());
            match section {
                Some(i) => plan.datasets[i].set(key, value).map_err(wrap)?,
                None => plan.set(key, value).map_err(wrap)?,
            }
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        let mut plan = Self::parse(&text)?;
        if plan.data_dir.is_none() {
            plan.data_dir = std::env::var_os(DATA_DIR_ENV)
                .map(PathBuf::from)
                .or_else(|| path.parent().map(Path::to_path_buf));
        }
        Ok(plan)
    }

    /// Sets one global key; used by the parser and for command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "master_seed" | "seed" => self.master_seed = parse_value(key, value)?,
            "mc_runs" | "runs" => self.mc_runs = parse_value(key, value)?,
            "celf_runs" => self.celf_runs = parse_value(key, value)?,
            "repetitions" => self.repetitions = parse_value(key, value)?,
            "seed_sizes" | "k" => self.seed_sizes = parse_list(key, value)?,
            "algorithms" => self.algorithms = parse_list(key, value)?,
            "lambda" => self.lambda = parse_value(key, value)?,
            "gci_radius" => self.gci_radius = parse_value(key, value)?,
            "pop" => self.rde.pop = parse_value(key, value)?,
            "gmax" => self.rde.gmax = parse_value(key, value)?,
            "div_factor" => self.rde.div_factor = parse_value(key, value)?,
            "mp" => self.rde.mp = parse_value(key, value)?,
            "cp" => self.rde.cp = parse_value(key, value)?,
            "p_range" => {
                let v: Vec<f64> = parse_list(key, value)?;
                match v.as_slice() {
                    [lo, hi] => self.rde.p_range = (*lo, *hi),
                    _ => return Err(Error::param("p_range takes two values: lo, hi")),
                }
            }
            "t_initial" => self.saa.t_initial = parse_value(key, value)?,
            "t_final" => self.saa.t_final = parse_value(key, value)?,
            "theta" => {
                self.saa.theta = parse_value(key, value)?;
                self.saa.min_decrement = self.saa.theta * std::f64::consts::LN_2;
            }
            "moves_per_level" | "n_moves" => self.saa.moves_per_level = parse_value(key, value)?,
            "min_decrement" => self.saa.min_decrement = parse_value(key, value)?,
            "max_levels" => self.saa.max_levels = parse_value(key, value)?,
            "reference" => self.reference = Some(parse_value(key, value)?),
            "alpha" => self.alpha = parse_value(key, value)?,
            "wilcoxon" => self.wilcoxon = value.parse()?,
            "record_timing" => self.record_timing = parse_bool(key, value)?,
            "data_dir" => self.data_dir = Some(PathBuf::from(value)),
            _ => return Err(Error::param(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed_sizes.is_empty() || self.seed_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("seed_sizes must be non-empty and strictly increasing"));
        }
        if self.seed_sizes[0] == 0 {
            return Err(Error::param("seed sizes must be positive"));
        }
        if self.mc_runs == 0 || self.celf_runs == 0 || self.repetitions == 0 {
            return Err(Error::param("mc_runs, celf_runs and repetitions must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::param("no algorithms listed"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::param("lambda must lie in [0, 1]"));
        }
        for d in &self.datasets {
            if !(d.p > 0.0 && d.p <= 1.0) {
                return Err(Error::param(format!("dataset {}: p must lie in (0, 1]", d.name)));
            }
        }
        self.saa.validate()?;
        let mut probe = self.rde;
        probe.p = 0.5;
        probe.validate()
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.data_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Number of (dataset, algorithm, k) cells.
    pub fn cell_count(&self) -> usize {
        self.datasets.len() * self.algorithms.len() * self.seed_sizes.len()
    }
}

impl DatasetSpec {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "path" => self.path = PathBuf::from(value),
            "directed" | "type" => self.directed = parse_bool(key, value)?,
            "p" | "ap" => self.p = parse_value(key, value)?,
            "direction_mode" => self.direction = value.parse()?,
            _ => return Err(Error::param(format!("unknown dataset key `{key}`"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub algorithm: String,
    pub k: usize,
    pub spread_mean: f64,
    pub spread_stderr: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub dataset: String,
    pub algorithm: String,
    pub k: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<CellFailure>,
}

impl ResultTable {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(RESULTS_HEADER)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
        Ok(ResultTable { rows, failures: Vec::new() })
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
        Self::read_csv(file)
    }

    pub fn observations(&self) -> Vec<Observation<'_>> {
        self.rows
            .iter()
            .map(|r| Observation { dataset: &r.dataset, algorithm: &r.algorithm, k: r.k, spread: r.spread_mean })
            .collect()
    }

    /// Spread curve of one algorithm on one dataset, ordered by k.
    pub fn series(&self, dataset: &str, algorithm: &str) -> Vec<(usize, f64)> {
        let mut s: Vec<_> = self
            .rows
            .iter()
            .filter(|r| r.dataset == dataset && r.algorithm == algorithm)
            .map(|r| (r.k, r.spread_mean))
            .collect();
        s.sort_by_key(|&(k, _)| k);
        s
    }

    pub fn datasets(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.dataset) {
                out.push(r.dataset.clone());
            }
        }
        out
    }

    pub fn algorithms(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.algorithm) {
                out.push(r.algorithm.clone());
            }
        }
        out
    }
}

/// Seed set for one algorithm on one graph. `seed` drives every random
/// choice the algorithm makes.
pub fn select_seeds(g: &Graph, algorithm: Algorithm, k: usize, p: f64, seed: u64, plan: &ExperimentPlan) -> Result<SeedSet> {
    match algorithm {
        Algorithm::Phee(rank) => {
            let mut params = PheeParams::new(rank, k, p, seed);
            params.lambda = plan.lambda;
            params.gci_radius = plan.gci_radius;
            params.rde = RdeParams { k, p, ..plan.rde };
            params.saa = plan.saa;
            Ok(run_phee(g, &params)?.saa.seeds)
        }
        Algorithm::Celf | Algorithm::Greedy => {
            let params = DiffusionParams::new(p, plan.celf_runs, seed)?;
            let mut oracle = MonteCarloOracle { graph: g, params };
            let (seeds, _) = if algorithm == Algorithm::Celf {
                celf_im(g, k, &mut oracle)?
            } else {
                greedy_im(g, k, &mut oracle)?
            };
            Ok(seeds)
        }
        Algorithm::Degree => degree_topk(g, k),
        Algorithm::Random => random_seeds(g, k, &mut ChaCha8Rng::seed_from_u64(seed)),
    }
}

struct Cell<'a> {
    dataset: &'a DatasetSpec,
    algorithm: Algorithm,
    k: usize,
}

/// Runs every cell of the plan. Cells execute concurrently; each draws its
/// randomness from seeds derived from the master seed and the cell
/// coordinates, so any cell can be re-run on its own with the same result.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ResultTable> {
    plan.validate()?;
    let graphs: HashMap<&str, std::result::Result<Graph, String>> = plan
        .datasets
        .iter()
        .map(|d| {
            let path = plan.resolve(&d.path);
            let loaded = load_dataset(&path, d.directed, d.direction).map(|(g, stats)| {
                info!(
                    "loaded {}: n={} m={} ({} duplicate, {} self-loop lines dropped)",
                    d.name,
                    g.n(),
                    g.m(),
                    stats.duplicates,
                    stats.self_loops
                );
                g
            });
            (d.name.as_str(), loaded.map_err(|e| e.to_string()))
        })
        .collect();

    let cells: Vec<Cell<'_>> = plan
        .datasets
        .iter()
        .flat_map(|d| {
            plan.algorithms
                .iter()
                .flat_map(move |&a| plan.seed_sizes.iter().map(move |&k| Cell { dataset: d, algorithm: a, k }))
        })
        .collect();

    let outcomes: Vec<std::result::Result<ResultRow, CellFailure>> = cells
        .par_iter()
        .map(|cell| {
            let fail = |error: String| CellFailure {
                dataset: cell.dataset.name.clone(),
                algorithm: cell.algorithm.to_string(),
                k: cell.k,
                error,
            };
            let g = graphs[cell.dataset.name.as_str()].as_ref().map_err(|e| fail(e.clone()))?;
            run_cell(g, plan, cell).map_err(|e| fail(e.to_string()))
        })
        .collect();

    let mut table = ResultTable::default();
    for o in outcomes {
        match o {
            Ok(row) => table.rows.push(row),
            Err(f) => {
                warn!("cell {}/{}/k={} failed: {}", f.dataset, f.algorithm, f.k, f.error);
                table.failures.push(f);
            }
        }
    }
    Ok(table)
}

/// Re-runs a single cell of the plan. Produces the same row as the
/// corresponding cell of [`run_plan`].
pub fn run_one(plan: &ExperimentPlan, dataset: &str, algorithm: Algorithm, k: usize) -> Result<ResultRow> {
    let spec = plan
        .datasets
        .iter()
        .find(|d| d.name == dataset)
        .ok_or_else(|| Error::param(format!("no dataset named `{dataset}` in plan")))?;
    let (g, _) = load_dataset(&plan.resolve(&spec.path), spec.directed, spec.direction)?;
    run_cell(&g, plan, &Cell { dataset: spec, algorithm, k })
}

fn run_cell(g: &Graph, plan: &ExperimentPlan, cell: &Cell<'_>) -> Result<ResultRow> {
    let name = label_hash(&cell.dataset.name);
    let algo = label_hash(&cell.algorithm.to_string());
    let p = cell.dataset.p;
    let mut means = Vec::with_capacity(plan.repetitions);
    let mut variance = 0.0;
    let mut seconds = 0.0;
    for rep in 0..plan.repetitions as u64 {
        let start = Instant::now();
        let seed = derive_seed(plan.master_seed, &[name, algo, cell.k as u64, rep]);
        let seeds = select_seeds(g, cell.algorithm, cell.k, p, seed, plan)?;
        seconds += start.elapsed().as_secs_f64();
        // evaluation streams are shared by all algorithms of a (dataset, k, rep)
        let eval_seed = derive_seed(plan.master_seed, &[name, label_hash("spread"), cell.k as u64, rep]);
        let est = estimate_spread(g, seeds.slots(), &DiffusionParams::new(p, plan.mc_runs, eval_seed)?)?;
        means.push(est.mean);
        variance += est.std_error * est.std_error;
    }
    let reps = plan.repetitions as f64;
    Ok(ResultRow {
        dataset: cell.dataset.name.clone(),
        algorithm: cell.algorithm.to_string(),
        k: cell.k,
        spread_mean: means.iter().sum::<f64>() / reps,
        spread_stderr: variance.sqrt() / reps,
        seconds: if plan.record_timing { seconds / reps } else { 0.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonRow {
    pub dataset: String,
    pub algorithm: String,
    pub reference: String,
    #[serde(flatten)]
    pub result: WilcoxonResult,
}

/// Wilcoxon test of `first` against `second` on every dataset, pairing
/// spreads by seed size.
pub fn wilcoxon_pair(
    table: &ResultTable,
    first: &str,
    second: &str,
    alpha: f64,
    method: PValueMethod,
) -> Result<Vec<WilcoxonRow>> {
    let mut out = Vec::new();
    for d in table.datasets() {
        let a = table.series(&d, first);
        let b = table.series(&d, second);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        let kb: HashMap<usize, f64> = b.into_iter().collect();
        let (x, y): (Vec<f64>, Vec<f64>) =
            a.iter().filter_map(|&(k, s)| kb.get(&k).map(|&t| (s, t))).unzip();
        let result = wilcoxon_with(&x, &y, alpha, method)?;
        out.push(WilcoxonRow { dataset: d, algorithm: second.to_string(), reference: first.to_string(), result });
    }
    if out.is_empty() {
        return Err(Error::param(format!("no dataset has results for both `{first}` and `{second}`")));
    }
    Ok(out)
}

/// Reference algorithm against every other algorithm.
pub fn wilcoxon_all(table: &ResultTable, reference: &str, alpha: f64, method: PValueMethod) -> Result<Vec<WilcoxonRow>> {
    let mut out = Vec::new();
    for other in table.algorithms().iter().filter(|a| a.as_str() != reference) {
        out.extend(wilcoxon_pair(table, reference, other, alpha, method)?);
    }
    Ok(out)
}

pub fn write_ranks_csv<W: std::io::Write>(ranks: &RankReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["algorithm".to_string()];
    header.extend(ranks.datasets.iter().cloned());
    header.push("overall".into());
    w.write_record(&header)?;
    for (a, name) in ranks.algorithms.iter().enumerate() {
        let mut rec = vec![name.clone()];
        rec.extend(ranks.mean_ranks.iter().map(|row| row[a].to_string()));
        rec.push(ranks.overall[a].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_wilcoxon_csv<W: std::io::Write>(rows: &[WilcoxonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "reference", "algorithm", "better", "worse", "ties", "p_value", "decision"])?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.reference.clone(),
            r.algorithm.clone(),
            r.result.better.to_string(),
            r.result.worse.to_string(),
            r.result.ties.to_string(),
            r.result.p_value.to_string(),
            r.result.decision.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format spread curves (k on the x axis, one series per algorithm
/// per dataset) with a 95% normal band.
pub fn write_curves_csv<W: std::io::Write>(table: &ResultTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "algorithm", "k", "spread", "lower95", "upper95"])?;
    for r in &table.rows {
        let half = 1.96 * r.spread_stderr;
        w.write_record([
            r.dataset.clone(),
            r.algorithm.clone(),
            r.k.to_string(),
            r.spread_mean.to_string(),
            (r.spread_mean - half).to_string(),
            (r.spread_mean + half).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub master_seed: u64,
    pub plan: &'a ExperimentPlan,
    pub results: &'a ResultTable,
    pub ranks: Option<&'a RankReport>,
    pub wilcoxon: &'a [WilcoxonRow],
}

/// Files produced by [`emit_report`].
pub const REPORT_FILES: [&str; 5] = ["results.csv", "curves.csv", "ranks.csv", "wilcoxon.csv", "report.json"];

/// Writes result, curve, rank and Wilcoxon CSVs plus a JSON report into
/// `dir`. Rank statistics are skipped when the grid is incomplete.
pub fn emit_report(plan: &ExperimentPlan, table: &ResultTable, dir: &Path) -> Result<(Option<RankReport>, Vec<WilcoxonRow>)> {
    fs::create_dir_all(dir).map_err(|source| Error::File { path: dir.to_path_buf(), source })?;
    let create = |name: &str| {
        let path = dir.join(name);
        fs::File::create(&path).map_err(|source| Error::File { path, source })
    };
    table.write_csv(create("results.csv")?)?;
    write_curves_csv(table, create("curves.csv")?)?;

    let ranks = match friedman_ranks(&table.observations()) {
        Ok(r) => Some(r),
        Err(e) => {
            warn!("rank statistics skipped: {e}");
            None
        }
    };
    if let Some(r) = &ranks {
        write_ranks_csv(r, create("ranks.csv")?)?;
    }

    let reference = plan
        .reference
        .or_else(|| plan.algorithms.first().copied())
        .map(|a| a.to_string());
    let wilcoxon = match reference {
        Some(r) if table.algorithms().len() > 1 && plan.seed_sizes.len() >= 5 => {
            wilcoxon_all(table, &r, plan.alpha, plan.wilcoxon).unwrap_or_else(|e| {
                warn!("wilcoxon skipped: {e}");
                Vec::new()
            })
        }
        _ => Vec::new(),
    };
    write_wilcoxon_csv(&wilcoxon, create("wilcoxon.csv")?)?;

    let report = Report {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        master_seed: plan.master_seed,
        plan,
        results: table,
        ranks: ranks.as_ref(),
        wilcoxon: &wilcoxon,
    };
    serde_json::to_writer_pretty(create("report.json")?, &report)?;
    Ok((ranks, wilcoxon))
}
