//! Experiment harness: ER grids and graph files across methods, with a
//! self-contained solver baseline, CSV rows and key=value metadata.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::circuits::{run_trajectory, CircuitConfig, CutTrajectory, Method};
use crate::error::{Error, Result};
use crate::graph::{load_graph, Graph, GraphFormat, IngestOptions};
use crate::lif::LifParams;
use crate::oracles::{brute_force_maxcut, HyperplaneRounder};
use crate::rng::{derive_seed, RNG_ALGORITHM};
use crate::sdp::{self, SdpSolution, SolverConfig};

pub const CSV_HEADER: &str = "graph_id,n,p,method,seed,samples,best_cut,solver_cut,ratio";

pub const FULL_N: [usize; 5] = [50, 100, 200, 350, 500];
pub const FULL_P: [f64; 4] = [0.1, 0.25, 0.5, 0.75];
pub const DESK_N: [usize; 3] = [20, 50, 100];
pub const DESK_P: [f64; 3] = [0.1, 0.25, 0.5];

/// Largest graph checked against enumeration in self-test mode.
pub const SELF_TEST_MAX_N: usize = 20;

/// Halvings of `eta0` tried after a learning run diverges.
const TREVISAN_RETRIES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Desk,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub er_n: Vec<usize>,
    pub er_p: Vec<f64>,
    pub graphs_per_cell: usize,
    pub base_seed: u64,
    pub graph_files: Vec<PathBuf>,
    pub one_indexed: bool,
    pub methods: Vec<Method>,
    pub samples: u64,
    pub circuit: CircuitConfig,
    pub output: Option<PathBuf>,
    /// Allows ER parameters outside the standard grid.
    pub custom_er: bool,
    pub self_test: bool,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let (er_n, er_p, graphs_per_cell, samples) = match preset {
            Preset::Desk => (DESK_N.to_vec(), DESK_P.to_vec(), 5, 1 << 16),
            Preset::Full => (FULL_N.to_vec(), FULL_P.to_vec(), 10, 1 << 20),
        };
        Self {
            preset,
            er_n,
            er_p,
            graphs_per_cell,
            base_seed: 0,
            graph_files: Vec::new(),
            one_indexed: true,
            methods: Method::ALL.to_vec(),
            samples,
            circuit: CircuitConfig::default(),
            output: None,
            custom_er: false,
            self_test: false,
        }
    }

    /// Parses flat `key = value` lines; list values are comma separated.
    /// `#` starts a comment. `preset` is applied before every other key.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, &str, &str)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, format!("expected key=value, got `{line}`")))?;
            let key = key.trim();
            if !seen.insert(key) {
                return Err(Error::parse(idx + 1, format!("duplicate key `{key}`")));
            }
            entries.push((idx + 1, key, value.trim()));
        }

        let mut cfg = match entries.iter().find(|e| e.1 == "preset") {
            Some(&(_, _, "desk")) | None => Self::preset(Preset::Desk),
            Some(&(_, _, "full")) => Self::preset(Preset::Full),
            Some(&(line, _, other)) => return Err(Error::parse(line, format!("unknown preset `{other}`"))),
        };
        let mut alpha = None;
        for &(line, key, value) in &entries {
            let err = |msg: String| Error::parse(line, format!("{key}: {msg}"));
            match key {
                "preset" => {}
                "er_n" => cfg.er_n = parse_list(value).map_err(err)?,
                "er_p" => cfg.er_p = parse_list(value).map_err(err)?,
                "graphs_per_cell" => cfg.graphs_per_cell = parse_one(value).map_err(err)?,
                "base_seed" => cfg.base_seed = parse_one(value).map_err(err)?,
                "graph_files" => {
                    cfg.graph_files = split_list(value).map(PathBuf::from).collect();
                }
                "one_indexed" => cfg.one_indexed = parse_one(value).map_err(err)?,
                "methods" => {
                    cfg.methods = split_list(value)
                        .map(|m| m.parse::<Method>().map_err(|e| err(e.to_string())))
                        .collect::<Result<_>>()?;
                }
                "samples" => cfg.samples = parse_one(value).map_err(err)?,
                "alpha" => alpha = Some(parse_one::<f64>(value).map_err(err)?),
                "epoch" => cfg.circuit.epoch_len = parse_one(value).map_err(err)?,
                "eta0" => cfg.circuit.eta0 = parse_one(value).map_err(err)?,
                "tau" => cfg.circuit.tau = parse_one(value).map_err(err)?,
                "rank" => cfg.circuit.rank = parse_one(value).map_err(err)?,
                "output" => cfg.output = (!value.is_empty()).then(|| PathBuf::from(value)),
                "custom_er" => cfg.custom_er = parse_one(value).map_err(err)?,
                "self_test" => cfg.self_test = parse_one(value).map_err(err)?,
                _ => return Err(Error::parse(line, format!("unknown key `{key}`"))),
            }
        }
        if let Some(a) = alpha {
            cfg.circuit.lif = LifParams::with_alpha(a);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::input("config lists no methods"));
        }
        if self.samples == 0 {
            return Err(Error::input("samples must be at least 1"));
        }
        if self.er_cells() == 0 && self.graph_files.is_empty() {
            return Err(Error::input("config has no graph sources"));
        }
        self.circuit.lif.validate()?;
        if self.circuit.epoch_len == 0 || self.circuit.rank < 2 {
            return Err(Error::input("epoch must be positive and rank at least 2"));
        }
        if !(self.circuit.eta0 > 0.0 && self.circuit.tau > 0.0) {
            return Err(Error::input("eta0 and tau must be positive"));
        }
        for &p in &self.er_p {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::input(format!("ER probability {p} outside [0, 1]")));
            }
        }
        if !self.custom_er {
            let standard_n = |n: &usize| DESK_N.contains(n) || FULL_N.contains(n);
            let standard_p = |p: &f64| FULL_P.contains(p);
            if let Some(n) = self.er_n.iter().find(|n| !standard_n(n)) {
                return Err(Error::input(format!("ER size {n} is off-grid; set custom_er = true")));
            }
            if let Some(p) = self.er_p.iter().find(|p| !standard_p(p)) {
                return Err(Error::input(format!(
                    "ER probability {p} is off-grid; set custom_er = true"
                )));
            }
        }
        Ok(())
    }

    fn er_cells(&self) -> usize {
        self.er_n.len() * self.er_p.len() * self.graphs_per_cell
    }

    /// `key=value` lines echoing every setting.
    pub fn echo(&self) -> Vec<(String, String)> {
        let join = |items: Vec<String>| items.join(",");
        let preset = match self.preset {
            Preset::Desk => "desk",
            Preset::Full => "full",
        };
        vec![
            ("preset".into(), preset.into()),
            ("er_n".into(), join(self.er_n.iter().map(|n| n.to_string()).collect())),
            ("er_p".into(), join(self.er_p.iter().map(|p| p.to_string()).collect())),
            ("graphs_per_cell".into(), self.graphs_per_cell.to_string()),
            ("base_seed".into(), self.base_seed.to_string()),
            (
                "graph_files".into(),
                join(self.graph_files.iter().map(|p| p.display().to_string()).collect()),
            ),
            ("one_indexed".into(), self.one_indexed.to_string()),
            (
                "methods".into(),
                join(self.methods.iter().map(|m| m.to_string()).collect()),
            ),
            ("samples".into(), self.samples.to_string()),
            ("alpha".into(), self.circuit.lif.alpha().to_string()),
            ("epoch".into(), self.circuit.epoch_len.to_string()),
            ("eta0".into(), self.circuit.eta0.to_string()),
            ("tau".into(), self.circuit.tau.to_string()),
            ("rank".into(), self.circuit.rank.to_string()),
            ("custom_er".into(), self.custom_er.to_string()),
            ("self_test".into(), self.self_test.to_string()),
        ]
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_one<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse `{value}`"))
}

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, String> {
    split_list(value).map(parse_one).collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Er { n: usize, p: f64, seed: u64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRecord {
    pub id: String,
    /// `None` for graph files.
    pub p: Option<f64>,
    pub n: usize,
    pub m: usize,
    pub sdp_objective: Option<f64>,
    pub sdp_grad_norm: Option<f64>,
    pub sdp_converged: Option<bool>,
    pub solver_cut: Option<usize>,
    /// Exact optimum, self-test mode only.
    pub opt: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub graph_id: String,
    pub n: usize,
    pub p: Option<f64>,
    pub method: Method,
    pub seed: u64,
    pub samples: u64,
    /// `None` when the graph or the run failed.
    pub best_cut: Option<usize>,
    pub solver_cut: Option<usize>,
    pub ratio: Option<f64>,
    pub wall_time: Duration,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.graph_id,
            self.n,
            self.p.map_or_else(|| "file".to_string(), |p| p.to_string()),
            self.method,
            self.seed,
            self.samples,
            opt(self.best_cut),
            opt(self.solver_cut),
            self.ratio.map(|r| format!("{r:.6}")).unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub graphs: Vec<GraphRecord>,
    pub rows: Vec<ResultRow>,
    pub metadata: Vec<(String, String)>,
}

impl ExperimentResult {
    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }

    pub fn metadata_text(&self) -> String {
        self.metadata.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k}={v}");
            s
        })
    }

    /// Rows at the last checkpoint of every job.
    pub fn final_rows(&self) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(i, r)| {
                self.rows
                    .get(i + 1)
                    .is_none_or(|next| next.graph_id != r.graph_id || next.method != r.method)
            })
            .map(|(_, r)| r)
            .collect()
    }

    /// Number of rows exceeding the exact optimum (self-test mode).
    pub fn self_test_violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| {
                let opt = self.graphs.iter().find(|g| g.id == r.graph_id).and_then(|g| g.opt);
                matches!((r.best_cut, opt), (Some(b), Some(o)) if b > o)
            })
            .count()
    }

    /// Writes `results.csv`, `metadata.txt` and `summary.txt` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("results.csv"), self.csv())?;
        fs::write(dir.join("metadata.txt"), self.metadata_text())?;
        let mut summary = Vec::new();
        write_summary(&summarize(&self.rows)?, &mut summary)?;
        fs::write(dir.join("summary.txt"), summary)?;
        Ok(())
    }
}

struct PreparedGraph {
    record: GraphRecord,
    graph: Option<Graph>,
    sdp: Option<SdpSolution>,
    setup_time: Duration,
}

fn sources(cfg: &ExperimentConfig) -> Vec<(String, Source)> {
    let mut out = Vec::new();
    for &n in &cfg.er_n {
        for &p in &cfg.er_p {
            for k in 0..cfg.graphs_per_cell {
                let id = format!("er-n{n}-p{p}-g{k}");
                let seed = derive_seed(cfg.base_seed, &["er", &id]);
                out.push((id, Source::Er { n, p, seed }));
            }
        }
    }
    for path in &cfg.graph_files {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        let id = stem.unwrap_or_else(|| path.display().to_string());
        out.push((id, Source::File(path.clone())));
    }
    out
}

fn prepare(cfg: &ExperimentConfig, id: &str, source: &Source) -> PreparedGraph {
    let start = Instant::now();
    let mut record = GraphRecord {
        id: id.to_string(),
        p: None,
        n: 0,
        m: 0,
        sdp_objective: None,
        sdp_grad_norm: None,
        sdp_converged: None,
        solver_cut: None,
        opt: None,
        error: None,
    };
    let loaded = match source {
        Source::Er { n, p, seed } => {
            record.p = Some(*p);
            Graph::erdos_renyi(*n, *p, *seed)
        }
        Source::File(path) => load_graph(
            path,
            GraphFormat::from_path(path),
            &IngestOptions {
                one_indexed: cfg.one_indexed,
            },
        ),
    };
    let graph = match loaded {
        Ok(g) => g,
        Err(e) => {
            record.error = Some(e.to_string());
            return PreparedGraph {
                record,
                graph: None,
                sdp: None,
                setup_time: start.elapsed(),
            };
        }
    };
    record.n = graph.n();
    record.m = graph.m();

    let solver = SolverConfig {
        seed: derive_seed(cfg.base_seed, &[id, "sdp"]),
        ..cfg.circuit.solver.clone()
    };
    let sdp = if graph.m() == 0 {
        record.solver_cut = Some(0);
        None
    } else {
        match sdp::solve_gw_sdp(&graph, cfg.circuit.rank, &solver) {
            Ok(sol) => {
                record.sdp_objective = Some(sol.objective);
                record.sdp_grad_norm = Some(sol.grad_norm);
                record.sdp_converged = Some(sol.converged);
                let mut rounder = HyperplaneRounder::new(&sol, derive_seed(cfg.base_seed, &[id, "solver-baseline"]));
                let mut labels = vec![0i8; graph.n()];
                let mut best = 0;
                for _ in 0..cfg.samples {
                    rounder.sample_into(&mut labels);
                    best = best.max(graph.cut_value_unchecked(&labels));
                }
                record.solver_cut = Some(best);
                Some(sol)
            }
            Err(e) => {
                record.error = Some(e.to_string());
                None
            }
        }
    };
    if cfg.self_test && graph.n() <= SELF_TEST_MAX_N {
        record.opt = brute_force_maxcut(&graph).ok().map(|(opt, _)| opt);
    }
    PreparedGraph {
        record,
        graph: Some(graph),
        sdp,
        setup_time: start.elapsed(),
    }
}

struct JobOutcome {
    seed: u64,
    trajectory: std::result::Result<CutTrajectory, String>,
    eta0: f64,
    wall_time: Duration,
}

fn run_job(cfg: &ExperimentConfig, prepared: &PreparedGraph, method: Method) -> JobOutcome {
    let id = &prepared.record.id;
    let seed = derive_seed(cfg.base_seed, &[id, method.name()]);
    let start = Instant::now();
    let mut circuit = cfg.circuit.clone();
    let trajectory = match &prepared.graph {
        None => Err(prepared.record.error.clone().unwrap_or_default()),
        Some(_) if method.needs_sdp() && prepared.sdp.is_none() => Err(prepared
            .record
            .error
            .clone()
            .unwrap_or_else(|| "no SDP solution".into())),
        Some(g) => {
            let mut attempt = 0;
            loop {
                match run_trajectory(method, g, id, cfg.samples, seed, &circuit, prepared.sdp.as_ref()) {
                    Err(Error::Numerical(_)) if method == Method::LifTrevisan && attempt < TREVISAN_RETRIES => {
                        circuit.eta0 /= 2.0;
                        attempt += 1;
                    }
                    other => break other.map_err(|e| e.to_string()),
                }
            }
        }
    };
    JobOutcome {
        seed,
        trajectory,
        eta0: circuit.eta0,
        wall_time: start.elapsed(),
    }
}

/// Runs every (graph, method) job on at most `jobs` threads (`0` picks the
/// rayon default). Output order is fixed by the config, not by completion.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
    let sources = sources(cfg);
    let (prepared, outcomes) = pool.install(|| {
        let prepared: Vec<PreparedGraph> = sources.par_iter().map(|(id, src)| prepare(cfg, id, src)).collect();
        let pairs: Vec<(usize, Method)> = (0..prepared.len())
            .flat_map(|g| cfg.methods.iter().map(move |&m| (g, m)))
            .collect();
        let outcomes: Vec<JobOutcome> = pairs.par_iter().map(|&(g, m)| run_job(cfg, &prepared[g], m)).collect();
        (prepared, outcomes)
    });

    let mut rows = Vec::new();
    let mut metadata: Vec<(String, String)> = cfg
        .echo()
        .into_iter()
        .map(|(k, v)| (format!("config.{k}"), v))
        .collect();
    metadata.push(("rng".into(), RNG_ALGORITHM.into()));
    metadata.push(("version".into(), env!("CARGO_PKG_VERSION").into()));
    for p in &prepared {
        let r = &p.record;
        let key = |k: &str| format!("graph.{}.{k}", r.id);
        metadata.push((key("n"), r.n.to_string()));
        metadata.push((key("m"), r.m.to_string()));
        if let Some(obj) = r.sdp_objective {
            metadata.push((key("sdp_objective"), format!("{obj:.9}")));
        }
        if let Some(gn) = r.sdp_grad_norm {
            metadata.push((key("sdp_grad_norm"), format!("{gn:.3e}")));
        }
        if let Some(c) = r.sdp_converged {
            metadata.push((key("sdp_converged"), c.to_string()));
        }
        if let Some(opt) = r.opt {
            metadata.push((key("opt"), opt.to_string()));
        }
        if let Some(e) = &r.error {
            metadata.push((key("error"), e.clone()));
        }
        metadata.push((key("setup_ms"), p.setup_time.as_millis().to_string()));
    }

    let pairs = (0..prepared.len()).flat_map(|g| cfg.methods.iter().map(move |&m| (g, m)));
    for ((g, method), outcome) in pairs.zip(outcomes) {
        let r = &prepared[g].record;
        let key = |k: &str| format!("job.{}.{}.{k}", r.id, method);
        metadata.push((key("seed"), outcome.seed.to_string()));
        metadata.push((key("wall_ms"), outcome.wall_time.as_millis().to_string()));
        if outcome.eta0 != cfg.circuit.eta0 {
            metadata.push((key("eta0"), outcome.eta0.to_string()));
        }
        let base = ResultRow {
            graph_id: r.id.clone(),
            n: r.n,
            p: r.p,
            method,
            seed: outcome.seed,
            samples: 0,
            best_cut: None,
            solver_cut: r.solver_cut,
            ratio: None,
            wall_time: outcome.wall_time,
        };
        match outcome.trajectory {
            Ok(t) => rows.extend(t.checkpoints.iter().map(|c| ResultRow {
                samples: c.samples,
                best_cut: Some(c.best_cut),
                ratio: r.solver_cut.filter(|&b| b > 0).map(|b| c.best_cut as f64 / b as f64),
                wall_time: c.elapsed,
                ..base.clone()
            })),
            Err(e) => {
                metadata.push((key("error"), e));
                rows.push(base);
            }
        }
    }

    let mut result = ExperimentResult {
        graphs: prepared.into_iter().map(|p| p.record).collect(),
        rows,
        metadata,
    };
    if cfg.self_test {
        let violations = result.self_test_violations();
        result
            .metadata
            .push(("self_test.violations".into(), violations.to_string()));
        if violations > 0 {
            return Err(Error::Numerical(format!("{violations} rows exceed the exact optimum")));
        }
    }
    Ok(result)
}

/// Mean and standard error of the mean; the error is undefined for one value.
pub fn mean_sem(values: &[f64]) -> (f64, Option<f64>) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, Some((var / k).sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub n: usize,
    pub p: f64,
    pub method: Method,
    pub samples: u64,
    pub mean_ratio: f64,
    pub sem: Option<f64>,
    pub graphs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub graph_id: String,
    pub method: Method,
    pub best_cut: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    /// Mean ratio per (n, p, method, checkpoint) over ER graphs.
    pub curves: Vec<CurvePoint>,
    /// Best cut per method on each graph file.
    pub table: Vec<TableEntry>,
}

impl Summary {
    pub fn final_point(&self, n: usize, p: f64, method: Method) -> Option<&CurvePoint> {
        self.curves
            .iter()
            .filter(|c| c.n == n && c.p == p && c.method == method)
            .max_by_key(|c| c.samples)
    }
}

pub fn summarize(rows: &[ResultRow]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::input("nothing to summarize"));
    }
    let mut summary = Summary::default();
    type Cell = (usize, f64, Method, u64);
    let mut groups: Vec<(Cell, Vec<f64>)> = Vec::new();
    for row in rows {
        match (row.p, row.ratio, row.best_cut) {
            (Some(p), Some(ratio), _) => {
                let key = (row.n, p, row.method, row.samples);
                match groups.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, v)) => v.push(ratio),
                    None => groups.push((key, vec![ratio])),
                }
            }
            (None, _, Some(best)) => {
                match summary
                    .table
                    .iter_mut()
                    .find(|t| t.graph_id == row.graph_id && t.method == row.method)
                {
                    Some(t) => t.best_cut = t.best_cut.max(best),
                    None => summary.table.push(TableEntry {
                        graph_id: row.graph_id.clone(),
                        method: row.method,
                        best_cut: best,
                    }),
                }
            }
            _ => {}
        }
    }
    summary.curves = groups
        .into_iter()
        .map(|((n, p, method, samples), v)| {
            let (mean_ratio, sem) = mean_sem(&v);
            CurvePoint {
                n,
                p,
                method,
                samples,
                mean_ratio,
                sem,
                graphs: v.len(),
            }
        })
        .collect();
    Ok(summary)
}

pub fn write_summary<W: Write>(summary: &Summary, mut out: W) -> Result<()> {
    if !summary.curves.is_empty() {
        writeln!(out, "n p method samples mean_ratio sem graphs")?;
        for c in &summary.curves {
            let sem = c.sem.map_or_else(|| "undefined".to_string(), |s| format!("{s:.6}"));
            writeln!(
                out,
                "{} {} {} {} {:.6} {} {}",
                c.n, c.p, c.method, c.samples, c.mean_ratio, sem, c.graphs
            )?;
        }
    }
    if !summary.table.is_empty() {
        writeln!(out, "graph method best_cut")?;
        for t in &summary.table {
            writeln!(out, "{} {} {}", t.graph_id, t.method, t.best_cut)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::write_edge_list;

    fn small(methods: &str, extra: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            "er_n = 20\ner_p = 0.5\ngraphs_per_cell = 2\nmethods = {methods}\nsamples = 64\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn defaults_follow_presets() {
        let desk = ExperimentConfig::parse("").unwrap();
        assert_eq!(desk.er_n, DESK_N);
        assert_eq!(desk.samples, 1 << 16);
        let full = ExperimentConfig::parse("samples = 8\npreset = full").unwrap();
        assert_eq!(full.er_n, FULL_N);
        assert_eq!(full.samples, 8);
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::parse("methods =").is_err());
        assert!(ExperimentConfig::parse("methods = annealing").is_err());
        assert!(ExperimentConfig::parse("samples = 0").is_err());
        assert!(ExperimentConfig::parse("colour = blue").is_err());
        assert!(ExperimentConfig::parse("samples = 1\nsamples = 2").is_err());
        assert!(ExperimentConfig::parse("er_n = 13").is_err());
        assert!(ExperimentConfig::parse("er_n = 13\ncustom_er = true").is_ok());
        assert!(ExperimentConfig::parse("er_p = 1.5\ncustom_er = true").is_err());
        assert!(matches!(
            ExperimentConfig::parse("no equals sign"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn random_on_k3_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k3.txt");
        write_edge_list(&Graph::complete(3).unwrap(), fs::File::create(&path).unwrap()).unwrap();
        let cfg = ExperimentConfig::parse(&format!(
            "er_n =\ngraph_files = {}\nmethods = random\nsamples = 16",
            path.display()
        ))
        .unwrap();
        let res = run_experiment(&cfg, 1).unwrap();
        let samples: Vec<u64> = res.rows.iter().map(|r| r.samples).collect();
        assert_eq!(samples, vec![1, 2, 4, 8, 16]);
        assert_eq!(res.rows.last().unwrap().best_cut, Some(2));
        assert!(res.csv().starts_with(CSV_HEADER));
        assert!(res.csv().lines().nth(1).unwrap().starts_with("k3,3,file,random,"));
        let s = summarize(&res.rows).unwrap();
        assert_eq!(
            s.table,
            vec![TableEntry {
                graph_id: "k3".into(),
                method: Method::Random,
                best_cut: 2
            }]
        );
    }

    #[test]
    fn er_cell_rows_bounded() {
        let res = run_experiment(&small("lif-gw,random", "self_test = true"), 2).unwrap();
        assert_eq!(res.rows.len(), 2 * 2 * 7);
        for row in &res.rows {
            let g = res.graphs.iter().find(|g| g.id == row.graph_id).unwrap();
            let (b, s) = (row.best_cut.unwrap(), row.solver_cut.unwrap());
            assert!(b <= g.m);
            assert!(row.ratio.unwrap() <= g.m as f64 / s as f64);
            assert!(b <= g.opt.unwrap());
        }
        assert_eq!(res.final_rows().len(), 4);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let cfg = small("lif-gw,lif-trevisan,solver-rounding,random", "");
        let a = run_experiment(&cfg, 3).unwrap();
        let b = run_experiment(&cfg, 1).unwrap();
        assert_eq!(a.csv(), b.csv());
    }

    #[test]
    fn missing_file_becomes_failure_row() {
        let cfg =
            ExperimentConfig::parse("er_n =\ngraph_files = /nonexistent/g.txt\nmethods = random,lif-gw\nsamples = 4")
                .unwrap();
        let res = run_experiment(&cfg, 1).unwrap();
        assert_eq!(res.rows.len(), 2);
        assert!(res.rows.iter().all(|r| r.best_cut.is_none()));
        assert!(res.metadata_text().contains("graph.g.error="));
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(mean_sem(&[0.7]), (0.7, None));
        let (m, s) = mean_sem(&[0.9; 10]);
        assert!((m - 0.9).abs() < 1e-12 && s.unwrap() < 1e-12);
        let (m, s) = mean_sem(&[0.8, 1.0]);
        assert!((m - 0.9).abs() < 1e-12);
        assert!((s.unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn metadata_records_seeds_and_solver() {
        let res = run_experiment(&small("random", ""), 1).unwrap();
        let text = res.metadata_text();
        assert!(text.contains("rng=ChaCha8Rng"));
        assert!(text.contains("job.er-n20-p0.5-g0.random.seed="));
        assert!(text.contains("graph.er-n20-p0.5-g1.sdp_grad_norm="));
        assert!(text.contains("config.methods=random"));
    }
}
