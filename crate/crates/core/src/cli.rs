//! Command-line front end. Every subcommand is a thin adapter over the library.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_experiment, summarize, write_summary, ExperimentConfig};
use crate::circuits::{run_trajectory, CircuitConfig, Method};
use crate::error::{Error, Result};
use crate::graph::{load_graph, write_edge_list, write_matrix_market, Graph, GraphFormat, IngestOptions};
use crate::lif::LifParams;
use crate::oracles::{brute_force_maxcut, spectral_cut};
use crate::sdp::{self, SdpSolution, SolverConfig};

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (rng ChaCha8Rng)");

#[derive(Debug, Parser)]
#[command(name = "stochcut", version = VERSION, about = "Stochastic LIF circuits for MAXCUT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an Erdős–Rényi graph
    GenEr(GenErArgs),
    /// Solve the low-rank MAXCUT relaxation
    SolveSdp(SolveSdpArgs),
    /// Run a cut sampler and print `samples best_cut` per checkpoint
    Run(RunArgs),
    /// Exact maximum cut by enumeration
    Exact(GraphArgs),
    /// Sign cut of the minimum Trevisan eigenvector
    Spectral(GraphArgs),
    /// Run an experiment described by a config file
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    #[value(name = "edge-list")]
    EdgeList,
    #[value(name = "mtx")]
    MatrixMarket,
}

impl From<FormatArg> for GraphFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::EdgeList => GraphFormat::EdgeList,
            FormatArg::MatrixMarket => GraphFormat::MatrixMarket,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Gw,
    Trevisan,
    Random,
    #[value(name = "solver-rounding")]
    SolverRounding,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Gw => Method::LifGw,
            MethodArg::Trevisan => Method::LifTrevisan,
            MethodArg::Random => Method::Random,
            MethodArg::SolverRounding => Method::SolverRounding,
        }
    }
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Edge list or Matrix Market file
    #[arg(long)]
    graph: PathBuf,
    /// Input format; inferred from the extension when omitted
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Edge-list vertex ids start at 0
    #[arg(long)]
    zero_indexed: bool,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GraphArgs {
    fn load(&self) -> Result<Graph> {
        let format = self
            .format
            .map_or_else(|| GraphFormat::from_path(&self.graph), Into::into);
        load_graph(
            &self.graph,
            format,
            &IngestOptions {
                one_indexed: !self.zero_indexed,
            },
        )
    }
}

#[derive(Debug, Args)]
struct GenErArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_probability)]
    p: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "edge-list")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveSdpArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = sdp::DEFAULT_RANK)]
    rank: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = SolverConfig::default().tol)]
    tol: f64,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 1 << 16)]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Precomputed relaxation (from solve-sdp); solved on the fly otherwise
    #[arg(long)]
    sdp: Option<PathBuf>,
    #[arg(long, default_value_t = sdp::DEFAULT_RANK)]
    rank: usize,
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<f64>,
    /// Integration steps per LIF-GW sample
    #[arg(long, default_value_t = CircuitConfig::default().epoch_len)]
    epoch: usize,
    #[arg(long, default_value_t = CircuitConfig::default().eta0)]
    eta0: f64,
    #[arg(long, default_value_t = CircuitConfig::default().tau)]
    tau: f64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output directory; overrides the config's `output`
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is outside [0, 1]"))
    }
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("{a} is outside (0, 1)"))
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code: 0 on success, 1 for usage or input errors, 2 for
/// numerical failure.
pub fn dispatch<W: Write, E: Write>(args: Vec<OsString>, out: &mut W, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn seed_or_default<E: Write>(seed: Option<u64>, err: &mut E) -> u64 {
    seed.unwrap_or_else(|| {
        let _ = writeln!(err, "seed 0 (default)");
        0
    })
}

fn emit<W: Write>(path: Option<&Path>, out: &mut W, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body)?,
        None => out.write_all(body)?,
    }
    Ok(())
}

fn execute<W: Write, E: Write>(command: Command, out: &mut W, err: &mut E) -> Result<i32> {
    let mut buf = Vec::new();
    match command {
        Command::GenEr(a) => {
            let seed = seed_or_default(a.seed, err);
            let g = Graph::erdos_renyi(a.n, a.p, seed)?;
            match a.format {
                FormatArg::EdgeList => write_edge_list(&g, &mut buf)?,
                FormatArg::MatrixMarket => write_matrix_market(&g, &mut buf)?,
            }
            emit(a.out.as_deref(), out, &buf)?;
        }
        Command::SolveSdp(a) => {
            let g = a.graph.load()?;
            let cfg = SolverConfig {
                tol: a.tol,
                max_iters: a.max_iters,
                seed: seed_or_default(a.seed, err),
                ..SolverConfig::default()
            };
            let sol = sdp::solve_gw_sdp(&g, a.rank, &cfg)?;
            sol.write_to(&mut buf)?;
            emit(a.graph.out.as_deref(), out, &buf)?;
            writeln!(
                err,
                "objective {:.9} grad_norm {:.3e} iterations {}",
                sol.objective, sol.grad_norm, sol.iterations
            )?;
            if !sol.converged {
                return Err(Error::Numerical(format!(
                    "solver stopped after {} iterations with gradient norm {:.3e}",
                    sol.iterations, sol.grad_norm
                )));
            }
        }
        Command::Run(a) => {
            let g = a.graph.load()?;
            let seed = seed_or_default(a.seed, err);
            let mut cfg = CircuitConfig {
                epoch_len: a.epoch,
                eta0: a.eta0,
                tau: a.tau,
                rank: a.rank,
                ..CircuitConfig::default()
            };
            if let Some(alpha) = a.alpha {
                cfg.lif = LifParams::with_alpha(alpha);
            }
            let sol = match &a.sdp {
                Some(path) => Some(SdpSolution::read_from(BufReader::new(fs::File::open(path)?))?),
                None => None,
            };
            let id = a
                .graph
                .graph
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let t = run_trajectory(a.method.into(), &g, &id, a.samples, seed, &cfg, sol.as_ref())?;
            for (samples, best) in t.cut_series() {
                writeln!(buf, "{samples} {best}")?;
            }
            emit(a.graph.out.as_deref(), out, &buf)?;
        }
        Command::Exact(a) => {
            let g = a.load()?;
            let (opt, witness) = brute_force_maxcut(&g)?;
            writeln!(buf, "opt {opt}\n{witness}")?;
            emit(a.out.as_deref(), out, &buf)?;
        }
        Command::Spectral(a) => {
            let g = a.load()?;
            let s = spectral_cut(&g)?;
            writeln!(
                buf,
                "cut {}\nmin_eigenvalue {:.12}\ndegenerate {}\n{}",
                g.cut_value(&s.cut)?,
                s.min_eigenvalue,
                s.degenerate,
                s.cut
            )?;
            emit(a.out.as_deref(), out, &buf)?;
        }
        Command::Bench(a) => {
            let cfg = ExperimentConfig::load(&a.config)?;
            let res = run_experiment(&cfg, a.jobs)?;
            match a.out.as_ref().or(cfg.output.as_ref()) {
                Some(dir) => {
                    res.write_to_dir(dir)?;
                    write_summary(&summarize(&res.rows)?, &mut *out)?;
                }
                None => {
                    out.write_all(res.csv().as_bytes())?;
                    err.write_all(res.metadata_text().as_bytes())?;
                }
            }
        }
    }
    Ok(0)
}
