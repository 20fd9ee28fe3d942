//! The two circuits and the sample trajectories they produce.
//!
//! * [`GwCircuit`]: `r` devices drive `n` integrators through the rows of an SDP
//!   solution. Each sample resets the membranes, integrates one epoch and reads
//!   the membrane signs as a cut.
//! * [`TrevisanCircuit`]: `n` devices drive `n` integrators through the
//!   Trevisan matrix; the normalized membranes train an anti-Hebbian weight
//!   vector whose sign pattern is the cut.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::dense::DenseMatrix;
use crate::devices::{DevicePool, Encoding};
use crate::error::{Error, Result};
use crate::graph::{fill_random_labels, CutAssignment, Graph};
use crate::lif::{LifParams, LifPopulation};
use crate::oracles::HyperplaneRounder;
use crate::plasticity::{OjaState, DEFAULT_ETA0, DEFAULT_TAU};
use crate::rng::{self, Stream};
use crate::sdp::{self, SdpSolution, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitConfig {
    pub lif: LifParams,
    /// Integration steps per LIF-GW sample.
    pub epoch_len: usize,
    pub gw_weight_scale: f64,
    pub trevisan_weight_scale: f64,
    pub eta0: f64,
    pub tau: f64,
    /// Probability of raw state 1 for every device.
    pub device_bias: f64,
    pub rank: usize,
    pub solver: SolverConfig,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            lif: LifParams::default(),
            epoch_len: 100,
            gw_weight_scale: 1.0,
            trevisan_weight_scale: 1.0,
            eta0: DEFAULT_ETA0,
            tau: DEFAULT_TAU,
            device_bias: 0.5,
            rank: sdp::DEFAULT_RANK,
            solver: SolverConfig::default(),
        }
    }
}

impl CircuitConfig {
    fn pool(&self, count: usize, seed: u64) -> Result<DevicePool> {
        DevicePool::with_bias(
            vec![self.device_bias; count],
            Encoding::Centered,
            rng::stream(seed, Stream::Devices),
        )
    }
}

/// LIF-Goemans-Williamson sampling circuit.
pub struct GwCircuit<'g> {
    graph: &'g Graph,
    pool: DevicePool,
    pop: LifPopulation,
    epoch_len: usize,
    states: Vec<f64>,
}

impl<'g> GwCircuit<'g> {
    pub fn new(graph: &'g Graph, sol: &SdpSolution, cfg: &CircuitConfig, seed: u64) -> Result<Self> {
        if sol.n() != graph.n() {
            return Err(Error::input(format!(
                "SDP solution has {} rows for a graph with {} vertices",
                sol.n(),
                graph.n()
            )));
        }
        if cfg.epoch_len == 0 || cfg.gw_weight_scale.is_nan() || cfg.gw_weight_scale <= 0.0 {
            return Err(Error::input("epoch length and weight scale must be positive"));
        }
        let mut weights: DenseMatrix = sol.vectors.clone();
        weights.scale(cfg.gw_weight_scale);
        let pool = cfg.pool(sol.rank(), seed)?;
        Ok(Self {
            graph,
            states: vec![0.0; pool.len()],
            pool,
            pop: LifPopulation::new(weights, cfg.lif)?,
            epoch_len: cfg.epoch_len,
        })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn population(&self) -> &LifPopulation {
        &self.pop
    }

    /// One independent sample: reset, integrate an epoch, read signs.
    pub fn sample_into(&mut self, labels: &mut [i8]) {
        self.pop.reset();
        for _ in 0..self.epoch_len {
            self.pool.sample_into(&mut self.states);
            self.pop.step_unchecked(&self.states);
        }
        self.pop.read_signs_into(labels);
    }

    pub fn gw_sample_cut(&mut self) -> CutAssignment {
        let mut labels = vec![0i8; self.graph.n()];
        self.sample_into(&mut labels);
        CutAssignment::from_labels_unchecked(labels)
    }
}

/// LIF-Trevisan learning circuit.
pub struct TrevisanCircuit<'g> {
    graph: &'g Graph,
    pool: DevicePool,
    pop: LifPopulation,
    oja: OjaState,
    states: Vec<f64>,
}

impl<'g> TrevisanCircuit<'g> {
    pub fn new(graph: &'g Graph, cfg: &CircuitConfig, seed: u64) -> Result<Self> {
        if cfg.trevisan_weight_scale.is_nan() || cfg.trevisan_weight_scale <= 0.0 {
            return Err(Error::input("weight scale must be positive"));
        }
        let n = graph.n();
        let pop = LifPopulation::new(graph.trevisan_sparse(cfg.trevisan_weight_scale), cfg.lif)?;
        // membranes / √κ have covariance W Σ_s Wᵀ
        let input_scale = 1.0 / cfg.lif.stationary_scale().sqrt();
        let mut init = rng::stream(seed, Stream::WeightInit);
        let oja = OjaState::random(n, cfg.eta0, cfg.tau, input_scale, &mut init)?;
        Ok(Self {
            graph,
            pool: cfg.pool(n, seed)?,
            pop,
            oja,
            states: vec![0.0; n],
        })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn population(&self) -> &LifPopulation {
        &self.pop
    }

    pub fn weights(&self) -> &[f64] {
        self.oja.weights()
    }

    pub fn steps(&self) -> u64 {
        self.oja.updates()
    }

    /// One device draw, one LIF step, one anti-Hebbian update.
    pub fn trevisan_step(&mut self) -> Result<()> {
        self.pool.sample_into(&mut self.states);
        self.pop.step_unchecked(&self.states);
        self.oja.anti_oja_update(self.pop.potentials())
    }

    /// Sign cut of the current weights; does not disturb the circuit.
    pub fn trevisan_read_cut(&self) -> CutAssignment {
        cut_from_weights(self.oja.weights())
    }
}

/// `+1` for strictly positive (excitatory) weights, `-1` otherwise.
pub fn cut_from_weights(w: &[f64]) -> CutAssignment {
    CutAssignment::from_signs(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    LifGw,
    LifTrevisan,
    SolverRounding,
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::LifGw,
        Method::LifTrevisan,
        Method::SolverRounding,
        Method::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::LifGw => "lif-gw",
            Method::LifTrevisan => "lif-trevisan",
            Method::SolverRounding => "solver-rounding",
            Method::Random => "random",
        }
    }

    pub fn needs_sdp(self) -> bool {
        matches!(self, Method::LifGw | Method::SolverRounding)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lif-gw" | "gw" => Ok(Method::LifGw),
            "lif-trevisan" | "trevisan" => Ok(Method::LifTrevisan),
            "solver-rounding" | "solver" => Ok(Method::SolverRounding),
            "random" => Ok(Method::Random),
            other => Err(Error::input(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub samples: u64,
    pub best_cut: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutTrajectory {
    pub method: Method,
    pub graph_id: String,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
}

impl CutTrajectory {
    pub fn final_best(&self) -> usize {
        self.checkpoints.last().map_or(0, |c| c.best_cut)
    }

    /// `(samples, best_cut)` pairs, without timing.
    pub fn cut_series(&self) -> Vec<(u64, usize)> {
        self.checkpoints.iter().map(|c| (c.samples, c.best_cut)).collect()
    }
}

/// Powers of two up to `total`, plus `total` itself when it is not one.
pub fn checkpoint_schedule(total: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..64).map(|k| 1u64 << k).take_while(|&p| p <= total).collect();
    if total > 0 && !total.is_power_of_two() {
        out.push(total);
    }
    out
}

/// Runs `total` samples of `method` on `g`, tracking the best cut at each
/// checkpoint. LIF-GW and solver rounding use `sdp` when given, otherwise they
/// solve the relaxation with `cfg.solver`. LIF-Trevisan takes one learning step
/// per sample and reads its cut only at checkpoints.
pub fn run_trajectory(
    method: Method,
    g: &Graph,
    graph_id: &str,
    total: u64,
    seed: u64,
    cfg: &CircuitConfig,
    sdp: Option<&SdpSolution>,
) -> Result<CutTrajectory> {
    if total == 0 {
        return Err(Error::input("a trajectory needs at least one sample"));
    }
    let solved;
    let sol = match (method.needs_sdp(), sdp) {
        (true, Some(s)) => Some(s),
        (true, None) => {
            solved = sdp::solve_gw_sdp(g, cfg.rank, &cfg.solver)?;
            Some(&solved)
        }
        (false, _) => None,
    };

    let schedule = checkpoint_schedule(total);
    let mut next = schedule.iter().copied().peekable();
    let mut checkpoints = Vec::with_capacity(schedule.len());
    let mut best = 0usize;
    let mut labels = vec![0i8; g.n()];
    let start = Instant::now();

    let record = |samples: u64, best: usize, checkpoints: &mut Vec<Checkpoint>| {
        checkpoints.push(Checkpoint {
            samples,
            best_cut: best,
            elapsed: start.elapsed(),
        });
    };

    match method {
        Method::LifGw => {
            let mut circuit = GwCircuit::new(g, sol.expect("solution"), cfg, seed)?;
            for s in 1..=total {
                circuit.sample_into(&mut labels);
                best = best.max(g.cut_value_unchecked(&labels));
                if next.next_if_eq(&s).is_some() {
                    record(s, best, &mut checkpoints);
                }
            }
        }
        Method::SolverRounding => {
            let mut rounder = HyperplaneRounder::new(sol.expect("solution"), seed);
            for s in 1..=total {
                rounder.sample_into(&mut labels);
                best = best.max(g.cut_value_unchecked(&labels));
                if next.next_if_eq(&s).is_some() {
                    record(s, best, &mut checkpoints);
                }
            }
        }
        Method::Random => {
            let mut rng = rng::stream(seed, Stream::RandomCut);
            for s in 1..=total {
                fill_random_labels(&mut rng, &mut labels);
                best = best.max(g.cut_value_unchecked(&labels));
                if next.next_if_eq(&s).is_some() {
                    record(s, best, &mut checkpoints);
                }
            }
        }
        Method::LifTrevisan => {
            let mut circuit = TrevisanCircuit::new(g, cfg, seed)?;
            for s in 1..=total {
                circuit.trevisan_step()?;
                if next.next_if_eq(&s).is_some() {
                    let cut = circuit.trevisan_read_cut();
                    best = best.max(g.cut_value_unchecked(cut.labels()));
                    record(s, best, &mut checkpoints);
                }
            }
        }
    }

    Ok(CutTrajectory {
        method,
        graph_id: graph_id.to_string(),
        seed,
        checkpoints,
    })
}
