//! Low-rank Goemans-Williamson relaxation solved by Riemannian gradient ascent
//! on a product of unit spheres.
//!
//! Maximizes `f(W) = Σ_{ij∈E} (1 - w_i·w_j) / 2` over `n × r` matrices with unit
//! rows. The Euclidean gradient of row `i` is `-½ (A W)_i`; the radial part is
//! projected out and steps are retracted by renormalizing each row. Each step
//! is found by Armijo backtracking; the first trial step is
//! [`SolverConfig::step0`], later ones are Barzilai–Borwein estimates.

use std::io::{BufRead, Write};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, Stream};

pub const DEFAULT_RANK: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Riemannian gradient norm at which the ascent stops.
    pub tol: f64,
    /// Iteration cap; `None` means `50 * n`.
    pub max_iters: Option<usize>,
    pub step0: f64,
    /// Sufficient-increase constant of the Armijo test.
    pub armijo: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: None,
            step0: 1.0,
            armijo: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    /// One unit row per vertex.
    pub vectors: DenseMatrix,
    pub objective: f64,
    /// Riemannian gradient norm at exit (NaN when loaded from a file).
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SdpSolution {
    /// Wraps externally supplied vectors, normalizing every row.
    pub fn from_vectors(g: &Graph, mut vectors: DenseMatrix) -> Result<Self> {
        if vectors.rows() != g.n() || vectors.cols() == 0 {
            return Err(Error::input(format!(
                "expected {} rows of positive width, got {}x{}",
                g.n(),
                vectors.rows(),
                vectors.cols()
            )));
        }
        normalize_rows(&mut vectors)?;
        let objective = objective_of(g, &vectors);
        Ok(Self {
            vectors,
            objective,
            grad_norm: f64::NAN,
            iterations: 0,
            converged: true,
        })
    }

    pub fn n(&self) -> usize {
        self.vectors.rows()
    }

    pub fn rank(&self) -> usize {
        self.vectors.cols()
    }

    /// Text form: a `n r objective` header then one row of `r` values per vertex,
    /// all at 17 significant digits.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {:.16e}", self.n(), self.rank(), self.objective)?;
        for i in 0..self.n() {
            let row: Vec<String> = self.vectors.row(i).iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate().filter(|(_, l)| match l {
            Ok(l) => !l.trim().is_empty(),
            Err(_) => true,
        });
        let (_, header) = lines.next().ok_or_else(|| Error::input("empty SDP solution file"))?;
        let header = header?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let [n, r, objective] = head[..] else {
            return Err(Error::parse(1, "header must be `n r objective`"));
        };
        let n: usize = n.parse().map_err(|_| Error::parse(1, "invalid n"))?;
        let r: usize = r.parse().map_err(|_| Error::parse(1, "invalid r"))?;
        let objective: f64 = objective.parse().map_err(|_| Error::parse(1, "invalid objective"))?;

        let mut data = Vec::with_capacity(n * r);
        for _ in 0..n {
            let (k, line) = lines
                .next()
                .ok_or_else(|| Error::input(format!("expected {n} vector rows")))?;
            let line = line?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(k + 1, "invalid number"))?;
            if row.len() != r {
                return Err(Error::parse(k + 1, format!("expected {r} values, found {}", row.len())));
            }
            data.extend(row);
        }
        if let Some((k, _)) = lines.next() {
            return Err(Error::parse(k + 1, "trailing data after vector rows"));
        }
        let vectors = DenseMatrix::from_row_major(n, r, data)?;
        for i in 0..n {
            let norm = vectors.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::input(format!("row {i} has norm {norm}, expected 1")));
            }
        }
        Ok(Self {
            vectors,
            objective,
            grad_norm: f64::NAN,
            iterations: 0,
            converged: true,
        })
    }
}

/// Recomputes `Σ_{ij∈E} (1 - w_i·w_j) / 2` from the solution vectors.
pub fn sdp_objective(g: &Graph, sol: &SdpSolution) -> Result<f64> {
    if sol.vectors.rows() != g.n() {
        return Err(Error::input(format!(
            "solution has {} rows but the graph has {} vertices",
            sol.vectors.rows(),
            g.n()
        )));
    }
    Ok(objective_of(g, &sol.vectors))
}

fn objective_of(g: &Graph, w: &DenseMatrix) -> f64 {
    g.edges()
        .iter()
        .map(|&(i, j)| 0.5 * (1.0 - dot(w.row(i), w.row(j))))
        .sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize_rows(w: &mut DenseMatrix) -> Result<()> {
    for i in 0..w.rows() {
        let row = w.row_mut(i);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::input(format!("row {i} cannot be normalized (norm {norm})")));
        }
        row.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(())
}

/// Rank actually used: `r` clamped to `max(2, n)` on tiny graphs.
pub fn effective_rank(n: usize, r: usize) -> usize {
    r.min(n.max(2))
}

pub fn solve_gw_sdp(g: &Graph, r: usize, cfg: &SolverConfig) -> Result<SdpSolution> {
    if g.m() == 0 {
        return Err(Error::input("the relaxation needs at least one edge"));
    }
    if r < 2 {
        return Err(Error::input(format!("rank must be at least 2, got {r}")));
    }
    if !(cfg.tol > 0.0 && cfg.step0 > 0.0) {
        return Err(Error::input("tolerance and initial step must be positive"));
    }
    let n = g.n();
    let r = effective_rank(n, r);
    let max_iters = cfg.max_iters.unwrap_or(50 * n);

    let mut init = rng::stream(cfg.seed, Stream::SdpInit);
    let mut w = DenseMatrix::zeros(n, r);
    for i in 0..n {
        w.row_mut(i).copy_from_slice(&rng::unit_sphere(&mut init, r));
    }
    let mut grad = DenseMatrix::zeros(n, r);
    let mut prev_grad = DenseMatrix::zeros(n, r);
    let mut trial = DenseMatrix::zeros(n, r);
    let mut grad_norm = riemannian_gradient(g, &w, &mut grad);
    let mut trial_step = cfg.step0;
    let mut iterations = 0;
    let mut converged = false;

    loop {
        if grad_norm <= cfg.tol {
            converged = true;
            break;
        }
        if iterations >= max_iters {
            break;
        }
        let sq = grad_norm * grad_norm;
        let mut step = trial_step;
        let accepted = loop {
            retract(&w, &grad, step, &mut trial);
            let gain = objective_change(g, &w, &trial);
            if gain >= cfg.armijo * step * sq {
                break Some(gain);
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some(gain) = accepted else {
            // no ascent left at floating-point resolution
            break;
        };
        std::mem::swap(&mut w, &mut trial);
        std::mem::swap(&mut grad, &mut prev_grad);
        debug_assert!(gain > 0.0, "ascent must be monotone");
        iterations += 1;
        grad_norm = riemannian_gradient(g, &w, &mut grad);
        trial_step = barzilai_borwein(&grad, &prev_grad, step).unwrap_or(cfg.step0);
    }

    Ok(SdpSolution {
        objective: objective_of(g, &w),
        vectors: w,
        grad_norm,
        iterations,
        converged,
    })
}

/// Rows of `w + step * dir`, renormalized onto the spheres.
fn retract(w: &DenseMatrix, dir: &DenseMatrix, step: f64, out: &mut DenseMatrix) {
    for i in 0..w.rows() {
        let dst = out.row_mut(i);
        for ((d, &x), &gx) in dst.iter_mut().zip(w.row(i)).zip(dir.row(i)) {
            *d = x + step * gx;
        }
        let norm = dst.iter().map(|x| x * x).sum::<f64>().sqrt();
        dst.iter_mut().for_each(|x| *x /= norm);
    }
}

/// `f(new) - f(old)` summed edge by edge, which stays accurate when the
/// objective itself is large.
fn objective_change(g: &Graph, old: &DenseMatrix, new: &DenseMatrix) -> f64 {
    g.edges()
        .iter()
        .map(|&(i, j)| 0.5 * (dot(old.row(i), old.row(j)) - dot(new.row(i), new.row(j))))
        .sum()
}

/// Barzilai–Borwein step `|s|² / |sᵀy|` from the last displacement
/// `s ≈ step * g_prev` and gradient change `y = g - g_prev`. Ascent needs
/// `sᵀy < 0`; otherwise the caller falls back to `step0`.
fn barzilai_borwein(grad: &DenseMatrix, prev: &DenseMatrix, step: f64) -> Option<f64> {
    let (mut ss, mut sy) = (0.0, 0.0);
    for (&g1, &g0) in grad.as_slice().iter().zip(prev.as_slice()) {
        let s = step * g0;
        ss += s * s;
        sy += s * (g1 - g0);
    }
    (sy < 0.0).then(|| (ss / -sy).clamp(1e-10, 1e6))
}

/// Writes the ascent direction (Riemannian gradient of `f`) into `out` and
/// returns its Frobenius norm.
fn riemannian_gradient(g: &Graph, w: &DenseMatrix, out: &mut DenseMatrix) -> f64 {
    let mut total = 0.0;
    for i in 0..g.n() {
        let row = out.row_mut(i);
        row.fill(0.0);
        for &j in g.neighbors(i) {
            for (o, &x) in row.iter_mut().zip(w.row(j)) {
                *o -= 0.5 * x;
            }
        }
        let radial = dot(row, w.row(i));
        for (o, &x) in row.iter_mut().zip(w.row(i)) {
            *o -= radial * x;
        }
        total += row.iter().map(|x| x * x).sum::<f64>();
    }
    total.sqrt()
}
