//! Undirected simple graphs, cut assignments and the derived Trevisan matrix.

mod io;

pub use io::{
    load_graph, parse_edge_list, parse_matrix_market, write_edge_list, write_matrix_market, GraphFormat, IngestOptions,
};

use std::collections::BTreeSet;

use rand::{Rng, RngCore};

use crate::dense::{CsrMatrix, DenseMatrix};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

/// Undirected simple graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted, each pair stored once with `i < j`.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from vertex pairs. Reverse and duplicate pairs are merged.
    pub fn from_edges<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::input("graph must have at least one vertex"));
        }
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::input(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::input(format!("self-loop at vertex {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        neighbors.iter_mut().for_each(|nb| nb.sort_unstable());
        Ok(Self { n, edges, neighbors })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_edges(n, std::iter::empty())
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::input("a cycle needs at least 3 vertices"));
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn adjacency(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// Number of edges whose endpoints carry different labels.
    pub fn cut_value(&self, cut: &CutAssignment) -> Result<usize> {
        if cut.len() != self.n {
            return Err(Error::input(format!(
                "cut has {} labels but the graph has {} vertices",
                cut.len(),
                self.n
            )));
        }
        Ok(self.cut_value_unchecked(cut.labels()))
    }

    pub(crate) fn cut_value_unchecked(&self, labels: &[i8]) -> usize {
        self.edges.iter().filter(|&&(i, j)| labels[i] != labels[j]).count()
    }

    /// `I + D^-1/2 A D^-1/2`, with zero normalized rows for isolated vertices.
    pub fn trevisan_matrix(&self) -> TrevisanMatrix {
        let inv_sqrt = self.inv_sqrt_degrees();
        let mut matrix = DenseMatrix::identity(self.n);
        for &(i, j) in &self.edges {
            let v = inv_sqrt[i] * inv_sqrt[j];
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
        TrevisanMatrix {
            matrix,
            isolated: (0..self.n).map(|v| self.degree(v) == 0).collect(),
        }
    }

    /// Sparse form of `scale * (I + D^-1/2 A D^-1/2)`.
    pub fn trevisan_sparse(&self, scale: f64) -> CsrMatrix {
        let inv_sqrt = self.inv_sqrt_degrees();
        let rows = (0..self.n)
            .map(|i| {
                std::iter::once((i, scale))
                    .chain(
                        self.neighbors[i]
                            .iter()
                            .map(|&j| (j, scale * inv_sqrt[i] * inv_sqrt[j])),
                    )
                    .collect()
            })
            .collect();
        CsrMatrix::from_row_entries(self.n, rows)
    }

    fn inv_sqrt_degrees(&self) -> Vec<f64> {
        (0..self.n)
            .map(|v| match self.degree(v) {
                0 => 0.0,
                d => 1.0 / (d as f64).sqrt(),
            })
            .collect()
    }

    /// Erdős–Rényi `G(n, p)`: every unordered pair independently with probability `p`.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::input(format!("edge probability {p} outside [0, 1]")));
        }
        let mut rng = rng::stream(seed, Stream::Graph);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    pairs.push((i, j));
                }
            }
        }
        Self::from_edges(n, pairs)
    }
}

/// Vertex labels in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CutAssignment(Vec<i8>);

impl CutAssignment {
    pub fn new(labels: Vec<i8>) -> Result<Self> {
        if let Some(pos) = labels.iter().position(|&l| l != 1 && l != -1) {
            return Err(Error::input(format!("label {} at vertex {pos} is not ±1", labels[pos])));
        }
        Ok(Self(labels))
    }

    /// `+1` where the value is strictly positive, `-1` otherwise.
    pub fn from_signs(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect())
    }

    pub(crate) fn from_labels_unchecked(labels: Vec<i8>) -> Self {
        debug_assert!(labels.iter().all(|&l| l == 1 || l == -1));
        Self(labels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[i8] {
        &self.0
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|l| -l).collect())
    }

    /// Same partition up to a global flip.
    pub fn same_partition(&self, other: &CutAssignment) -> bool {
        self == other || *self == other.flipped()
    }
}

impl std::fmt::Display for CutAssignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Uniformly random cut from a dedicated seed.
pub fn random_cut(n: usize, seed: u64) -> CutAssignment {
    let mut rng = rng::stream(seed, Stream::RandomCut);
    let mut labels = vec![0i8; n];
    fill_random_labels(&mut rng, &mut labels);
    CutAssignment(labels)
}

/// Fair ±1 labels, 64 per generator word.
pub(crate) fn fill_random_labels<R: RngCore + ?Sized>(rng: &mut R, labels: &mut [i8]) {
    for chunk in labels.chunks_mut(64) {
        let bits = rng.next_u64();
        for (k, l) in chunk.iter_mut().enumerate() {
            *l = if (bits >> k) & 1 == 1 { 1 } else { -1 };
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrevisanMatrix {
    pub matrix: DenseMatrix,
    /// Degree-zero vertices; their normalized-adjacency rows are zero.
    pub isolated: Vec<bool>,
}
