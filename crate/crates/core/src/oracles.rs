//! Ground-truth computations used to validate the circuits: exhaustive MAXCUT,
//! Jacobi eigendecomposition, the spectral cut and Gaussian hyperplane rounding.
//!
//! None of these share code paths with the simulators they check.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{CutAssignment, Graph};
use crate::rng::{self, SimRng, Stream};
use crate::sdp::SdpSolution;

/// Largest graph accepted by [`brute_force_maxcut`].
pub const MAX_ENUMERATION_VERTICES: usize = 26;

/// Exact MAXCUT by Gray-code enumeration of the `2^(n-1)` cuts with vertex 0
/// fixed to `-1`. Each step flips one vertex and updates the cut in O(1) with
/// a popcount over adjacency bitmasks.
pub fn brute_force_maxcut(g: &Graph) -> Result<(usize, CutAssignment)> {
    let n = g.n();
    if n > MAX_ENUMERATION_VERTICES {
        return Err(Error::input(format!(
            "exhaustive search refused for n = {n} (limit {MAX_ENUMERATION_VERTICES})"
        )));
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let deg: Vec<i64> = (0..n).map(|v| g.degree(v) as i64).collect();

    // bit set = vertex on the +1 side; start with everything on -1 (cut 0)
    let mut plus: u32 = 0;
    let mut cut: i64 = 0;
    let mut best = (0i64, 0u32);
    for k in 1u64..(1u64 << (n.max(1) - 1)) {
        // Gray code: flip vertex 1 + (index of lowest set bit of k)
        let v = 1 + k.trailing_zeros() as usize;
        let bit = 1u32 << v;
        let same_side = if plus & bit != 0 {
            (adj[v] & plus).count_ones()
        } else {
            (adj[v] & !plus).count_ones()
        } as i64;
        cut += 2 * same_side - deg[v];
        plus ^= bit;
        if cut > best.0 {
            best = (cut, plus);
        }
    }
    let labels = (0..n).map(|v| if best.1 & (1 << v) != 0 { 1 } else { -1 }).collect();
    Ok((best.0 as usize, CutAssignment::from_labels_unchecked(labels)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: DenseMatrix,
}

impl EigenResult {
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    pub fn min_eigenvector(&self) -> Vec<f64> {
        self.eigenvector(0)
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<EigenResult> {
    if !m.is_square() {
        return Err(Error::input(format!("matrix is {}x{}, not square", m.rows(), m.cols())));
    }
    if !m.is_symmetric(1e-10 * m.max_abs().max(1.0)) {
        return Err(Error::input("matrix is not symmetric"));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);
    let scale: f64 = a.as_slice().iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(p, k)] = a[(k, p)];
                    a[(k, q)] = s * akp + c * akq;
                    a[(q, k)] = a[(k, q)];
                }
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCut {
    pub cut: CutAssignment,
    pub min_eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    /// The minimum eigenvalue has multiplicity above one, so the cut depends
    /// on which eigenvector of the eigenspace was returned.
    pub degenerate: bool,
}

/// Gap below which the two smallest eigenvalues count as equal.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Sign cut of the minimum eigenvector of the Trevisan matrix. Isolated
/// vertices are placed on the `-1` side.
pub fn spectral_cut(g: &Graph) -> Result<SpectralCut> {
    let t = g.trevisan_matrix();
    let eig = symmetric_eigen(&t.matrix)?;
    let u = eig.min_eigenvector();
    let labels = u
        .iter()
        .zip(&t.isolated)
        .map(|(&x, &iso)| if !iso && x > 0.0 { 1 } else { -1 })
        .collect();
    let degenerate = eig.eigenvalues.len() > 1 && eig.eigenvalues[1] - eig.eigenvalues[0] <= DEGENERACY_TOL;
    Ok(SpectralCut {
        cut: CutAssignment::from_labels_unchecked(labels),
        min_eigenvalue: eig.eigenvalues[0],
        eigenvector: u,
        degenerate,
    })
}

/// Goemans-Williamson rounding: labels are the signs of `w_i · g` for a
/// standard normal direction `g`.
pub fn reference_hyperplane_round(sol: &SdpSolution, seed: u64) -> CutAssignment {
    HyperplaneRounder::new(sol, seed).sample()
}

/// Stream of independent hyperplane roundings of one solution.
pub struct HyperplaneRounder<'a> {
    sol: &'a SdpSolution,
    rng: SimRng,
    direction: Vec<f64>,
}

impl<'a> HyperplaneRounder<'a> {
    pub fn new(sol: &'a SdpSolution, seed: u64) -> Self {
        Self {
            sol,
            rng: rng::stream(seed, Stream::Rounding),
            direction: vec![0.0; sol.rank()],
        }
    }

    pub fn sample_into(&mut self, labels: &mut [i8]) {
        rng::fill_normal(&mut self.rng, &mut self.direction);
        for (i, l) in labels.iter_mut().enumerate() {
            let proj: f64 = self
                .sol
                .vectors
                .row(i)
                .iter()
                .zip(&self.direction)
                .map(|(a, b)| a * b)
                .sum();
            *l = if proj > 0.0 { 1 } else { -1 };
        }
    }

    pub fn sample(&mut self) -> CutAssignment {
        let mut labels = vec![0i8; self.sol.n()];
        self.sample_into(&mut labels);
        CutAssignment::from_labels_unchecked(labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct evaluation of all 2^n labelings.
    fn naive_maxcut(g: &Graph) -> usize {
        (0u32..1 << g.n())
            .map(|mask| {
                let labels: Vec<i8> = (0..g.n()).map(|v| if mask >> v & 1 == 1 { 1 } else { -1 }).collect();
                g.cut_value(&CutAssignment::new(labels).unwrap()).unwrap()
            })
            .max()
            .unwrap()
    }

    #[test]
    fn maxcut_known_values() {
        assert_eq!(brute_force_maxcut(&Graph::complete(3).unwrap()).unwrap().0, 2);
        assert_eq!(brute_force_maxcut(&Graph::complete(4).unwrap()).unwrap().0, 4);
        assert_eq!(brute_force_maxcut(&Graph::complete(5).unwrap()).unwrap().0, 6);
        assert_eq!(brute_force_maxcut(&Graph::cycle(4).unwrap()).unwrap().0, 4);
        assert_eq!(brute_force_maxcut(&Graph::empty(1).unwrap()).unwrap().0, 0);
        for n in 2..=9 {
            assert_eq!(brute_force_maxcut(&Graph::complete(n).unwrap()).unwrap().0, n * n / 4);
        }
    }

    #[test]
    fn maxcut_refuses_large_graphs() {
        assert!(brute_force_maxcut(&Graph::empty(27).unwrap()).is_err());
        assert!(brute_force_maxcut(&Graph::erdos_renyi(26, 0.1, 1).unwrap()).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn maxcut_matches_naive(n in 1usize..11, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let g = Graph::erdos_renyi(n, p, seed).unwrap();
            let (opt, witness) = brute_force_maxcut(&g).unwrap();
            prop_assert_eq!(opt, naive_maxcut(&g));
            prop_assert_eq!(g.cut_value(&witness).unwrap(), opt);
            prop_assert_eq!(witness.labels()[0], -1);
        }
    }

    fn residual_ok(m: &DenseMatrix, eig: &EigenResult) -> bool {
        (0..m.rows()).all(|k| {
            let u = eig.eigenvector(k);
            let mu = m.mul_vec(&u);
            let lambda = eig.eigenvalues[k];
            let res = mu
                .iter()
                .zip(&u)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            res <= 1e-8 * lambda.abs().max(1.0)
        })
    }

    #[test]
    fn eigen_diagonal_and_2x2() {
        let d = symmetric_eigen(&DenseMatrix::from_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 3.0]);
        assert_eq!(
            d.min_eigenvector().iter().map(|x| x.abs()).collect::<Vec<_>>(),
            vec![0.0, 1.0]
        );

        let m = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = symmetric_eigen(&m).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14 && (e.eigenvalues[1] - 3.0).abs() < 1e-14);
        let u = e.min_eigenvector();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((u[0].abs() - s).abs() < 1e-14 && (u[0] + u[1]).abs() < 1e-14);
        assert!(residual_ok(&m, &e));
    }

    #[test]
    fn eigen_trevisan_c4() {
        let t = Graph::cycle(4).unwrap().trevisan_matrix();
        let e = symmetric_eigen(&t.matrix).unwrap();
        assert!(e.eigenvalues[0].abs() < 1e-14);
        let u = e.min_eigenvector();
        let sign = u[0].signum();
        for (k, x) in u.iter().enumerate() {
            let expected = if k % 2 == 0 { 0.5 } else { -0.5 };
            assert!((sign * x - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(symmetric_eigen(&m).is_err());
        assert!(symmetric_eigen(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn eigen_reconstruction_random() {
        let mut rng = rng::seeded(99);
        for n in [1usize, 2, 5, 17, 40, 100] {
            let mut raw = vec![0.0; n * n];
            rng::fill_normal(&mut rng, &mut raw);
            let mut m = DenseMatrix::from_row_major(n, n, raw).unwrap();
            for i in 0..n {
                for j in 0..i {
                    m[(j, i)] = m[(i, j)];
                }
            }
            let e = symmetric_eigen(&m).unwrap();
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let u = &e.eigenvectors;
            let recon = u
                .matmul(&DenseMatrix::from_diagonal(&e.eigenvalues))
                .unwrap()
                .matmul(&u.transpose())
                .unwrap();
            assert!(recon.max_abs_diff(&m) <= 1e-7, "n = {n}");
            let gram = u.transpose().matmul(u).unwrap();
            assert!(gram.max_abs_diff(&DenseMatrix::identity(n)) <= 1e-8);
            assert!(residual_ok(&m, &e));
        }
    }

    #[test]
    fn trevisan_spectrum_in_range() {
        for seed in 0..20u64 {
            let n = 2 + (seed as usize * 7) % 49;
            let g = Graph::erdos_renyi(n, 0.05 + 0.04 * seed as f64, seed).unwrap();
            let e = symmetric_eigen(&g.trevisan_matrix().matrix).unwrap();
            assert!(
                e.eigenvalues.iter().all(|&l| (-1e-9..=2.0 + 1e-9).contains(&l)),
                "{:?}",
                e.eigenvalues
            );
        }
    }

    #[test]
    fn spectral_cut_examples() {
        let c4 = Graph::cycle(4).unwrap();
        let sc = spectral_cut(&c4).unwrap();
        assert_eq!(c4.cut_value(&sc.cut).unwrap(), 4);
        assert!(!sc.degenerate);

        let k2 = Graph::complete(2).unwrap();
        let sc = spectral_cut(&k2).unwrap();
        assert!(sc.cut.same_partition(&CutAssignment::new(vec![1, -1]).unwrap()));
        assert_eq!(k2.cut_value(&sc.cut).unwrap(), 1);

        let e = Graph::empty(3).unwrap();
        let sc = spectral_cut(&e).unwrap();
        assert_eq!(sc.cut.labels(), &[-1, -1, -1]);
        assert!(sc.degenerate);
    }

    #[test]
    fn spectral_cut_never_beats_opt() {
        for seed in 0..30 {
            let g = Graph::erdos_renyi(12, 0.35, seed).unwrap();
            let opt = brute_force_maxcut(&g).unwrap().0;
            let sc = spectral_cut(&g).unwrap();
            assert!(g.cut_value(&sc.cut).unwrap() <= opt);
        }
    }

    fn two_rows(phi: f64) -> SdpSolution {
        let g = Graph::complete(2).unwrap();
        let rows = DenseMatrix::from_rows(&[[1.0, 0.0], [phi.cos(), phi.sin()]]).unwrap();
        SdpSolution::from_vectors(&g, rows).unwrap()
    }

    fn separation_frequency(sol: &SdpSolution, draws: usize, seed: u64) -> f64 {
        let mut r = HyperplaneRounder::new(sol, seed);
        let mut labels = [0i8; 2];
        (0..draws)
            .filter(|_| {
                r.sample_into(&mut labels);
                labels[0] != labels[1]
            })
            .count() as f64
            / draws as f64
    }

    #[test]
    fn rounding_identical_and_antipodal() {
        assert_eq!(separation_frequency(&two_rows(0.0), 10_000, 1), 0.0);
        assert_eq!(separation_frequency(&two_rows(std::f64::consts::PI), 10_000, 1), 1.0);
    }

    #[test]
    fn rounding_separates_with_angle_over_pi() {
        let draws = 100_000;
        for (k, phi) in [0.3f64, 1.0, 2.0, 2.8].into_iter().enumerate() {
            let p = phi / std::f64::consts::PI;
            let freq = separation_frequency(&two_rows(phi), draws, k as u64);
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((freq - p).abs() <= 3.0 * se, "phi {phi}: {freq} vs {p}");
        }
    }

    #[test]
    fn rounding_is_seeded() {
        let sol = crate::sdp::solve_gw_sdp(&Graph::cycle(7).unwrap(), 4, &Default::default()).unwrap();
        assert_eq!(reference_hyperplane_round(&sol, 5), reference_hyperplane_round(&sol, 5));
    }
}
