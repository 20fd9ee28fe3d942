//! Discrete-time population of leaky integrators driven by a device pool.
//!
//! Forward Euler on `C dV_i/dt = -V_i/R + Σ_α W_iα s_α`:
//!
//! ```text
//! V <- (1 - alpha) V + (dt / C) W s,    alpha = dt / (R C)
//! ```
//!
//! With i.i.d. device states of covariance `Σ_s` the stationary membrane
//! covariance is `κ W Σ_s Wᵀ`, `κ = (dt/C)² / (1 - (1 - alpha)²)`.

use crate::dense::{CsrMatrix, DenseMatrix};
use crate::error::{Error, Result};
use crate::graph::CutAssignment;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifParams {
    pub resistance: f64,
    pub capacitance: f64,
    pub dt: f64,
    /// Readout threshold; membranes strictly above it read as `+1`.
    pub threshold: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            resistance: 20.0,
            capacitance: 1.0,
            dt: 1.0,
            threshold: 0.0,
        }
    }
}

impl LifParams {
    /// Parameters with `dt = C = 1` and leak factor `alpha`.
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            resistance: 1.0 / alpha,
            ..Self::default()
        }
    }

    pub fn alpha(&self) -> f64 {
        self.dt / (self.resistance * self.capacitance)
    }

    pub fn drive(&self) -> f64 {
        self.dt / self.capacitance
    }

    /// Stationary variance per unit input variance.
    pub fn stationary_scale(&self) -> f64 {
        let decay = 1.0 - self.alpha();
        self.drive().powi(2) / (1.0 - decay * decay)
    }

    pub fn validate(&self) -> Result<()> {
        let alpha = self.alpha();
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
            return Err(Error::input(format!(
                "leak factor dt/(RC) = {alpha} must lie in (0, 1)"
            )));
        }
        if !(self.drive().is_finite() && self.threshold.is_finite()) {
            return Err(Error::input("non-finite LIF constants"));
        }
        Ok(())
    }
}

/// Device-to-neuron weights, `n × r`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

impl Weights {
    pub fn neurons(&self) -> usize {
        match self {
            Weights::Dense(m) => m.rows(),
            Weights::Sparse(m) => m.rows(),
        }
    }

    pub fn devices(&self) -> usize {
        match self {
            Weights::Dense(m) => m.cols(),
            Weights::Sparse(m) => m.cols(),
        }
    }

    fn apply(&self, s: &[f64], out: &mut [f64]) {
        match self {
            Weights::Dense(m) => m.mul_vec_into(s, out),
            Weights::Sparse(m) => m.mul_vec_into(s, out),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Weights::Dense(m) => m.clone(),
            Weights::Sparse(m) => m.to_dense(),
        }
    }
}

impl From<DenseMatrix> for Weights {
    fn from(m: DenseMatrix) -> Self {
        Weights::Dense(m)
    }
}

impl From<CsrMatrix> for Weights {
    fn from(m: CsrMatrix) -> Self {
        Weights::Sparse(m)
    }
}

#[derive(Debug, Clone)]
pub struct LifPopulation {
    weights: Weights,
    params: LifParams,
    potentials: Vec<f64>,
    decay: f64,
    drive: f64,
    input: Vec<f64>,
}

impl LifPopulation {
    pub fn new(weights: impl Into<Weights>, params: LifParams) -> Result<Self> {
        params.validate()?;
        let weights = weights.into();
        let n = weights.neurons();
        Ok(Self {
            weights,
            params,
            potentials: vec![0.0; n],
            decay: 1.0 - params.alpha(),
            drive: params.drive(),
            input: vec![0.0; n],
        })
    }

    pub fn neurons(&self) -> usize {
        self.weights.neurons()
    }

    pub fn devices(&self) -> usize {
        self.weights.devices()
    }

    pub fn params(&self) -> &LifParams {
        &self.params
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn potentials(&self) -> &[f64] {
        &self.potentials
    }

    pub fn set_potentials(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.neurons() {
            return Err(Error::input(format!(
                "expected {} potentials, got {}",
                self.neurons(),
                v.len()
            )));
        }
        self.potentials.copy_from_slice(v);
        Ok(())
    }

    pub fn reset(&mut self) {
        self.potentials.fill(0.0);
    }

    /// One Euler step with device states `s`; returns the new potentials.
    pub fn step(&mut self, s: &[f64]) -> Result<&[f64]> {
        if s.len() != self.devices() {
            return Err(Error::input(format!(
                "device state has {} entries, weights expect {}",
                s.len(),
                self.devices()
            )));
        }
        self.step_unchecked(s);
        Ok(&self.potentials)
    }

    #[inline]
    pub(crate) fn step_unchecked(&mut self, s: &[f64]) {
        self.weights.apply(s, &mut self.input);
        for (v, &i) in self.potentials.iter_mut().zip(&self.input) {
            *v = self.decay * *v + self.drive * i;
        }
    }

    /// `κ W Σ_s Wᵀ` for device covariance `Σ_s`.
    pub fn stationary_covariance(&self, devcov: &DenseMatrix) -> Result<DenseMatrix> {
        let r = self.devices();
        if devcov.rows() != r || devcov.cols() != r {
            return Err(Error::input(format!(
                "device covariance is {}x{}, expected {r}x{r}",
                devcov.rows(),
                devcov.cols()
            )));
        }
        if !devcov.is_symmetric(1e-12 * devcov.max_abs().max(1.0)) {
            return Err(Error::input("device covariance is not symmetric"));
        }
        let w = self.weights.to_dense();
        let mut cov = w.matmul(devcov)?.matmul(&w.transpose())?;
        cov.scale(self.params.stationary_scale());
        Ok(cov)
    }

    /// `+1` for membranes strictly above threshold, `-1` otherwise.
    pub fn read_signs(&self) -> CutAssignment {
        let mut labels = vec![0i8; self.neurons()];
        self.read_signs_into(&mut labels);
        CutAssignment::from_labels_unchecked(labels)
    }

    pub(crate) fn read_signs_into(&self, labels: &mut [i8]) {
        let theta = self.params.threshold;
        for (l, &v) in labels.iter_mut().zip(&self.potentials) {
            *l = if v > theta { 1 } else { -1 };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::DevicePool;
    use crate::rng;

    fn single(w: f64, alpha: f64) -> LifPopulation {
        LifPopulation::new(DenseMatrix::from_rows(&[[w]]).unwrap(), LifParams::with_alpha(alpha)).unwrap()
    }

    #[test]
    fn pure_leak_halves() {
        let mut pop = single(0.0, 0.5);
        pop.set_potentials(&[1.0]).unwrap();
        for k in 1..=10 {
            pop.step(&[1.0]).unwrap();
            assert_eq!(pop.potentials()[0], 0.5f64.powi(k));
        }
    }

    #[test]
    fn zero_input_scales_exactly() {
        let w = DenseMatrix::from_rows(&[[0.3, -1.0], [2.0, 0.5], [1.0, 1.0]]).unwrap();
        let mut pop = LifPopulation::new(w, LifParams::default()).unwrap();
        let v0 = [0.7, -3.1, 12.0];
        pop.set_potentials(&v0).unwrap();
        pop.step(&[0.0, 0.0]).unwrap();
        for (v, x) in pop.potentials().iter().zip(v0) {
            assert_eq!(*v, (1.0 - 0.05) * x);
        }
    }

    #[test]
    fn constant_drive_fixed_point() {
        let mut pop = single(1.0, 0.05);
        for _ in 0..2000 {
            pop.step(&[1.0]).unwrap();
        }
        assert!((pop.potentials()[0] - 20.0).abs() < 1e-9);
    }

    #[test]
    fn bounded_by_geometric_sum() {
        let w = DenseMatrix::from_rows(&[[0.5, -2.0, 1.0]]).unwrap();
        let mut pop = LifPopulation::new(w, LifParams::default()).unwrap();
        let mut pool = DevicePool::from_seed(3, 1);
        let bound = 3.5 / 0.05;
        for _ in 0..5000 {
            let s = pool.sample_step();
            let v = pop.step(&s).unwrap()[0];
            assert!(v.is_finite() && v.abs() <= bound);
        }
    }

    #[test]
    fn invalid_constants_and_dims() {
        assert!(LifPopulation::new(DenseMatrix::zeros(1, 1), LifParams::with_alpha(1.5)).is_err());
        assert!(LifPopulation::new(DenseMatrix::zeros(1, 1), LifParams::with_alpha(1.0)).is_err());
        let mut pop = single(1.0, 0.1);
        assert!(pop.step(&[1.0, 1.0]).is_err());
        assert!(pop.stationary_covariance(&DenseMatrix::identity(2)).is_err());
    }

    #[test]
    fn stationary_variance_closed_form() {
        // Σ (1-α)^{2k} = 1 / (1 - 0.95²)
        let pop = single(1.0, 0.05);
        let cov = pop.stationary_covariance(&DenseMatrix::identity(1)).unwrap();
        let series: f64 = (0..20_000).map(|k| 0.95f64.powi(2 * k)).sum();
        assert!((cov[(0, 0)] - series).abs() < 1e-9);
        assert!((cov[(0, 0)] - 10.256_410_256).abs() < 1e-8);
    }

    #[test]
    fn identical_and_opposite_rows() {
        let w = DenseMatrix::from_rows(&[[0.3, 0.8], [0.3, 0.8], [-0.3, -0.8]]).unwrap();
        let pop = LifPopulation::new(w, LifParams::default()).unwrap();
        let corr = pop
            .stationary_covariance(&DenseMatrix::identity(2))
            .unwrap()
            .covariance_to_correlation();
        assert!((corr[(0, 1)] - 1.0).abs() < 1e-14);
        assert!((corr[(0, 2)] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn doubling_weights_quadruples_covariance() {
        let w = DenseMatrix::from_rows(&[[0.3, -0.8, 0.1], [1.0, 0.2, -0.4]]).unwrap();
        let mut w2 = w.clone();
        w2.scale(2.0);
        let dev = DenseMatrix::identity(3);
        let a = LifPopulation::new(w, LifParams::default())
            .unwrap()
            .stationary_covariance(&dev)
            .unwrap();
        let b = LifPopulation::new(w2, LifParams::default())
            .unwrap()
            .stationary_covariance(&dev)
            .unwrap();
        let mut a4 = a.clone();
        a4.scale(4.0);
        assert!(b.max_abs_diff(&a4) < 1e-12);
        assert!(
            b.covariance_to_correlation()
                .max_abs_diff(&a.covariance_to_correlation())
                < 1e-12
        );
    }

    #[test]
    fn read_signs_examples() {
        let mut pop = LifPopulation::new(DenseMatrix::zeros(2, 1), LifParams::default()).unwrap();
        pop.set_potentials(&[0.3, -0.2]).unwrap();
        assert_eq!(pop.read_signs().labels(), &[1, -1]);
        pop.set_potentials(&[0.0, 0.0]).unwrap();
        assert_eq!(pop.read_signs().labels(), &[-1, -1]);
    }

    #[test]
    fn opposite_rows_read_opposite_signs() {
        let w = DenseMatrix::from_rows(&[[0.6, -0.3, 0.9], [-0.6, 0.3, -0.9]]).unwrap();
        let mut pop = LifPopulation::new(w, LifParams::default()).unwrap();
        let mut pool = DevicePool::from_seed(3, 12);
        for _ in 0..10_000 {
            let s = pool.sample_step();
            let v = pop.step(&s).unwrap();
            assert_eq!(v[1], -v[0]);
            let l = pop.read_signs();
            assert!(pop.potentials()[0] == 0.0 || l.labels()[0] == -l.labels()[1]);
        }
    }

    /// Empirical stationary covariance with batch-means standard errors.
    fn empirical(
        pop: &mut LifPopulation,
        pool: &mut DevicePool,
        steps: usize,
        batch: usize,
    ) -> (DenseMatrix, DenseMatrix, Vec<f64>, Vec<f64>) {
        let n = pop.neurons();
        let mut s = vec![0.0; pool.len()];
        for _ in 0..400 {
            pool.sample_into(&mut s);
            pop.step_unchecked(&s);
        }
        let batches = steps / batch;
        let mut batch_cov = vec![DenseMatrix::zeros(n, n); batches];
        let mut batch_mean = vec![vec![0.0; n]; batches];
        for b in 0..batches {
            for _ in 0..batch {
                pool.sample_into(&mut s);
                pop.step_unchecked(&s);
                let v = pop.potentials();
                for i in 0..n {
                    batch_mean[b][i] += v[i] / batch as f64;
                    for j in 0..n {
                        batch_cov[b][(i, j)] += v[i] * v[j] / batch as f64;
                    }
                }
            }
        }
        let nb = batches as f64;
        let mut cov = DenseMatrix::zeros(n, n);
        let mut se = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let vals: Vec<f64> = batch_cov.iter().map(|c| c[(i, j)]).collect();
                let mean = vals.iter().sum::<f64>() / nb;
                let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nb - 1.0);
                cov[(i, j)] = mean;
                se[(i, j)] = (var / nb).sqrt();
            }
        }
        let means: Vec<f64> = (0..n)
            .map(|i| batch_mean.iter().map(|m| m[i]).sum::<f64>() / nb)
            .collect();
        let mean_se = (0..n)
            .map(|i| {
                let var = batch_mean.iter().map(|m| (m[i] - means[i]).powi(2)).sum::<f64>() / (nb - 1.0);
                (var / nb).sqrt()
            })
            .collect();
        (cov, se, means, mean_se)
    }

    #[test]
    fn empirical_covariance_matches_closed_form() {
        let mut init = rng::seeded(31);
        let (n, r) = (5, 3);
        let mut raw = vec![0.0; n * r];
        rng::fill_normal(&mut init, &mut raw);
        let w = DenseMatrix::from_row_major(n, r, raw).unwrap();
        let mut pop = LifPopulation::new(w, LifParams::default()).unwrap();
        let mut pool = DevicePool::from_seed(r, 77);
        let analytic = pop.stationary_covariance(&pool.device_covariance()).unwrap();
        let (cov, se, means, mean_se) = empirical(&mut pop, &mut pool, 200_000, 1000);
        for i in 0..n {
            assert!(
                means[i].abs() <= 3.0 * mean_se[i],
                "mean {} se {}",
                means[i],
                mean_se[i]
            );
            for j in 0..n {
                let diff = (cov[(i, j)] - analytic[(i, j)]).abs();
                assert!(
                    diff <= 5.0 * se[(i, j)],
                    "({i},{j}) {} vs {}",
                    cov[(i, j)],
                    analytic[(i, j)]
                );
            }
        }
        let corr_err = cov
            .covariance_to_correlation()
            .max_abs_diff(&analytic.covariance_to_correlation());
        assert!(corr_err <= 0.05, "{corr_err}");
    }

    #[test]
    fn doubled_weights_double_the_path() {
        let w = DenseMatrix::from_rows(&[[0.3, -0.8], [1.0, 0.25]]).unwrap();
        let mut w2 = w.clone();
        w2.scale(2.0);
        let mut a = LifPopulation::new(w, LifParams::default()).unwrap();
        let mut b = LifPopulation::new(w2, LifParams::default()).unwrap();
        let mut pa = DevicePool::from_seed(2, 5);
        let mut pb = DevicePool::from_seed(2, 5);
        for _ in 0..5000 {
            let va = a.step(&pa.sample_step()).unwrap().to_vec();
            let vb = b.step(&pb.sample_step()).unwrap();
            assert_eq!(vb, va.iter().map(|x| 2.0 * x).collect::<Vec<_>>().as_slice());
        }
    }
}
