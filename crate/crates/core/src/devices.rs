//! Pools of two-state random devices redrawn independently every timestep.

use rand::{Rng, RngCore};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    /// Device states `{0, 1}`.
    Raw,
    /// `2s - 1`, i.e. `{-1, +1}`.
    #[default]
    Centered,
}

#[derive(Debug, Clone)]
pub struct DevicePool {
    /// Probability of raw state 1, per device.
    bias: Vec<f64>,
    encoding: Encoding,
    rng: SimRng,
    fair: bool,
}

impl DevicePool {
    /// `count` fair devices.
    pub fn fair(count: usize, rng: SimRng) -> Self {
        Self {
            bias: vec![0.5; count],
            encoding: Encoding::Centered,
            rng,
            fair: true,
        }
    }

    pub fn from_seed(count: usize, seed: u64) -> Self {
        Self::fair(count, rng::seeded(seed))
    }

    pub fn with_bias(bias: Vec<f64>, encoding: Encoding, rng: SimRng) -> Result<Self> {
        if let Some(b) = bias.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::input(format!("device bias {b} outside [0, 1]")));
        }
        let fair = bias.iter().all(|&b| b == 0.5);
        Ok(Self {
            bias,
            encoding,
            rng,
            fair,
        })
    }

    pub fn len(&self) -> usize {
        self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bias.is_empty()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    /// Draws one state per device into `out`.
    pub fn sample_into(&mut self, out: &mut [f64]) {
        assert_eq!(out.len(), self.bias.len(), "state buffer length");
        let (low, high) = match self.encoding {
            Encoding::Raw => (0.0, 1.0),
            Encoding::Centered => (-1.0, 1.0),
        };
        if self.fair {
            for chunk in out.chunks_mut(64) {
                let bits = self.rng.next_u64();
                for (k, s) in chunk.iter_mut().enumerate() {
                    *s = if (bits >> k) & 1 == 1 { high } else { low };
                }
            }
        } else {
            for (s, &b) in out.iter_mut().zip(&self.bias) {
                *s = if self.rng.random::<f64>() < b { high } else { low };
            }
        }
    }

    pub fn sample_step(&mut self) -> Vec<f64> {
        let mut out = vec![0.0; self.bias.len()];
        self.sample_into(&mut out);
        out
    }

    /// Analytic covariance of one draw: diagonal, `b(1-b)` raw or `4b(1-b)` centered.
    pub fn device_covariance(&self) -> DenseMatrix {
        let factor = match self.encoding {
            Encoding::Raw => 1.0,
            Encoding::Centered => 4.0,
        };
        let diag: Vec<f64> = self.bias.iter().map(|b| factor * b * (1.0 - b)).collect();
        DenseMatrix::from_diagonal(&diag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(bias: Vec<f64>, seed: u64) -> DevicePool {
        DevicePool::with_bias(bias, Encoding::Centered, rng::seeded(seed)).unwrap()
    }

    #[test]
    fn deterministic_devices() {
        let mut ones = pool(vec![1.0; 5], 1);
        let mut zeros = pool(vec![0.0; 5], 1);
        for _ in 0..100 {
            assert!(ones.sample_step().iter().all(|&s| s == 1.0));
            assert!(zeros.sample_step().iter().all(|&s| s == -1.0));
        }
        let mut raw = DevicePool::with_bias(vec![0.0, 1.0], Encoding::Raw, rng::seeded(1)).unwrap();
        assert_eq!(raw.sample_step(), vec![0.0, 1.0]);
    }

    #[test]
    fn fair_device_moments() {
        let steps = 100_000;
        let mut p = DevicePool::from_seed(1, 3);
        let xs: Vec<f64> = (0..steps).map(|_| p.sample_step()[0]).collect();
        let mean = xs.iter().sum::<f64>() / steps as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (steps - 1) as f64;
        assert!(mean.abs() <= 3.0 / (steps as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() <= 0.02, "var {var}");
    }

    #[test]
    fn biased_device_moments() {
        let steps = 100_000;
        let mut p = pool(vec![0.9], 8);
        let xs: Vec<f64> = (0..steps).map(|_| p.sample_step()[0]).collect();
        let mean = xs.iter().sum::<f64>() / steps as f64;
        // centered mean 2b - 1 = 0.8, variance 4b(1-b) = 0.36
        let se = (0.36f64 / steps as f64).sqrt();
        assert!((mean - 0.8).abs() <= 4.0 * se, "mean {mean}");
    }

    #[test]
    fn cross_covariance_vanishes() {
        let steps = 100_000usize;
        let mut p = DevicePool::from_seed(3, 17);
        let mut sums = [0.0f64; 3];
        let mut cross = [0.0f64; 3];
        for _ in 0..steps {
            let s = p.sample_step();
            for k in 0..3 {
                sums[k] += s[k];
            }
            cross[0] += s[0] * s[1];
            cross[1] += s[0] * s[2];
            cross[2] += s[1] * s[2];
        }
        let m = steps as f64;
        let pairs = [(0, 1), (0, 2), (1, 2)];
        for (c, (a, b)) in cross.iter().zip(pairs) {
            let cov = c / m - (sums[a] / m) * (sums[b] / m);
            assert!(cov.abs() <= 3.0 / m.sqrt(), "cov {cov}");
        }
    }

    #[test]
    fn covariance_closed_form() {
        assert_eq!(
            DevicePool::from_seed(3, 0).device_covariance(),
            DenseMatrix::identity(3)
        );
        let c = pool(vec![0.9], 0).device_covariance();
        assert!((c[(0, 0)] - 0.36).abs() < 1e-15);
        assert_eq!(pool(vec![1.0], 0).device_covariance()[(0, 0)], 0.0);
        let raw = DevicePool::with_bias(vec![0.5, 0.9], Encoding::Raw, rng::seeded(0)).unwrap();
        let c = raw.device_covariance();
        assert_eq!(c[(0, 0)], 0.25);
        assert!((c[(1, 1)] - 0.09).abs() < 1e-15);
        assert_eq!(c[(0, 1)], 0.0);
    }

    #[test]
    fn reproducible_streams() {
        let mut a = DevicePool::from_seed(70, 42);
        let mut b = DevicePool::from_seed(70, 42);
        for _ in 0..10_000 {
            assert_eq!(a.sample_step(), b.sample_step());
        }
        let mut biased_a = pool(vec![0.3; 4], 5);
        let mut biased_b = pool(vec![0.3; 4], 5);
        for _ in 0..1000 {
            assert_eq!(biased_a.sample_step(), biased_b.sample_step());
        }
    }

    #[test]
    fn advanced_pool_matches_fresh_replay() {
        let k = 137;
        let mut advanced = DevicePool::from_seed(9, 4);
        for _ in 0..k {
            advanced.sample_step();
        }
        let next = advanced.sample_step();
        let mut fresh = DevicePool::from_seed(9, 4);
        let replay: Vec<Vec<f64>> = (0..=k).map(|_| fresh.sample_step()).collect();
        assert_eq!(next, replay[k]);
    }

    #[test]
    fn rejects_bad_bias() {
        assert!(DevicePool::with_bias(vec![1.2], Encoding::Centered, rng::seeded(0)).is_err());
        assert!(DevicePool::with_bias(vec![f64::NAN], Encoding::Centered, rng::seeded(0)).is_err());
    }
}
