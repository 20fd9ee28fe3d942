//! Hebbian-family plasticity: the plain Hebbian rule, Oja's rule (principal
//! eigenvector) and Oja's anti-Hebbian rule (minimum eigenvector).
//!
//! In every rule the postsynaptic activity is `y = wᵀx`.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `w + eta (wᵀx) x`. Unstable: grows without bound along any persistent input.
pub fn hebbian_update(w: &[f64], x: &[f64], eta: f64) -> Vec<f64> {
    assert_eq!(w.len(), x.len(), "weight and input dimensions differ");
    let y = dot(w, x);
    w.iter().zip(x).map(|(wi, xi)| wi + eta * y * xi).collect()
}

/// `w + eta y (x - y w)`.
pub fn oja_update(w: &[f64], x: &[f64], eta: f64) -> Vec<f64> {
    assert_eq!(w.len(), x.len(), "weight and input dimensions differ");
    let y = dot(w, x);
    w.iter().zip(x).map(|(wi, xi)| wi + eta * y * (xi - y * wi)).collect()
}

pub const DEFAULT_ETA0: f64 = 5e-3;
pub const DEFAULT_TAU: f64 = 1e5;

/// State of the anti-Hebbian learner onto a single output neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct OjaState {
    w: Vec<f64>,
    eta0: f64,
    tau: f64,
    t: u64,
    input_scale: f64,
}

impl OjaState {
    pub fn new(w: Vec<f64>, eta0: f64, tau: f64, input_scale: f64) -> Result<Self> {
        if !(eta0 > 0.0 && tau > 0.0 && input_scale > 0.0) {
            return Err(Error::input("eta0, tau and input scale must be positive"));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("initial weights must be finite"));
        }
        Ok(Self {
            w,
            eta0,
            tau,
            t: 0,
            input_scale,
        })
    }

    /// Weights drawn uniformly on the unit sphere.
    pub fn random<R: RngCore + ?Sized>(dim: usize, eta0: f64, tau: f64, input_scale: f64, rng: &mut R) -> Result<Self> {
        Self::new(rng::unit_sphere(rng, dim), eta0, tau, input_scale)
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn updates(&self) -> u64 {
        self.t
    }

    pub fn input_scale(&self) -> f64 {
        self.input_scale
    }

    /// `eta0 / (1 + t / tau)`.
    pub fn learning_rate(&self) -> f64 {
        self.eta0 / (1.0 + self.t as f64 / self.tau)
    }

    /// `w <- w + eta_t (-y x + (y² + 1 - wᵀw) w)` on the scaled input.
    pub fn anti_oja_update(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.w.len() {
            return Err(Error::input(format!(
                "input has {} entries, weights have {}",
                x.len(),
                self.w.len()
            )));
        }
        let eta = self.learning_rate();
        let scale = self.input_scale;
        let y = scale * dot(&self.w, x);
        let norm_sq = dot(&self.w, &self.w);
        let shrink = y * y + 1.0 - norm_sq;
        let mut finite = true;
        for (wi, &xi) in self.w.iter_mut().zip(x) {
            *wi += eta * (-y * scale * xi + shrink * *wi);
            finite &= wi.is_finite();
        }
        self.t += 1;
        if !finite {
            return Err(Error::Numerical(format!(
                "anti-Hebbian weights diverged after {} updates (eta0 = {}); retry with a smaller learning rate",
                self.t, self.eta0
            )));
        }
        Ok(())
    }
}

/// Expected anti-Hebbian update `-Σw + (wᵀΣw + 1 - wᵀw) w` for input covariance `Σ`.
pub fn expected_anti_oja_step(cov: &crate::dense::DenseMatrix, w: &[f64]) -> Vec<f64> {
    let sw = cov.mul_vec(w);
    let quad = dot(w, &sw);
    let norm_sq = dot(w, w);
    w.iter()
        .zip(&sw)
        .map(|(wi, si)| -si + (quad + 1.0 - norm_sq) * wi)
        .collect()
}
