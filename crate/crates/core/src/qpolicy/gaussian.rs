use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Factorized Gaussian over a continuous action vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

const HALF_LOG_2PI: f64 = 0.918_938_533_204_672_7;

impl GaussianPolicy {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Self {
        debug_assert_eq!(mu.len(), sigma.len());
        assert!(sigma.iter().all(|&s| s > 0.0), "sigma must be positive: {sigma:?}");
        GaussianPolicy { mu, sigma }
    }

    pub fn n_actions(&self) -> usize {
        self.mu.len()
    }

    pub fn log_prob(&self, action: &[f64]) -> f64 {
        assert_eq!(action.len(), self.mu.len(), "action dimension mismatch");
        self.mu
            .iter()
            .zip(&self.sigma)
            .zip(action)
            .map(|((m, s), a)| {
                let z = (a - m) / s;
                -0.5 * z * z - s.ln() - HALF_LOG_2PI
            })
            .sum()
    }

    /// `(∂ log p / ∂μ, ∂ log p / ∂σ)` per action dimension.
    pub fn log_prob_partials(&self, action: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.mu
            .iter()
            .zip(&self.sigma)
            .zip(action)
            .map(|((m, s), a)| {
                let d = a - m;
                (d / (s * s), d * d / (s * s * s) - 1.0 / s)
            })
            .unzip()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.mu
            .iter()
            .zip(&self.sigma)
            .map(|(m, s)| {
                let eps: f64 = StandardNormal.sample(rng);
                m + s * eps
            })
            .collect()
    }

    pub fn entropy(&self) -> f64 {
        self.sigma.iter().map(|s| 0.5 * (2.0 * PI * std::f64::consts::E).ln() + s.ln()).sum()
    }
}
