//! Continuous-action environments and observation wrappers.

mod pendulum;
mod wrappers;

pub use pendulum::{Pendulum, PendulumState};
pub use wrappers::{NormalizeObservation, SelectFeatures};

use crate::error::{Error, Result};

/// Static description of an environment's spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub obs_bounds: Vec<(f64, f64)>,
    pub action_bounds: Vec<(f64, f64)>,
    pub max_episode_steps: usize,
}

impl EnvSpec {
    pub fn obs_dim(&self) -> usize {
        self.obs_bounds.len()
    }

    pub fn action_dim(&self) -> usize {
        self.action_bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &(lo, hi)) in self.obs_bounds.iter().chain(&self.action_bounds).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::config(format!("{}: bound {i} is ({lo}, {hi})", self.name)));
            }
        }
        Ok(())
    }

    /// Clips an action into the declared bounds.
    pub fn clip_action(&self, action: &[f64]) -> Vec<f64> {
        action.iter().zip(&self.action_bounds).map(|(a, &(lo, hi))| a.clamp(lo, hi)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// The episode reached a terminal state; no value bootstrap.
    pub terminated: bool,
    /// The episode was cut by the time limit; bootstrap from `observation`.
    pub truncated: bool,
}

/// `reset(seed) → observation`, `step(action) → (observation, reward, terminated, truncated)`.
pub trait Env {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode. `Some(seed)` reseeds the environment's generator first.
    fn reset(&mut self, seed: Option<u64>) -> Vec<f64>;

    fn step(&mut self, action: &[f64]) -> Result<Step>;
}

impl<E: Env + ?Sized> Env for Box<E> {
    fn spec(&self) -> &EnvSpec {
        (**self).spec()
    }

    fn reset(&mut self, seed: Option<u64>) -> Vec<f64> {
        (**self).reset(seed)
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        (**self).step(action)
    }
}
