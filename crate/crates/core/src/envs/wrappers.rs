use std::f64::consts::FRAC_PI_2;

use super::{Env, EnvSpec, Step};
use crate::error::{Error, Result};
use crate::vqc::normalize_features;

/// Maps every observation linearly from its bounds onto `[-π/2, π/2]`.
/// Rewards and actions pass through untouched.
pub struct NormalizeObservation<E> {
    inner: E,
    bounds: Vec<(f64, f64)>,
    spec: EnvSpec,
}

impl<E: Env> NormalizeObservation<E> {
    /// Uses the inner environment's declared observation bounds.
    pub fn new(inner: E) -> Result<Self> {
        let bounds = inner.spec().obs_bounds.clone();
        Self::with_bounds(inner, bounds)
    }

    pub fn with_bounds(inner: E, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != inner.spec().obs_dim() {
            return Err(Error::config(format!(
                "{} bounds for a {}-feature observation",
                bounds.len(),
                inner.spec().obs_dim()
            )));
        }
        let mut spec = inner.spec().clone();
        spec.obs_bounds = vec![(-FRAC_PI_2, FRAC_PI_2); bounds.len()];
        spec.validate()?;
        // catches degenerate bounds up front
        let lows: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        normalize_features(&lows, &bounds)?;
        Ok(NormalizeObservation { inner, bounds, spec })
    }

    fn map(&self, obs: Vec<f64>, step: usize) -> Result<Vec<f64>> {
        normalize_features(&obs, &self.bounds).map_err(|e| Error::Env { step, message: e.to_string() })
    }
}

impl<E: Env> Env for NormalizeObservation<E> {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: Option<u64>) -> Vec<f64> {
        let obs = self.inner.reset(seed);
        normalize_features(&obs, &self.bounds).expect("reset observation outside the normalizable domain")
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        let mut step = self.inner.step(action)?;
        step.observation = self.map(step.observation, 0)?;
        Ok(step)
    }
}

/// Exposes only the chosen observation features, in the given order.
pub struct SelectFeatures<E> {
    inner: E,
    indices: Vec<usize>,
    spec: EnvSpec,
}

impl<E: Env> SelectFeatures<E> {
    pub fn new(inner: E, indices: Vec<usize>) -> Result<Self> {
        let dim = inner.spec().obs_dim();
        if indices.is_empty() {
            return Err(Error::config("feature selection is empty"));
        }
        for (i, &idx) in indices.iter().enumerate() {
            if idx >= dim {
                return Err(Error::config(format!("feature index {idx} out of range for {dim} features")));
            }
            if indices[..i].contains(&idx) {
                return Err(Error::config(format!("feature index {idx} selected twice")));
            }
        }
        let mut spec = inner.spec().clone();
        spec.obs_bounds = indices.iter().map(|&i| inner.spec().obs_bounds[i]).collect();
        Ok(SelectFeatures { inner, indices, spec })
    }

    fn project(&self, obs: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| obs[i]).collect()
    }
}

impl<E: Env> Env for SelectFeatures<E> {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: Option<u64>) -> Vec<f64> {
        let obs = self.inner.reset(seed);
        self.project(&obs)
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        let mut step = self.inner.step(action)?;
        step.observation = self.project(&step.observation);
        Ok(step)
    }
}
