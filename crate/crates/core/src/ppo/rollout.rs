use rand::Rng;

use super::gae::compute_gae;
use crate::envs::Env;
use crate::error::{Error, Result};
use crate::qpolicy::ActorCritic;

/// Environment interaction of one training iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RolloutBatch {
    pub states: Vec<Vec<f64>>,
    /// Sampled actions before clipping to the action bounds.
    pub actions: Vec<Vec<f64>>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    /// `V(s_{t+1})`, also recorded when the episode was truncated at `t`.
    pub next_values: Vec<f64>,
    pub terminals: Vec<bool>,
    /// `terminated || truncated`.
    pub dones: Vec<bool>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    /// Undiscounted returns of the episodes that finished inside this batch.
    pub episode_returns: Vec<f64>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn compute_advantages(&mut self, gamma: f64, lambda: f64) {
        let (adv, ret) =
            compute_gae(&self.rewards, &self.values, &self.next_values, &self.terminals, &self.dones, gamma, lambda);
        self.advantages = adv;
        self.returns = ret;
    }

    /// Shifts and scales the advantages to zero mean and unit variance.
    pub fn normalize_advantages(&mut self) {
        let n = self.advantages.len() as f64;
        if n < 2.0 {
            return;
        }
        let mean = self.advantages.iter().sum::<f64>() / n;
        let var = self.advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        let scale = 1.0 / (var.sqrt() + 1e-8);
        for a in &mut self.advantages {
            *a = (*a - mean) * scale;
        }
    }
}

/// Carries an unfinished episode from one batch into the next.
#[derive(Debug, Clone)]
pub struct EpisodeCursor {
    obs: Vec<f64>,
    episode_return: f64,
    step: usize,
}

impl EpisodeCursor {
    /// Resets `env` with `seed` and starts tracking the first episode.
    pub fn start<E: Env + ?Sized>(env: &mut E, seed: u64) -> Self {
        EpisodeCursor { obs: env.reset(Some(seed)), episode_return: 0.0, step: 0 }
    }

    pub fn observation(&self) -> &[f64] {
        &self.obs
    }
}

/// Steps `env` `n_steps` times with actions sampled from the agent's policy,
/// resetting whenever an episode ends.
pub fn collect_rollout<A, E, R>(
    agent: &A,
    env: &mut E,
    cursor: &mut EpisodeCursor,
    n_steps: usize,
    rng: &mut R,
) -> Result<RolloutBatch>
where
    A: ActorCritic + ?Sized,
    E: Env + ?Sized,
    R: Rng + ?Sized,
{
    if n_steps == 0 {
        return Err(Error::config("rollout needs at least one step"));
    }
    let mut batch = RolloutBatch::default();
    let mut value = agent.value(&cursor.obs)?;
    for _ in 0..n_steps {
        let policy = agent.policy(&cursor.obs)?;
        let action = policy.sample(rng);
        let log_prob = policy.log_prob(&action);
        let clipped = env.spec().clip_action(&action);
        let step = env.step(&clipped).map_err(|e| match e {
            Error::Env { message, .. } => Error::Env { step: cursor.step, message },
            other => other,
        })?;
        cursor.step += 1;
        cursor.episode_return += step.reward;

        let next_value = if step.terminated { 0.0 } else { agent.value(&step.observation)? };
        let done = step.terminated || step.truncated;

        batch.states.push(std::mem::take(&mut cursor.obs));
        batch.actions.push(action);
        batch.log_probs.push(log_prob);
        batch.rewards.push(step.reward);
        batch.values.push(value);
        batch.next_values.push(next_value);
        batch.terminals.push(step.terminated);
        batch.dones.push(done);

        if done {
            batch.episode_returns.push(cursor.episode_return);
            cursor.obs = env.reset(None);
            cursor.episode_return = 0.0;
            cursor.step = 0;
            value = agent.value(&cursor.obs)?;
        } else {
            cursor.obs = step.observation;
            value = next_value;
        }
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::Pendulum;
    use crate::qpolicy::{MlpActorCritic, MlpConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(seed: u64, n: usize) -> RolloutBatch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agent = MlpActorCritic::new(3, 1, &MlpConfig::default(), &mut rng).unwrap();
        let mut env = Pendulum::new(seed);
        let mut cursor = EpisodeCursor::start(&mut env, seed);
        collect_rollout(&agent, &mut env, &mut cursor, n, &mut rng).unwrap()
    }

    #[test]
    fn batch_has_requested_length() {
        let b = run(0, 4000);
        assert_eq!(b.len(), 4000);
        assert_eq!(b.states.len(), 4000);
        assert_eq!(b.actions.len(), 4000);
        assert_eq!(b.values.len(), 4000);
        assert_eq!(b.episode_returns.len(), 20);
        assert!(b.rewards.iter().all(|&r| r <= 0.0));
        assert_eq!(b.dones.iter().filter(|&&d| d).count(), 20);
        assert!(b.terminals.iter().all(|&t| !t));
    }

    #[test]
    fn rollouts_are_deterministic() {
        assert_eq!(run(3, 500), run(3, 500));
        assert_ne!(run(3, 500).rewards, run(4, 500).rewards);
    }

    #[test]
    fn episode_returns_sum_rewards() {
        let b = run(1, 400);
        assert!((b.episode_returns[0] - b.rewards[..200].iter().sum::<f64>()).abs() < 1e-9);
        assert!((b.episode_returns[1] - b.rewards[200..].iter().sum::<f64>()).abs() < 1e-9);
    }

    #[test]
    fn values_chain_within_episode() {
        let b = run(2, 300);
        for t in 0..299 {
            if !b.dones[t] {
                assert_eq!(b.next_values[t], b.values[t + 1]);
                assert_eq!(b.states[t + 1].len(), 3);
            }
        }
    }

    #[test]
    fn normalized_advantages_are_standardized() {
        let mut b = run(5, 1000);
        b.compute_advantages(0.99, 0.95);
        b.normalize_advantages();
        let n = b.len() as f64;
        let mean = b.advantages.iter().sum::<f64>() / n;
        let var = b.advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-6);
    }
}
