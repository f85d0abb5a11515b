//! Proximal policy optimization with per-group adaptive learning rates.

mod gae;
mod optim;
mod rollout;

pub use gae::{compute_gae, compute_gae_from_dones};
pub use optim::{GroupOptimizer, OptimizerKind};
pub use rollout::{collect_rollout, EpisodeCursor, RolloutBatch};

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::envs::Env;
use crate::error::{Error, Result};
use crate::qpolicy::{ActorCritic, GroupInfo, GroupRole, PolicyPartials};

/// Base learning rate per parameter role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningRates {
    pub lambda: f64,
    /// θ (actor) and φ (critic).
    pub variational: f64,
    pub output: f64,
    pub classical: f64,
}

impl Default for LearningRates {
    fn default() -> Self {
        LearningRates { lambda: 0.001, variational: 0.001, output: 0.01, classical: 0.001 }
    }
}

impl LearningRates {
    pub fn for_role(&self, role: GroupRole) -> f64 {
        match role {
            GroupRole::Lambda => self.lambda,
            GroupRole::Variational => self.variational,
            GroupRole::Output => self.output,
            GroupRole::Classical => self.classical,
        }
    }
}

/// Exponential decay of every learning rate once `start_step` env steps have passed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub start_step: u64,
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Env steps per iteration.
    pub batch_size: usize,
    pub minibatch_size: usize,
    pub epochs: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_eps: f64,
    pub learning_rates: LearningRates,
    pub schedule: Option<Schedule>,
    pub optimizer: OptimizerKind,
    pub normalize_advantages: bool,
    pub entropy_coef: f64,
    pub total_steps: u64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 4000,
            minibatch_size: 64,
            epochs: 10,
            gamma: 0.99,
            gae_lambda: 0.1,
            clip_eps: 0.2,
            learning_rates: LearningRates::default(),
            schedule: None,
            optimizer: OptimizerKind::Adam,
            normalize_advantages: true,
            entropy_coef: 0.0,
            total_steps: 150_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.batch_size == 0 || self.minibatch_size == 0 || self.epochs == 0 {
            return bad("batch_size, minibatch_size and epochs must be positive".into());
        }
        if self.minibatch_size > self.batch_size {
            return bad(format!("minibatch_size {} exceeds batch_size {}", self.minibatch_size, self.batch_size));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma {} outside (0, 1]", self.gamma));
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return bad(format!("gae_lambda {} outside (0, 1]", self.gae_lambda));
        }
        if !(self.clip_eps > 0.0 && self.clip_eps.is_finite()) {
            return bad(format!("clip_eps {} must be positive", self.clip_eps));
        }
        let lr = &self.learning_rates;
        for (name, v) in [("lambda", lr.lambda), ("variational", lr.variational), ("output", lr.output), ("classical", lr.classical)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("learning rate {name} = {v}"));
            }
        }
        if let Some(s) = self.schedule {
            if !(s.decay > 0.0 && s.decay <= 1.0) {
                return bad(format!("schedule decay {} outside (0, 1]", s.decay));
            }
        }
        if !(self.entropy_coef >= 0.0 && self.entropy_coef.is_finite()) {
            return bad(format!("entropy_coef {}", self.entropy_coef));
        }
        if self.total_steps < self.batch_size as u64 {
            return bad(format!("total_steps {} is below one batch of {}", self.total_steps, self.batch_size));
        }
        Ok(())
    }

    /// Number of full iterations that fit in the step budget.
    pub fn iterations(&self) -> usize {
        (self.total_steps / self.batch_size as u64) as usize
    }
}

/// Learning-rate multiplier after `steps` env steps: one decay factor per
/// iteration begun past the schedule's start.
pub fn lr_schedule(steps: u64, config: &TrainConfig) -> f64 {
    match config.schedule {
        Some(s) if steps > s.start_step => {
            let batch = config.batch_size as u64;
            let iters = (steps - s.start_step).div_ceil(batch);
            s.decay.powi(iters.min(i32::MAX as u64) as i32)
        }
        _ => 1.0,
    }
}

/// Per-sample clipped surrogate loss and its derivative with respect to the
/// new log-probability.
pub(crate) fn clipped_surrogate(ratio: f64, advantage: f64, eps: f64) -> (f64, f64) {
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
    let unclipped_obj = ratio * advantage;
    let clipped_obj = clipped * advantage;
    if unclipped_obj <= clipped_obj {
        (-unclipped_obj, -advantage * ratio)
    } else {
        (-clipped_obj, 0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateStats {
    pub actor_loss: f64,
    pub critic_loss: f64,
    /// Fraction of samples whose clip was active.
    pub clip_fraction: f64,
    pub entropy: f64,
    pub minibatches: usize,
}

/// Runs `config.epochs` passes of shuffled minibatch updates over `batch`.
/// Advantages must already be computed.
pub fn ppo_update<A, R>(
    agent: &mut A,
    batch: &RolloutBatch,
    config: &TrainConfig,
    optimizer: &mut GroupOptimizer,
    lr_multiplier: f64,
    rng: &mut R,
) -> Result<UpdateStats>
where
    A: ActorCritic + ?Sized,
    R: rand::Rng + ?Sized,
{
    let n = batch.len();
    if batch.advantages.len() != n || batch.returns.len() != n {
        return Err(Error::config("advantages have not been computed for this batch"));
    }
    let groups = agent.groups();
    let rates: Vec<f64> = groups.iter().map(|g| config.learning_rates.for_role(g.role) * lr_multiplier).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut stats = UpdateStats::default();
    let mut clipped = 0usize;
    let mut seen = 0usize;

    for epoch in 0..config.epochs {
        order.shuffle(rng);
        for (mb_index, mb) in order.chunks(config.minibatch_size).enumerate() {
            let m = mb.len() as f64;
            let mut grads = agent.zero_grads();
            let mut actor_loss = 0.0;
            let mut critic_loss = 0.0;
            let mut entropy = 0.0;
            for &i in mb {
                let action = &batch.actions[i];
                let adv = batch.advantages[i];
                let old_logp = batch.log_probs[i];
                let mut head = |pi: &crate::qpolicy::GaussianPolicy| {
                    let logp = pi.log_prob(action);
                    let ratio = (logp - old_logp).exp();
                    let (loss, dlogp) = clipped_surrogate(ratio, adv, config.clip_eps);
                    if ratio.clamp(1.0 - config.clip_eps, 1.0 + config.clip_eps) != ratio && dlogp == 0.0 {
                        clipped += 1;
                    }
                    let h = pi.entropy();
                    actor_loss += loss;
                    entropy += h;
                    let (d_mu, mut d_sigma) = pi.log_prob_partials(action);
                    let scale = dlogp / m;
                    let d_mu = d_mu.iter().map(|d| d * scale).collect();
                    for (ds, s) in d_sigma.iter_mut().zip(&pi.sigma) {
                        *ds = *ds * scale - config.entropy_coef / (m * s);
                    }
                    PolicyPartials { d_mu, d_sigma }
                };
                agent.actor_backward(&batch.states[i], &mut head, &mut grads)?;
                let target = batch.returns[i];
                let mut vhead = |v: f64| {
                    critic_loss += (v - target).powi(2);
                    2.0 * (v - target) / m
                };
                agent.critic_backward(&batch.states[i], &mut vhead, &mut grads)?;
                seen += 1;
            }
            actor_loss /= m;
            critic_loss /= m;
            entropy /= m;
            check_finite(epoch, mb_index, actor_loss, critic_loss, &groups, &grads)?;
            {
                let mut params = agent.params_mut();
                for (g, (p, d)) in params.iter_mut().zip(&grads).enumerate() {
                    optimizer.step(g, p, d, rates[g]);
                }
            }
            agent.after_update();
            stats.actor_loss += actor_loss;
            stats.critic_loss += critic_loss;
            stats.entropy += entropy;
            stats.minibatches += 1;
        }
    }
    let k = stats.minibatches.max(1) as f64;
    stats.actor_loss /= k;
    stats.critic_loss /= k;
    stats.entropy /= k;
    stats.clip_fraction = clipped as f64 / seen.max(1) as f64;
    Ok(stats)
}

fn check_finite(
    epoch: usize,
    minibatch: usize,
    actor_loss: f64,
    critic_loss: f64,
    groups: &[GroupInfo],
    grads: &[Vec<f64>],
) -> Result<()> {
    if !actor_loss.is_finite() || !critic_loss.is_finite() {
        return Err(Error::numeric(format!(
            "epoch {epoch}, minibatch {minibatch}: actor loss {actor_loss}, critic loss {critic_loss}"
        )));
    }
    for (g, d) in groups.iter().zip(grads) {
        if let Some(i) = d.iter().position(|x| !x.is_finite()) {
            return Err(Error::numeric(format!(
                "epoch {epoch}, minibatch {minibatch}: gradient of {}[{i}] is {}",
                g.name, d[i]
            )));
        }
    }
    Ok(())
}

/// Summary of one training iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Cumulative env steps after this iteration's rollout.
    pub env_steps: u64,
    /// NaN when no episode finished during the iteration.
    pub mean_episode_reward: f64,
    pub std_episode_reward: f64,
    pub episodes: usize,
    /// `(group name, effective rate)` in group order.
    pub learning_rates: Vec<(String, f64)>,
    pub stats: UpdateStats,
    pub wall_seconds: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Seed of the environment's reset stream, kept apart from the sampling stream.
pub fn env_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x2545_F491_4F6C_DD1D)
}

/// Trains `agent` on `env` for `config.iterations()` iterations, reporting each
/// record to `observe` as it completes.
pub fn train<A, E>(
    agent: &mut A,
    env: &mut E,
    config: &TrainConfig,
    mut observe: impl FnMut(&IterationRecord),
) -> Result<Vec<IterationRecord>>
where
    A: ActorCritic + ?Sized,
    E: Env + ?Sized,
{
    config.validate()?;
    if env.spec().obs_dim() != agent.obs_dim() || env.spec().action_dim() != agent.n_actions() {
        return Err(Error::config(format!(
            "agent expects {} features / {} actions, environment has {} / {}",
            agent.obs_dim(),
            agent.n_actions(),
            env.spec().obs_dim(),
            env.spec().action_dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let groups = agent.groups();
    let lens: Vec<usize> = groups.iter().map(|g| g.len).collect();
    let mut optimizer = GroupOptimizer::new(config.optimizer, &lens);
    let mut cursor = EpisodeCursor::start(env, env_seed(config.seed));
    let mut env_steps = 0u64;
    let mut history = Vec::with_capacity(config.iterations());

    for iteration in 0..config.iterations() {
        let started = Instant::now();
        let mut batch = collect_rollout(agent, env, &mut cursor, config.batch_size, &mut rng)?;
        env_steps += batch.len() as u64;
        batch.compute_advantages(config.gamma, config.gae_lambda);
        if config.normalize_advantages {
            batch.normalize_advantages();
        }
        let mult = lr_schedule(env_steps, config);
        let stats = ppo_update(agent, &batch, config, &mut optimizer, mult, &mut rng)
            .map_err(|e| match e {
                Error::Numeric(msg) => Error::Numeric(format!("iteration {iteration}: {msg}")),
                other => other,
            })?;
        let (mean, std) = mean_std(&batch.episode_returns);
        let record = IterationRecord {
            iteration,
            env_steps,
            mean_episode_reward: mean,
            std_episode_reward: std,
            episodes: batch.episode_returns.len(),
            learning_rates: groups
                .iter()
                .map(|g| (g.name.clone(), config.learning_rates.for_role(g.role) * mult))
                .collect(),
            stats,
            wall_seconds: started.elapsed().as_secs_f64(),
        };
        observe(&record);
        history.push(record);
    }
    Ok(history)
}
