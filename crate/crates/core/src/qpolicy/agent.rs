use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{build_readout, critic_weight_count, GaussianPolicy, ReadoutConfig, ReadoutId};
use crate::diff::accumulate_slot_gradients;
use crate::error::{Error, Result};
use crate::qsim::StateVector;
use crate::vqc::{CircuitCheckpoint, CircuitPlan, ParameterStore, VqcConfig};

/// What kind of parameters a group holds; selects the learning rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupRole {
    /// Input scaling λ.
    Lambda,
    /// Variational angles θ (actor) and φ (critic).
    Variational,
    /// Output scaling w.
    Output,
    /// Weights of a classical network.
    Classical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupInfo {
    pub name: String,
    pub role: GroupRole,
    pub len: usize,
}

/// Loss partials with respect to the policy head outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyPartials {
    pub d_mu: Vec<f64>,
    pub d_sigma: Vec<f64>,
}

/// An actor-critic function approximator as seen by the PPO loop. Parameters
/// are exposed as flat groups; gradients use the same layout.
pub trait ActorCritic {
    fn obs_dim(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn policy(&self, s: &[f64]) -> Result<GaussianPolicy>;
    fn value(&self, s: &[f64]) -> Result<f64>;

    fn groups(&self) -> Vec<GroupInfo>;
    fn params(&self) -> Vec<&[f64]>;
    fn params_mut(&mut self) -> Vec<&mut [f64]>;

    /// Called after parameters were written through [`params_mut`](Self::params_mut).
    fn after_update(&mut self) {}

    /// Runs the actor on `s`, asks `head` for the loss partials at the resulting
    /// policy and adds the parameter gradients into `grads`.
    fn actor_backward(
        &self,
        s: &[f64],
        head: &mut dyn FnMut(&GaussianPolicy) -> PolicyPartials,
        grads: &mut [Vec<f64>],
    ) -> Result<GaussianPolicy>;

    /// Runs the critic on `s`, asks `head` for `∂L/∂V` and adds the parameter gradients into `grads`.
    fn critic_backward(
        &self,
        s: &[f64],
        head: &mut dyn FnMut(f64) -> f64,
        grads: &mut [Vec<f64>],
    ) -> Result<f64>;

    fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.groups().iter().map(|g| vec![0.0; g.len]).collect()
    }

    fn n_trainable(&self) -> usize {
        self.groups().iter().map(|g| g.len).sum()
    }
}

const ACTOR_LAMBDA: usize = 0;
const ACTOR_THETA: usize = 1;
const ACTOR_W: usize = 2;
const CRITIC_LAMBDA: usize = 3;
const CRITIC_PHI: usize = 4;
const CRITIC_W: usize = 5;

/// Actor and critic circuits with the same layout, read out through one readout configuration.
///
/// Actor weights are laid out as `[w_μ0 … w_μ(k-1), w_σ0 … w_σ(k-1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumAgent {
    readout: ReadoutConfig,
    actor_plan: CircuitPlan,
    critic_plan: CircuitPlan,
    pub actor: ParameterStore,
    pub critic: ParameterStore,
    mu_diag: Vec<Vec<f64>>,
    sigma_diag: Vec<Vec<f64>>,
    critic_diag: Vec<Vec<f64>>,
    mu_masks: Vec<usize>,
    sigma_masks: Vec<usize>,
    critic_masks: Vec<usize>,
}

impl QuantumAgent {
    /// θ, φ ~ N(0, `theta_std`); λ and w start at 1.
    pub fn new<R: Rng + ?Sized>(config: &VqcConfig, theta_std: f64, rng: &mut R) -> Result<Self> {
        let plan = CircuitPlan::build(config)?;
        let readout = build_readout(config.readout, config.n_qubits(), config.n_actions)?;
        let actor = ParameterStore::init(&plan, 2 * config.n_actions, theta_std, rng)?;
        let critic = ParameterStore::init(&plan, critic_weight_count(config.readout, config.n_qubits()), theta_std, rng)?;
        Self::from_parts(readout, plan.clone(), plan, actor, critic)
    }

    pub fn from_parts(
        readout: ReadoutConfig,
        actor_plan: CircuitPlan,
        critic_plan: CircuitPlan,
        actor: ParameterStore,
        critic: ParameterStore,
    ) -> Result<Self> {
        let n = actor_plan.n_qubits();
        if critic_plan.n_qubits() != n || readout.n_qubits != n || critic_plan.n_features() != actor_plan.n_features() {
            return Err(Error::config("actor, critic and readout disagree on register or feature size"));
        }
        if actor.w.len() != 2 * readout.n_actions || critic.w.len() != readout.critic.len() {
            return Err(Error::config(format!(
                "output weights: actor has {}, critic has {}; readout {} needs {} and {}",
                actor.w.len(),
                critic.w.len(),
                readout.id,
                2 * readout.n_actions,
                readout.critic.len()
            )));
        }
        for (plan, p) in [(&actor_plan, &actor), (&critic_plan, &critic)] {
            if p.lambda.len() != plan.n_lambda() || p.theta.len() != plan.n_theta() {
                return Err(Error::config("parameter store does not match its circuit"));
            }
        }
        let diag = |v: &[crate::qsim::ZProduct]| v.iter().map(|o| o.diagonal(n)).collect::<Vec<_>>();
        let masks = |v: &[crate::qsim::ZProduct]| v.iter().map(|o| o.mask(n)).collect::<Vec<_>>();
        Ok(QuantumAgent {
            mu_diag: diag(&readout.mu),
            sigma_diag: diag(&readout.sigma),
            critic_diag: diag(&readout.critic),
            mu_masks: masks(&readout.mu),
            sigma_masks: masks(&readout.sigma),
            critic_masks: masks(&readout.critic),
            readout,
            actor_plan,
            critic_plan,
            actor,
            critic,
        })
    }

    pub fn readout(&self) -> &ReadoutConfig {
        &self.readout
    }

    pub fn actor_plan(&self) -> &CircuitPlan {
        &self.actor_plan
    }

    pub fn critic_plan(&self) -> &CircuitPlan {
        &self.critic_plan
    }

    /// `(⟨O_μi⟩, ⟨O_σi⟩)` and the actor output state.
    fn actor_expectations(&self, s: &[f64]) -> Result<(Vec<f64>, Vec<f64>, StateVector)> {
        let state = self.actor_plan.forward(&self.actor, s)?;
        let e_mu = self.mu_masks.iter().map(|&m| state.expectation_mask(m)).collect();
        let e_sigma = self.sigma_masks.iter().map(|&m| state.expectation_mask(m)).collect();
        Ok((e_mu, e_sigma, state))
    }

    fn policy_from(&self, e_mu: &[f64], e_sigma: &[f64]) -> Result<GaussianPolicy> {
        let k = self.readout.n_actions;
        let mu: Vec<f64> = e_mu.iter().zip(&self.actor.w[..k]).map(|(e, w)| e * w).collect();
        let sigma: Vec<f64> = e_sigma.iter().zip(&self.actor.w[k..]).map(|(e, w)| (e * w).exp()).collect();
        if mu.iter().any(|m| !m.is_finite()) || sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::numeric(format!("policy head produced mu={mu:?} sigma={sigma:?}")));
        }
        Ok(GaussianPolicy::new(mu, sigma))
    }

    /// Expectations of the critic observables.
    pub fn critic_expectations(&self, s: &[f64]) -> Result<Vec<f64>> {
        let state = self.critic_plan.forward(&self.critic, s)?;
        Ok(self.critic_masks.iter().map(|&m| state.expectation_mask(m)).collect())
    }

    pub fn checkpoint(&self) -> AgentCheckpoint {
        AgentCheckpoint {
            readout: self.readout.id,
            n_actions: self.readout.n_actions,
            actor: CircuitCheckpoint { plan: self.actor_plan.clone(), params: self.actor.clone() },
            critic: CircuitCheckpoint { plan: self.critic_plan.clone(), params: self.critic.clone() },
        }
    }

    pub fn from_checkpoint(ck: AgentCheckpoint) -> Result<Self> {
        let readout = build_readout(ck.readout, ck.actor.plan.n_qubits(), ck.n_actions)?;
        Self::from_parts(readout, ck.actor.plan, ck.critic.plan, ck.actor.params, ck.critic.params)
    }
}

impl ActorCritic for QuantumAgent {
    fn obs_dim(&self) -> usize {
        self.actor_plan.n_features()
    }

    fn n_actions(&self) -> usize {
        self.readout.n_actions
    }

    fn policy(&self, s: &[f64]) -> Result<GaussianPolicy> {
        let (e_mu, e_sigma, _) = self.actor_expectations(s)?;
        self.policy_from(&e_mu, &e_sigma)
    }

    fn value(&self, s: &[f64]) -> Result<f64> {
        let e = self.critic_expectations(s)?;
        Ok(e.iter().zip(&self.critic.w).map(|(e, w)| e * w).sum())
    }

    fn groups(&self) -> Vec<GroupInfo> {
        let g = |name: &str, role, len| GroupInfo { name: name.to_string(), role, len };
        vec![
            g("actor_lambda", GroupRole::Lambda, self.actor.lambda.len()),
            g("actor_theta", GroupRole::Variational, self.actor.theta.len()),
            g("actor_w", GroupRole::Output, self.actor.w.len()),
            g("critic_lambda", GroupRole::Lambda, self.critic.lambda.len()),
            g("critic_phi", GroupRole::Variational, self.critic.theta.len()),
            g("critic_w", GroupRole::Output, self.critic.w.len()),
        ]
    }

    fn params(&self) -> Vec<&[f64]> {
        vec![
            &self.actor.lambda,
            &self.actor.theta,
            &self.actor.w,
            &self.critic.lambda,
            &self.critic.theta,
            &self.critic.w,
        ]
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            &mut self.actor.lambda,
            &mut self.actor.theta,
            &mut self.actor.w,
            &mut self.critic.lambda,
            &mut self.critic.theta,
            &mut self.critic.w,
        ]
    }

    fn actor_backward(
        &self,
        s: &[f64],
        head: &mut dyn FnMut(&GaussianPolicy) -> PolicyPartials,
        grads: &mut [Vec<f64>],
    ) -> Result<GaussianPolicy> {
        let (e_mu, e_sigma, state) = self.actor_expectations(s)?;
        let policy = self.policy_from(&e_mu, &e_sigma)?;
        let partials = head(&policy);
        let k = self.readout.n_actions;
        let w = &self.actor.w;

        // ∂L/∂⟨O⟩ per observable, folded into one diagonal observable for a single adjoint sweep
        let mut diag = vec![0.0; 1 << self.actor_plan.n_qubits()];
        for i in 0..k {
            let d_mu = partials.d_mu[i];
            let d_sigma = partials.d_sigma[i];
            grads[ACTOR_W][i] += d_mu * e_mu[i];
            grads[ACTOR_W][k + i] += d_sigma * policy.sigma[i] * e_sigma[i];
            let c_mu = d_mu * w[i];
            let c_sigma = d_sigma * policy.sigma[i] * w[k + i];
            for ((d, pm), ps) in diag.iter_mut().zip(&self.mu_diag[i]).zip(&self.sigma_diag[i]) {
                *d += c_mu * pm + c_sigma * ps;
            }
        }
        let (lambda_grads, rest) = grads.split_at_mut(ACTOR_THETA);
        accumulate_slot_gradients(
            &self.actor_plan,
            &self.actor,
            s,
            &state,
            &diag,
            &mut rest[0],
            &mut lambda_grads[ACTOR_LAMBDA],
        );
        Ok(policy)
    }

    fn critic_backward(
        &self,
        s: &[f64],
        head: &mut dyn FnMut(f64) -> f64,
        grads: &mut [Vec<f64>],
    ) -> Result<f64> {
        let state = self.critic_plan.forward(&self.critic, s)?;
        let e: Vec<f64> = self.critic_masks.iter().map(|&m| state.expectation_mask(m)).collect();
        let value: f64 = e.iter().zip(&self.critic.w).map(|(e, w)| e * w).sum();
        let d_value = head(value);
        let mut diag = vec![0.0; 1 << self.critic_plan.n_qubits()];
        for (j, (ej, wj)) in e.iter().zip(&self.critic.w).enumerate() {
            grads[CRITIC_W][j] += d_value * ej;
            let c = d_value * wj;
            for (d, p) in diag.iter_mut().zip(&self.critic_diag[j]) {
                *d += c * p;
            }
        }
        let (lambda_part, rest) = grads.split_at_mut(CRITIC_PHI);
        accumulate_slot_gradients(
            &self.critic_plan,
            &self.critic,
            s,
            &state,
            &diag,
            &mut rest[0],
            &mut lambda_part[CRITIC_LAMBDA],
        );
        Ok(value)
    }
}

/// Serialized quantum agent: both circuits with their parameters and the readout id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub readout: ReadoutId,
    pub n_actions: usize,
    pub actor: CircuitCheckpoint,
    pub critic: CircuitCheckpoint,
}

impl AgentCheckpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
