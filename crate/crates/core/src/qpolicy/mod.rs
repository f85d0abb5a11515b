//! Readout configurations, the Gaussian policy head, the quantum actor-critic
//! and the classical MLP baseline.

mod agent;
mod gaussian;
mod mlp;

pub use agent::{ActorCritic, AgentCheckpoint, GroupInfo, GroupRole, PolicyPartials, QuantumAgent};
pub use gaussian::GaussianPolicy;
pub use mlp::{Activation, LayerShape, MlpActorCritic, MlpConfig};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::ZProduct;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReadoutId {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
    M9,
}

/// How the critic combines its observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticForm {
    /// `Σ_j w_j ⟨Z_j⟩` over every qubit.
    Sum,
    /// `w_0 ⟨Z_0⟩`.
    Single,
    /// `w_0 ⟨Π_j Z_j⟩`.
    Product,
}

impl ReadoutId {
    pub const ALL: [ReadoutId; 9] = [
        ReadoutId::M1,
        ReadoutId::M2,
        ReadoutId::M3,
        ReadoutId::M4,
        ReadoutId::M5,
        ReadoutId::M6,
        ReadoutId::M7,
        ReadoutId::M8,
        ReadoutId::M9,
    ];

    fn row(self) -> usize {
        self as usize
    }

    /// Number of consecutive qubits in the mean observable (1, 2 or 3).
    fn mean_width(self) -> usize {
        self.row() / 3 + 1
    }

    pub fn critic_form(self) -> CriticForm {
        match self.row() % 3 {
            0 => CriticForm::Sum,
            1 => CriticForm::Single,
            _ => CriticForm::Product,
        }
    }
}

impl fmt::Display for ReadoutId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.row() + 1)
    }
}

impl FromStr for ReadoutId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: usize = s
            .trim()
            .trim_start_matches(['M', 'm'])
            .parse()
            .map_err(|_| Error::Parse(format!("unknown readout {s:?}")))?;
        ReadoutId::ALL
            .get(n.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown readout {s:?}")))
    }
}

/// Observable assignment for one readout on a concrete register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutConfig {
    pub id: ReadoutId,
    pub n_qubits: usize,
    pub n_actions: usize,
    /// Mean observable per action.
    pub mu: Vec<ZProduct>,
    /// Standard-deviation observable per action.
    pub sigma: Vec<ZProduct>,
    /// Critic observables, one weight each.
    pub critic: Vec<ZProduct>,
}

impl ReadoutConfig {
    pub fn critic_form(&self) -> CriticForm {
        self.id.critic_form()
    }
}

pub fn actor_weight_count(n_actions: usize) -> usize {
    2 * n_actions
}

pub fn critic_weight_count(id: ReadoutId, n_qubits: usize) -> usize {
    match id.critic_form() {
        CriticForm::Sum => n_qubits,
        CriticForm::Single | CriticForm::Product => 1,
    }
}

fn wrapped_product(start: usize, width: usize, n_qubits: usize) -> Result<ZProduct> {
    ZProduct::new((start..start + width).map(|q| q % n_qubits).collect())
}

/// Builds the observables of readout `id`. Qubit indices wrap modulo `n_qubits`;
/// a product that would hit the same qubit twice after wrapping is rejected.
pub fn build_readout(id: ReadoutId, n_qubits: usize, n_actions: usize) -> Result<ReadoutConfig> {
    if n_qubits == 0 || n_actions == 0 {
        return Err(Error::config("readout needs at least one qubit and one action"));
    }
    let width = id.mean_width();
    let mut mu = Vec::with_capacity(n_actions);
    let mut sigma = Vec::with_capacity(n_actions);
    for i in 0..n_actions {
        let (mu_obs, sigma_obs) = match width {
            1 => (wrapped_product(i, 1, n_qubits), wrapped_product(i + 1, 1, n_qubits)),
            2 => (wrapped_product(i, 2, n_qubits), wrapped_product(i + 2, 1, n_qubits)),
            _ => (wrapped_product(i, 3, n_qubits), wrapped_product(i + 3, 3, n_qubits)),
        };
        let wrap_err = |e: Error| Error::config(format!("readout {id} on {n_qubits} qubits, action {i}: {e}"));
        mu.push(mu_obs.map_err(wrap_err)?);
        sigma.push(sigma_obs.map_err(wrap_err)?);
    }
    let critic = match id.critic_form() {
        CriticForm::Sum => (0..n_qubits).map(ZProduct::single).collect(),
        CriticForm::Single => vec![ZProduct::single(0)],
        CriticForm::Product => vec![ZProduct::all(n_qubits)],
    };
    Ok(ReadoutConfig { id, n_qubits, n_actions, mu, sigma, critic })
}
