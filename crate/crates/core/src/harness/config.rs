use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::envs::{Env, NormalizeObservation, Pendulum, SelectFeatures};
use crate::error::{Error, Result};
use crate::ppo::{env_seed, TrainConfig};
use crate::qpolicy::{ActorCritic, MlpActorCritic, MlpConfig, QuantumAgent};
use crate::vqc::VqcConfig;

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "QRL_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvName {
    #[default]
    Pendulum,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub name: EnvName,
    /// Map observations onto `[-π/2, π/2]`. Unset follows the agent: on for
    /// normalized embeddings, off otherwise.
    pub normalize: Option<bool>,
    /// Feature indices to keep, in order.
    pub select_features: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentConfig {
    Quantum {
        vqc: VqcConfig,
        #[serde(default = "default_theta_std")]
        theta_init_std: f64,
    },
    Mlp {
        #[serde(default)]
        mlp: MlpConfig,
    },
}

fn default_theta_std() -> f64 {
    0.1
}

impl AgentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            AgentConfig::Quantum { .. } => "quantum",
            AgentConfig::Mlp { .. } => "mlp",
        }
    }

    /// Builds a freshly initialized agent for the given spaces.
    pub fn build(&self, obs_dim: usize, n_actions: usize, seed: u64) -> Result<Box<dyn ActorCritic + Send>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Ok(match self {
            AgentConfig::Quantum { vqc, theta_init_std } => {
                if vqc.n_features != obs_dim || vqc.n_actions != n_actions {
                    return Err(Error::config(format!(
                        "circuit expects {} features / {} actions, environment provides {obs_dim} / {n_actions}",
                        vqc.n_features, vqc.n_actions
                    )));
                }
                Box::new(QuantumAgent::new(vqc, *theta_init_std, &mut rng)?)
            }
            AgentConfig::Mlp { mlp } => Box::new(MlpActorCritic::new(obs_dim, n_actions, mlp, &mut rng)?),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AgentConfig::Quantum { vqc, theta_init_std } => {
                if !(*theta_init_std >= 0.0 && theta_init_std.is_finite()) {
                    return Err(Error::config(format!("theta_init_std {theta_init_std}")));
                }
                vqc.validate()
            }
            AgentConfig::Mlp { mlp } => {
                if mlp.hidden.contains(&0) {
                    return Err(Error::config("hidden layer of width 0"));
                }
                if !mlp.init_log_std.is_finite() {
                    return Err(Error::config(format!("init_log_std {}", mlp.init_log_std)));
                }
                Ok(())
            }
        }
    }

    fn default_normalize(&self) -> bool {
        match self {
            AgentConfig::Quantum { vqc, .. } => vqc.embedding.expects_normalized(),
            AgentConfig::Mlp { .. } => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub env: EnvConfig,
    pub agent: AgentConfig,
    /// `train.seed` is replaced by each entry of `seeds`.
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Relative paths resolve against the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Reward line drawn in plots. −200 is the customary Pendulum target.
    #[serde(default = "default_threshold")]
    pub solved_threshold: f64,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_threshold() -> f64 {
    -200.0
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks everything a run needs, including that agent and environment fit.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config(format!("experiment name {:?}", self.name)));
        }
        self.agent.validate()?;
        self.train.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::config("no seeds given"));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        if !self.solved_threshold.is_finite() {
            return Err(Error::config("solved_threshold must be finite"));
        }
        let env = self.build_env(0)?;
        self.agent.build(env.spec().obs_dim(), env.spec().action_dim(), 0)?;
        Ok(())
    }

    pub fn normalize(&self) -> bool {
        self.env.normalize.unwrap_or_else(|| self.agent.default_normalize())
    }

    /// The wrapped environment for one seed: selection first, then normalization.
    pub fn build_env(&self, seed: u64) -> Result<Box<dyn Env + Send>> {
        let base = match self.env.name {
            EnvName::Pendulum => Pendulum::new(env_seed(seed)),
        };
        let selected: Box<dyn Env + Send> = match &self.env.select_features {
            Some(idx) => Box::new(SelectFeatures::new(base, idx.clone())?),
            None => Box::new(base),
        };
        Ok(if self.normalize() { Box::new(NormalizeObservation::new(selected)?) } else { selected })
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig { seed, ..self.train.clone() }
    }

    /// Output directory, resolved against `root` when relative.
    pub fn output_dir_in(&self, root: &Path) -> PathBuf {
        let dir = self.output_dir.clone().unwrap_or_else(|| Path::new("runs").join(&self.name));
        if dir.is_absolute() {
            dir
        } else {
            root.join(dir)
        }
    }

    /// Output directory, resolved against `$QRL_OUTPUT_ROOT` (default: the working directory).
    pub fn output_dir(&self) -> PathBuf {
        let root = std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
        self.output_dir_in(&root)
    }
}
