//! Experiment orchestration: configuration files, multi-seed runs, CSV logs,
//! seed aggregation, plots, parameter reports and circuit analysis.

mod analyze;
mod config;
mod csvlog;
mod plot;

pub use analyze::{analyze_circuit, AnalyzeOptions, CircuitAnalysis, ObservableScan, VarianceRow};
pub use config::{AgentConfig, EnvConfig, EnvName, ExperimentConfig, OUTPUT_ROOT_VAR};
pub use csvlog::{
    aggregate, read_aggregate, read_seed_csv, seed_file, seed_files, write_aggregate, AggregateRow, SeedLog, SeedRow,
    AGGREGATE_FILE,
};
pub use plot::learning_curve_svg;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ppo::{train, IterationRecord};
use crate::qpolicy::{GroupRole, LayerShape, MlpActorCritic, QuantumAgent};
use crate::vqc::count_parameters;

pub const PLOT_FILE: &str = "curve.svg";
pub const CONFIG_COPY: &str = "config.toml";

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub csv: PathBuf,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub dir: PathBuf,
    pub seeds: Vec<SeedOutcome>,
    pub aggregate: Vec<AggregateRow>,
}

/// Trains one seed and streams its records to `csv`.
pub fn run_seed(config: &ExperimentConfig, seed: u64, csv: &Path) -> Result<Vec<IterationRecord>> {
    let mut env = config.build_env(seed)?;
    let mut agent = config.agent.build(env.spec().obs_dim(), env.spec().action_dim(), seed)?;
    let mut log = SeedLog::create(csv)?;
    let mut log_err = None;
    let records = train(agent.as_mut(), env.as_mut(), &config.train_config(seed), |r| {
        if log_err.is_none() {
            log_err = log.append(r).err();
        }
    })?;
    match log_err {
        Some(e) => Err(e),
        None => Ok(records),
    }
}

/// Runs every seed of `config` into its output directory, then writes the
/// aggregate CSV and plot. The config is validated before any run starts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_in(config, &config.output_dir())
}

pub fn run_experiment_in(config: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    config.validate()?;
    std::fs::create_dir_all(dir)?;
    csvlog::write_text(&dir.join(CONFIG_COPY), &config.to_toml()?)?;

    let results: Vec<Result<SeedOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .seeds
            .iter()
            .map(|&seed| {
                scope.spawn(move || {
                    let csv = seed_file(dir, seed);
                    let records = run_seed(config, seed, &csv)?;
                    Ok(SeedOutcome { seed, csv, records })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::numeric("seed worker panicked"))))
            .collect()
    });
    let seeds = results.into_iter().collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate_files(dir, seeds.iter().map(|s| s.csv.clone()).collect(), &config.name, Some(config.solved_threshold))?;
    Ok(ExperimentOutcome { dir: dir.to_path_buf(), seeds, aggregate })
}

fn aggregate_files(dir: &Path, files: Vec<PathBuf>, title: &str, threshold: Option<f64>) -> Result<Vec<AggregateRow>> {
    let runs = files.iter().map(|p| read_seed_csv(p)).collect::<Result<Vec<_>>>()?;
    let rows = aggregate(&runs)?;
    write_aggregate(&dir.join(AGGREGATE_FILE), &rows)?;
    csvlog::write_text(&dir.join(PLOT_FILE), &learning_curve_svg(title, &rows, threshold))?;
    Ok(rows)
}

/// Recomputes `aggregate.csv` and the plot from the seed CSVs found in `dir`.
/// The threshold line is taken from a config copy in `dir` when present.
pub fn aggregate_dir(dir: &Path) -> Result<Vec<AggregateRow>> {
    let files: Vec<PathBuf> = seed_files(dir)?.into_iter().map(|(_, p)| p).collect();
    if files.is_empty() {
        return Err(Error::config(format!("no {}*.csv files in {}", csvlog::SEED_PREFIX, dir.display())));
    }
    let copy = dir.join(CONFIG_COPY);
    let (title, threshold) = match copy.exists().then(|| ExperimentConfig::load(&copy)).transpose()? {
        Some(c) => (c.name, Some(c.solved_threshold)),
        None => (dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(), None),
    };
    aggregate_files(dir, files, &title, threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupCount {
    pub name: String,
    pub role: GroupRole,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterReport {
    pub agent: String,
    pub groups: Vec<GroupCount>,
    pub actor_total: usize,
    pub critic_total: usize,
    pub total: usize,
    /// Dense layers of a classical agent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actor_layers: Option<Vec<LayerShape>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critic_layers: Option<Vec<LayerShape>>,
}

/// Trainable parameters per group. Quantum counts depend on the circuit only;
/// classical counts use the configured environment's dimensions.
pub fn report_parameters(config: &ExperimentConfig) -> Result<ParameterReport> {
    config.agent.validate()?;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    match &config.agent {
        AgentConfig::Quantum { vqc, .. } => {
            let agent = QuantumAgent::new(vqc, 0.1, &mut rng)?;
            let groups = counts(crate::qpolicy::ActorCritic::groups(&agent));
            let total: usize = groups.iter().map(|g| g.count).sum();
            let expected = count_parameters(vqc, vqc)?;
            if total != expected {
                return Err(Error::numeric(format!("group sum {total} differs from circuit count {expected}")));
            }
            let actor_total = groups.iter().filter(|g| g.name.starts_with("actor")).map(|g| g.count).sum();
            Ok(ParameterReport {
                agent: "quantum".into(),
                groups,
                actor_total,
                critic_total: total - actor_total,
                total,
                actor_layers: None,
                critic_layers: None,
            })
        }
        AgentConfig::Mlp { mlp } => {
            let env = config.build_env(0)?;
            let agent = MlpActorCritic::new(env.spec().obs_dim(), env.spec().action_dim(), mlp, &mut rng)?;
            let groups = counts(crate::qpolicy::ActorCritic::groups(&agent));
            let total: usize = groups.iter().map(|g| g.count).sum();
            let actor_total = groups.iter().filter(|g| g.name.starts_with("actor")).map(|g| g.count).sum();
            Ok(ParameterReport {
                agent: "mlp".into(),
                groups,
                actor_total,
                critic_total: total - actor_total,
                total,
                actor_layers: Some(agent.actor_layers()),
                critic_layers: Some(agent.critic_layers()),
            })
        }
    }
}

fn counts(groups: Vec<crate::qpolicy::GroupInfo>) -> Vec<GroupCount> {
    groups.into_iter().map(|g| GroupCount { name: g.name, role: g.role, count: g.len }).collect()
}

impl fmt::Display for ParameterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} agent", self.agent)?;
        for g in &self.groups {
            writeln!(f, "  {:<16} {:>6}", g.name, g.count)?;
        }
        let layer_lines = |f: &mut fmt::Formatter<'_>, name: &str, layers: &Option<Vec<LayerShape>>| -> fmt::Result {
            if let Some(layers) = layers {
                writeln!(f, "  {name} layers:")?;
                for l in layers {
                    writeln!(f, "    {:>4} -> {:<4} {:>6}", l.n_in, l.n_out, l.params)?;
                }
            }
            Ok(())
        };
        layer_lines(f, "actor", &self.actor_layers)?;
        layer_lines(f, "critic", &self.critic_layers)?;
        writeln!(f, "actor total  {}", self.actor_total)?;
        writeln!(f, "critic total {}", self.critic_total)?;
        writeln!(f, "total        {}", self.total)
    }
}
