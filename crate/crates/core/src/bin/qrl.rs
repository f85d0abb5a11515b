use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use qrl::harness::{
    aggregate_dir, analyze_circuit, report_parameters, run_experiment_in, AgentConfig, AnalyzeOptions, ExperimentConfig,
    OUTPUT_ROOT_VAR,
};

#[derive(Parser)]
#[command(name = "qrl", version, about = "Quantum actor-critic agents trained with PPO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of an experiment and aggregate the curves.
    Train {
        config: PathBuf,
        /// Root for relative output directories.
        #[arg(long, env = OUTPUT_ROOT_VAR, default_value = ".")]
        output_root: PathBuf,
    },
    /// Count trainable parameters per group.
    Params {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Dead-parameter scan and expectation-variance table for a quantum agent.
    Analyze {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Comma-separated register sizes for the variance table.
        #[arg(long, value_delimiter = ',')]
        variance_qubits: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Rebuild aggregate.csv and the plot from the seed CSVs in a directory.
    Aggregate { dir: PathBuf },
}

fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { config, output_root } => {
            let config = load(&config)?;
            let dir = config.output_dir_in(&output_root);
            let out = run_experiment_in(&config, &dir)?;
            for s in &out.seeds {
                let last = s.records.last();
                println!(
                    "seed {:>4}: {} iterations, final mean episode reward {:.2}",
                    s.seed,
                    s.records.len(),
                    last.map_or(f64::NAN, |r| r.mean_episode_reward)
                );
            }
            if let Some(last) = out.aggregate.last() {
                println!("aggregate at {} steps: {:.2} ± {:.2}", last.env_steps, last.mean, last.std);
            }
            println!("output: {}", out.dir.display());
        }
        Command::Params { config, json } => {
            let report = report_parameters(&load(&config)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{report}");
            }
        }
        Command::Analyze { config, trials, tol, samples, variance_qubits, seed, json } => {
            let config = load(&config)?;
            let AgentConfig::Quantum { vqc, .. } = &config.agent else {
                anyhow::bail!("analyze needs a quantum agent, got {}", config.agent.kind());
            };
            let opts = AnalyzeOptions { trials, tol, samples, variance_qubits, seed };
            let report = analyze_circuit(vqc, &opts)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{report}");
            }
        }
        Command::Aggregate { dir } => {
            let rows = aggregate_dir(&dir)?;
            println!("aggregated {} iterations in {}", rows.len(), dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
