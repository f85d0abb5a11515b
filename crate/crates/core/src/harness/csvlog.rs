use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ppo::IterationRecord;

pub const SEED_PREFIX: &str = "seed_";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

const BASE_COLUMNS: [&str; 4] = ["iteration", "env_steps", "mean_episode_reward", "std_episode_reward"];

pub fn seed_file(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("{SEED_PREFIX}{seed}.csv"))
}

/// Streams per-iteration records of one seed to CSV.
pub struct SeedLog {
    writer: csv::Writer<File>,
    wrote_header: bool,
}

impl SeedLog {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(SeedLog { writer: csv::Writer::from_path(path)?, wrote_header: false })
    }

    pub fn append(&mut self, record: &IterationRecord) -> Result<()> {
        if !self.wrote_header {
            let header = BASE_COLUMNS
                .iter()
                .map(|c| c.to_string())
                .chain(record.learning_rates.iter().map(|(name, _)| format!("lr_{name}")));
            self.writer.write_record(header)?;
            self.wrote_header = true;
        }
        let row = [
            record.iteration.to_string(),
            record.env_steps.to_string(),
            record.mean_episode_reward.to_string(),
            record.std_episode_reward.to_string(),
        ]
        .into_iter()
        .chain(record.learning_rates.iter().map(|(_, lr)| lr.to_string()));
        self.writer.write_record(row)?;
        self.writer.flush()?;
        Ok(())
    }
}

/// One row of a per-seed CSV as read back.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRow {
    pub iteration: usize,
    pub env_steps: u64,
    pub mean_episode_reward: f64,
    pub std_episode_reward: f64,
}

fn parse<T: std::str::FromStr>(field: Option<&str>, what: &str, path: &Path) -> Result<T> {
    field
        .and_then(|f| f.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("{}: bad or missing {what}", path.display())))
}

pub fn read_seed_csv(path: &Path) -> Result<Vec<SeedRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.len() < BASE_COLUMNS.len() || header.iter().zip(BASE_COLUMNS).any(|(a, b)| a != b) {
        return Err(Error::Parse(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        rows.push(SeedRow {
            iteration: parse(r.get(0), "iteration", path)?,
            env_steps: parse(r.get(1), "env_steps", path)?,
            mean_episode_reward: parse(r.get(2), "mean_episode_reward", path)?,
            std_episode_reward: parse(r.get(3), "std_episode_reward", path)?,
        });
    }
    Ok(rows)
}

/// Seed CSVs in `dir`, ordered by seed.
pub fn seed_files(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(seed) = name.strip_prefix(SEED_PREFIX).and_then(|r| r.strip_suffix(".csv")) {
            if let Ok(seed) = seed.parse() {
                found.push((seed, path));
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Cross-seed statistics at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub iteration: usize,
    pub env_steps: u64,
    pub mean: f64,
    /// Population standard deviation over seeds.
    pub std: f64,
    pub seeds: usize,
}

/// Combines per-seed curves. All seeds must share the same step grid; longer
/// runs are cut to the shortest one.
pub fn aggregate(runs: &[Vec<SeedRow>]) -> Result<Vec<AggregateRow>> {
    if runs.is_empty() {
        return Err(Error::config("nothing to aggregate"));
    }
    let len = runs.iter().map(Vec::len).min().unwrap_or(0);
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let first = &runs[0][i];
        if runs.iter().any(|r| r[i].env_steps != first.env_steps || r[i].iteration != first.iteration) {
            return Err(Error::Parse(format!("seeds disagree on the step count of row {i}")));
        }
        let xs: Vec<f64> = runs.iter().map(|r| r[i].mean_episode_reward).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        out.push(AggregateRow { iteration: first.iteration, env_steps: first.env_steps, mean, std: var.sqrt(), seeds: runs.len() });
    }
    Ok(out)
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "env_steps", "mean", "std", "seeds"])?;
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            r.env_steps.to_string(),
            r.mean.to_string(),
            r.std.to_string(),
            r.seeds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        rows.push(AggregateRow {
            iteration: parse(r.get(0), "iteration", path)?,
            env_steps: parse(r.get(1), "env_steps", path)?,
            mean: parse(r.get(2), "mean", path)?,
            std: parse(r.get(3), "std", path)?,
            seeds: parse(r.get(4), "seeds", path)?,
        });
    }
    Ok(rows)
}

/// Writes `text` to `path` in one go.
pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
