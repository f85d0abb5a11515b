use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::diff::{dead_parameter_scan, variance_scan, SlotId, VarianceStats};
use crate::error::{Error, Result};
use crate::qpolicy::build_readout;
use crate::qsim::ZProduct;
use crate::vqc::{CircuitPlan, VqcConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeOptions {
    pub trials: usize,
    pub tol: f64,
    pub samples: usize,
    /// Register sizes for the variance table; empty means the config's own size.
    pub variance_qubits: Vec<usize>,
    pub seed: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { trials: 20, tol: 1e-10, samples: 1000, variance_qubits: Vec::new(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableScan {
    /// `mu[i]`, `sigma[i]` or `critic[j]`.
    pub role: String,
    pub observable: String,
    pub dead: Vec<SlotId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub observable: String,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitAnalysis {
    pub config: VqcConfig,
    pub n_qubits: usize,
    pub n_lambda: usize,
    pub n_theta: usize,
    pub per_observable: Vec<ObservableScan>,
    /// Dead for every actor observable.
    pub actor_dead: Vec<SlotId>,
    /// Dead for every critic observable.
    pub critic_dead: Vec<SlotId>,
    /// Dead for every observable of the readout.
    pub dead: Vec<SlotId>,
    /// Ordered by qubit count.
    pub variance: Vec<VarianceRow>,
}

/// Dead-parameter scans for each readout observable and a variance table of the
/// full Z-product observable.
pub fn analyze_circuit(config: &VqcConfig, opts: &AnalyzeOptions) -> Result<CircuitAnalysis> {
    config.validate()?;
    let plan = CircuitPlan::build(config)?;
    let n = config.n_qubits();
    let readout = build_readout(config.readout, n, config.n_actions)?;

    let mut per_observable = Vec::new();
    let mut roles: Vec<(String, &ZProduct)> = Vec::new();
    for (i, o) in readout.mu.iter().enumerate() {
        roles.push((format!("mu[{i}]"), o));
    }
    for (i, o) in readout.sigma.iter().enumerate() {
        roles.push((format!("sigma[{i}]"), o));
    }
    for (j, o) in readout.critic.iter().enumerate() {
        roles.push((format!("critic[{j}]"), o));
    }
    for (role, obs) in &roles {
        let dead = dead_parameter_scan(&plan, std::slice::from_ref(*obs), opts.trials, opts.tol, opts.seed)?;
        per_observable.push(ObservableScan { role: role.clone(), observable: obs.to_string(), dead: dead.into_iter().collect() });
    }
    let actor_obs: Vec<ZProduct> = readout.mu.iter().chain(&readout.sigma).cloned().collect();
    let all_obs: Vec<ZProduct> = actor_obs.iter().chain(&readout.critic).cloned().collect();
    let scan = |obs: &[ZProduct]| -> Result<Vec<SlotId>> {
        Ok(dead_parameter_scan(&plan, obs, opts.trials, opts.tol, opts.seed)?.into_iter().collect())
    };

    let mut sizes: BTreeSet<usize> = opts.variance_qubits.iter().copied().collect();
    if sizes.is_empty() {
        sizes.insert(n);
    }
    let mut variance = Vec::new();
    for q in sizes {
        if q == 0 {
            return Err(Error::config("variance table needs at least one qubit"));
        }
        let sized = VqcConfig { n_features: q, stack_factor: 1, ..config.clone() };
        let obs = ZProduct::all(q);
        let VarianceStats { n_qubits, samples, mean, variance: var } = variance_scan(&sized, &obs, opts.samples, opts.seed)?;
        variance.push(VarianceRow { n_qubits, n_layers: config.n_layers, observable: obs.to_string(), samples, mean, variance: var });
    }

    Ok(CircuitAnalysis {
        config: config.clone(),
        n_qubits: n,
        n_lambda: plan.n_lambda(),
        n_theta: plan.n_theta(),
        per_observable,
        actor_dead: scan(&actor_obs)?,
        critic_dead: scan(&readout.critic)?,
        dead: scan(&all_obs)?,
        variance,
    })
}

fn slots(list: &[SlotId]) -> String {
    if list.is_empty() {
        "none".into()
    } else {
        list.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for CircuitAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(
            f,
            "circuit: {} qubits, {} layers, {:?}, {:?}, readout {}",
            self.n_qubits, c.n_layers, c.embedding, c.entangler, c.readout
        )?;
        writeln!(f, "slots: {} lambda, {} theta", self.n_lambda, self.n_theta)?;
        writeln!(f, "dead parameters per observable:")?;
        for o in &self.per_observable {
            writeln!(f, "  {:<10} {:<12} {}", o.role, o.observable, slots(&o.dead))?;
        }
        writeln!(f, "dead for all actor observables:  {}", slots(&self.actor_dead))?;
        writeln!(f, "dead for all critic observables: {}", slots(&self.critic_dead))?;
        writeln!(f, "dead for the whole readout:      {}", slots(&self.dead))?;
        writeln!(f, "variance of the full Z product:")?;
        writeln!(f, "  {:>6} {:>6} {:>8} {:>12} {:>12}", "qubits", "layers", "samples", "mean", "variance")?;
        for r in &self.variance {
            writeln!(f, "  {:>6} {:>6} {:>8} {:>12.5} {:>12.6}", r.n_qubits, r.n_layers, r.samples, r.mean, r.variance)?;
        }
        Ok(())
    }
}
