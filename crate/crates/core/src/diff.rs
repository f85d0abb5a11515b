//! Analytic gradients of circuit expectations and circuit-analysis scans.
//!
//! Gradients come from a single adjoint sweep: run the circuit forward once,
//! apply the (diagonal) observable to get the bra, then walk the gates in
//! reverse, undoing each on both bra and ket and reading off
//! `∂⟨O⟩/∂angle = Im⟨bra|G|ket⟩` for every rotation with generator `G`.
//! Encoding angles are then chained into their λ-slots.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{StateVector, ZProduct};
use crate::vqc::{embed_angle_dlambda, AngleBinding, CircuitPlan, ParameterStore, PlanOp, VqcConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct GradientRecord {
    /// Index of the observable in the list passed to [`gradients`].
    pub observable: usize,
    pub value: f64,
    pub d_theta: Vec<f64>,
    pub d_lambda: Vec<f64>,
}

/// Identifies one trainable circuit parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "group", content = "index", rename_all = "snake_case")]
pub enum SlotId {
    Lambda(usize),
    Theta(usize),
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotId::Lambda(i) => write!(f, "lambda[{i}]"),
            SlotId::Theta(i) => write!(f, "theta[{i}]"),
        }
    }
}

/// Reverse sweep over `plan` for the diagonal observable `diag`, starting from
/// the already computed output state `final_state`. Calls `sink(op_index, binding, dO/dangle)`
/// once per rotation, last gate first.
pub(crate) fn adjoint_sweep(
    plan: &CircuitPlan,
    params: &ParameterStore,
    s: &[f64],
    final_state: &StateVector,
    diag: &[f64],
    mut sink: impl FnMut(usize, AngleBinding, f64),
) {
    let mut ket = final_state.clone();
    let mut bra = final_state.clone();
    bra.scale_diagonal(diag);
    for (index, op) in plan.ops().iter().enumerate().rev() {
        match *op {
            PlanOp::Rotation { kind, qubit, binding } => {
                sink(index, binding, ket.generator_im_overlap(&bra, kind, qubit));
                let angle = plan.angle(binding, params, s);
                ket.rotate_unchecked(kind, qubit, -angle);
                bra.rotate_unchecked(kind, qubit, -angle);
            }
            PlanOp::Entangle { kind, control, target } => {
                ket.controlled_unchecked(kind, control, target);
                bra.controlled_unchecked(kind, control, target);
            }
        }
    }
}

/// Adds `∂⟨D⟩/∂slot` into `d_theta` and `d_lambda` for the diagonal observable `D`.
pub(crate) fn accumulate_slot_gradients(
    plan: &CircuitPlan,
    params: &ParameterStore,
    s: &[f64],
    final_state: &StateVector,
    diag: &[f64],
    d_theta: &mut [f64],
    d_lambda: &mut [f64],
) {
    let mode = plan.embedding();
    adjoint_sweep(plan, params, s, final_state, diag, |_, binding, g| match binding {
        AngleBinding::Variational { theta_slot } => d_theta[theta_slot] += g,
        AngleBinding::Encoding { feature, lambda_slot, .. } => {
            d_lambda[lambda_slot] += g * embed_angle_dlambda(s[feature], params.lambda[lambda_slot], mode)
        }
    });
}

/// Exact partials of each observable's expectation with respect to every θ- and λ-slot.
pub fn gradients(
    plan: &CircuitPlan,
    params: &ParameterStore,
    s: &[f64],
    obs_list: &[ZProduct],
) -> Result<Vec<GradientRecord>> {
    let state = plan.forward(params, s)?;
    let n = plan.n_qubits();
    obs_list
        .iter()
        .enumerate()
        .map(|(i, obs)| {
            let value = state.expectation(obs)?;
            let mut d_theta = vec![0.0; plan.n_theta()];
            let mut d_lambda = vec![0.0; plan.n_lambda()];
            accumulate_slot_gradients(plan, params, s, &state, &obs.diagonal(n), &mut d_theta, &mut d_lambda);
            check_finite(&d_theta, SlotId::Theta)?;
            check_finite(&d_lambda, SlotId::Lambda)?;
            Ok(GradientRecord { observable: i, value, d_theta, d_lambda })
        })
        .collect()
}

fn check_finite(values: &[f64], slot: fn(usize) -> SlotId) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::numeric(format!("non-finite partial for {}", slot(i)))),
        None => Ok(()),
    }
}

/// Per-gate partials `∂⟨obs⟩/∂angle`, indexed like `plan.ops()` (zero for entanglers).
pub fn gate_gradients(plan: &CircuitPlan, params: &ParameterStore, s: &[f64], obs: &ZProduct) -> Result<Vec<f64>> {
    let state = plan.forward(params, s)?;
    let mut out = vec![0.0; plan.ops().len()];
    adjoint_sweep(plan, params, s, &state, &obs.diagonal(plan.n_qubits()), |i, _, g| out[i] = g);
    Ok(out)
}

/// Runs the circuit with the angle of op `shifted` offset by `delta`.
fn forward_shifted(
    plan: &CircuitPlan,
    params: &ParameterStore,
    s: &[f64],
    shifted: usize,
    delta: f64,
) -> Result<StateVector> {
    plan.check(params, s)?;
    let mut state = StateVector::new(plan.n_qubits())?;
    for (index, op) in plan.ops().iter().enumerate() {
        match *op {
            PlanOp::Rotation { kind, qubit, binding } => {
                let mut angle = plan.angle(binding, params, s);
                if index == shifted {
                    angle += delta;
                }
                state.apply_rotation(kind, qubit, angle)?;
            }
            PlanOp::Entangle { kind, control, target } => state.apply_two_qubit(kind, control, target)?,
        }
    }
    Ok(state)
}

/// Two-point shift rule for the rotation at `op_index`:
/// `(⟨O⟩(angle + π/2) − ⟨O⟩(angle − π/2)) / 2`.
pub fn parameter_shift(
    plan: &CircuitPlan,
    params: &ParameterStore,
    s: &[f64],
    obs: &ZProduct,
    op_index: usize,
) -> Result<f64> {
    match plan.ops().get(op_index) {
        Some(PlanOp::Rotation { .. }) => {}
        Some(PlanOp::Entangle { .. }) => {
            return Err(Error::config(format!("op {op_index} is an entangling gate, not a rotation")))
        }
        None => return Err(Error::config(format!("op {op_index} out of range"))),
    }
    let plus = forward_shifted(plan, params, s, op_index, FRAC_PI_2)?.expectation(obs)?;
    let minus = forward_shifted(plan, params, s, op_index, -FRAC_PI_2)?.expectation(obs)?;
    Ok(0.5 * (plus - minus))
}

/// Random parameters and features for a plan: θ and λ uniform in `[-π, π]`,
/// features uniform in `[-π/2, π/2]` for normalized embeddings and `[-π, π]` otherwise.
pub fn random_assignment<R: Rng + ?Sized>(plan: &CircuitPlan, n_w: usize, rng: &mut R) -> (ParameterStore, Vec<f64>) {
    let params = ParameterStore {
        lambda: (0..plan.n_lambda()).map(|_| rng.random_range(-PI..PI)).collect(),
        theta: (0..plan.n_theta()).map(|_| rng.random_range(-PI..PI)).collect(),
        w: vec![1.0; n_w],
    };
    let half = if plan.embedding().expects_normalized() { FRAC_PI_2 } else { PI };
    let s = (0..plan.n_features()).map(|_| rng.random_range(-half..half)).collect();
    (params, s)
}

/// Slots whose partial stays below `tol` for every observable in `obs` at each of
/// `trials` random assignments. A slot that moves any observable is live.
pub fn dead_parameter_scan(
    plan: &CircuitPlan,
    obs: &[ZProduct],
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<BTreeSet<SlotId>> {
    if trials < 10 {
        return Err(Error::config(format!("dead-parameter scan needs ≥ 10 trials, got {trials}")));
    }
    if obs.is_empty() {
        return Err(Error::config("dead-parameter scan needs at least one observable"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut live_theta = vec![false; plan.n_theta()];
    let mut live_lambda = vec![false; plan.n_lambda()];
    for _ in 0..trials {
        let (params, s) = random_assignment(plan, 0, &mut rng);
        for record in gradients(plan, &params, &s, obs)? {
            for (live, d) in live_theta.iter_mut().zip(&record.d_theta) {
                *live |= d.abs() >= tol;
            }
            for (live, d) in live_lambda.iter_mut().zip(&record.d_lambda) {
                *live |= d.abs() >= tol;
            }
        }
    }
    let dead_theta = live_theta.iter().enumerate().filter(|(_, l)| !**l).map(|(i, _)| SlotId::Theta(i));
    let dead_lambda = live_lambda.iter().enumerate().filter(|(_, l)| !**l).map(|(i, _)| SlotId::Lambda(i));
    Ok(dead_lambda.chain(dead_theta).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceStats {
    pub n_qubits: usize,
    pub samples: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
}

/// Sample mean and variance of `⟨obs⟩` with θ uniform in `[-π, π]`, features
/// uniform in `[-π/2, π/2]` and λ = 1.
pub fn variance_scan(config: &VqcConfig, obs: &ZProduct, samples: usize, seed: u64) -> Result<VarianceStats> {
    if samples < 100 {
        return Err(Error::config(format!("variance scan needs ≥ 100 samples, got {samples}")));
    }
    let plan = CircuitPlan::build(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = StateVector::new(plan.n_qubits())?;
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let params = ParameterStore {
            lambda: vec![1.0; plan.n_lambda()],
            theta: (0..plan.n_theta()).map(|_| rng.random_range(-PI..PI)).collect(),
            w: Vec::new(),
        };
        let s: Vec<f64> = (0..plan.n_features()).map(|_| rng.random_range(-FRAC_PI_2..FRAC_PI_2)).collect();
        plan.forward_into(&params, &s, &mut state)?;
        values.push(state.expectation(obs)?);
    }
    let mean = values.iter().sum::<f64>() / samples as f64;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    Ok(VarianceStats { n_qubits: plan.n_qubits(), samples, mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpolicy::ReadoutId;
    use crate::qsim::{RotationKind, TwoQubitKind};
    use crate::vqc::{EmbeddingMode, Entangler};

    fn ry_plan(theta: f64) -> (CircuitPlan, ParameterStore) {
        let ops = vec![PlanOp::Rotation {
            kind: RotationKind::Ry,
            qubit: 0,
            binding: AngleBinding::Variational { theta_slot: 0 },
        }];
        let plan = CircuitPlan::custom(1, 1, EmbeddingMode::NormIdentity, ops).unwrap();
        (plan, ParameterStore { lambda: vec![], theta: vec![theta], w: vec![] })
    }

    #[test]
    fn single_ry_derivative_is_minus_sine() {
        let (plan, params) = ry_plan(0.7);
        let rec = &gradients(&plan, &params, &[0.0], &[ZProduct::single(0)]).unwrap()[0];
        assert!((rec.d_theta[0] - (-0.644217687)).abs() < 1e-9);
        assert!((rec.value - 0.7f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn zero_feature_gives_exact_zero_lambda_partial() {
        let config = VqcConfig {
            n_features: 2,
            stack_factor: 1,
            n_layers: 2,
            embedding: EmbeddingMode::NormIdentity,
            entangler: Entangler::CnotChain,
            readout: ReadoutId::M1,
            n_actions: 1,
        };
        let plan = CircuitPlan::build(&config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (params, _) = random_assignment(&plan, 0, &mut rng);
        let rec = &gradients(&plan, &params, &[0.0, 0.4], &[ZProduct::all(2)]).unwrap()[0];
        // qubit 0 reads feature 0 in both layers: slots 0 and 2
        assert_eq!(rec.d_lambda[0], 0.0);
        assert_eq!(rec.d_lambda[2], 0.0);
        assert_ne!(rec.d_lambda[1], 0.0);
    }

    #[test]
    fn shift_rule_at_cosine_extremum() {
        let (plan, params) = ry_plan(0.0);
        let g = parameter_shift(&plan, &params, &[0.0], &ZProduct::single(0), 0).unwrap();
        assert!(g.abs() < 1e-16);
    }

    #[test]
    fn rz_only_circuit_has_zero_shifts() {
        let ops = (0..3)
            .map(|t| PlanOp::Rotation {
                kind: RotationKind::Rz,
                qubit: t % 2,
                binding: AngleBinding::Variational { theta_slot: t },
            })
            .collect();
        let plan = CircuitPlan::custom(2, 1, EmbeddingMode::NormIdentity, ops).unwrap();
        let params = ParameterStore { lambda: vec![], theta: vec![0.3, -1.2, 2.2], w: vec![] };
        for i in 0..3 {
            for obs in [ZProduct::single(0), ZProduct::all(2)] {
                assert_eq!(parameter_shift(&plan, &params, &[0.0], &obs, i).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn shift_rule_rejects_entangler() {
        let ops = vec![PlanOp::Entangle { kind: TwoQubitKind::Cnot, control: 0, target: 1 }];
        let plan = CircuitPlan::custom(2, 1, EmbeddingMode::NormIdentity, ops).unwrap();
        let params = ParameterStore { lambda: vec![], theta: vec![], w: vec![] };
        let err = parameter_shift(&plan, &params, &[0.0], &ZProduct::single(0), 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(parameter_shift(&plan, &params, &[0.0], &ZProduct::single(0), 5).is_err());
    }

    #[test]
    fn scans_validate_their_budgets() {
        let (plan, _) = ry_plan(0.0);
        assert!(dead_parameter_scan(&plan, &[ZProduct::single(0)], 9, 1e-10, 0).is_err());
        let config = VqcConfig {
            n_features: 1,
            stack_factor: 1,
            n_layers: 1,
            embedding: EmbeddingMode::NormIdentity,
            entangler: Entangler::CnotChain,
            readout: ReadoutId::M1,
            n_actions: 1,
        };
        assert!(variance_scan(&config, &ZProduct::single(0), 99, 0).is_err());
    }

    #[test]
    fn single_qubit_variance_is_bounded_and_deterministic() {
        let config = VqcConfig {
            n_features: 1,
            stack_factor: 1,
            n_layers: 1,
            embedding: EmbeddingMode::NormIdentity,
            entangler: Entangler::CnotChain,
            readout: ReadoutId::M1,
            n_actions: 1,
        };
        let a = variance_scan(&config, &ZProduct::single(0), 2000, 9).unwrap();
        let b = variance_scan(&config, &ZProduct::single(0), 2000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.variance > 0.0 && a.variance <= 1.0);
        assert!(a.mean.abs() <= 1.0);
    }
}
