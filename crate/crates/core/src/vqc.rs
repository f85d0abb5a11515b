//! Layered variational circuits: encoding, variational and entangling blocks
//! with data re-uploading in every layer and optional stacked encoding.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpolicy::{actor_weight_count, critic_weight_count, ReadoutId};
use crate::qsim::{RotationKind, StateVector, TwoQubitKind};

/// How a feature and its scaling parameter become a rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EmbeddingMode {
    RawArctan,
    RawSigmoid,
    NormIdentity,
    NormArctan,
    NormSigmoid,
}

impl EmbeddingMode {
    pub const ALL: [EmbeddingMode; 5] = [
        EmbeddingMode::RawArctan,
        EmbeddingMode::RawSigmoid,
        EmbeddingMode::NormIdentity,
        EmbeddingMode::NormArctan,
        EmbeddingMode::NormSigmoid,
    ];

    /// Whether the mode expects features already mapped into `[-π/2, π/2]`.
    pub fn expects_normalized(self) -> bool {
        matches!(
            self,
            EmbeddingMode::NormIdentity | EmbeddingMode::NormArctan | EmbeddingMode::NormSigmoid
        )
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Rotation angle for feature value `x` under scaling `lambda`.
pub fn embed_angle(x: f64, lambda: f64, mode: EmbeddingMode) -> f64 {
    let z = x * lambda;
    match mode {
        EmbeddingMode::NormIdentity => z,
        EmbeddingMode::NormArctan | EmbeddingMode::RawArctan => z.atan(),
        EmbeddingMode::NormSigmoid | EmbeddingMode::RawSigmoid => sigmoid(z),
    }
}

/// `∂ embed_angle / ∂ lambda`.
pub fn embed_angle_dlambda(x: f64, lambda: f64, mode: EmbeddingMode) -> f64 {
    let z = x * lambda;
    match mode {
        EmbeddingMode::NormIdentity => x,
        EmbeddingMode::NormArctan | EmbeddingMode::RawArctan => x / (1.0 + z * z),
        EmbeddingMode::NormSigmoid | EmbeddingMode::RawSigmoid => {
            let sg = sigmoid(z);
            x * sg * (1.0 - sg)
        }
    }
}

/// Clips each feature to its `(low, high)` bounds and maps it linearly onto `[-π/2, π/2]`.
pub fn normalize_features(s: &[f64], bounds: &[(f64, f64)]) -> Result<Vec<f64>> {
    if s.len() != bounds.len() {
        return Err(Error::config(format!(
            "observation has {} features but {} bounds were given",
            s.len(),
            bounds.len()
        )));
    }
    s.iter()
        .zip(bounds)
        .enumerate()
        .map(|(i, (&x, &(low, high)))| {
            if !x.is_finite() {
                return Err(Error::numeric(format!("feature {i} is {x}")));
            }
            if !low.is_finite() || !high.is_finite() || low >= high {
                return Err(Error::config(format!("feature {i} has invalid bounds ({low}, {high})")));
            }
            let t = (x.clamp(low, high) - low) / (high - low);
            Ok((t - 0.5) * PI)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Entangler {
    CnotChain,
    CzChain,
}

impl Entangler {
    pub fn gate(self) -> TwoQubitKind {
        match self {
            Entangler::CnotChain => TwoQubitKind::Cnot,
            Entangler::CzChain => TwoQubitKind::Cz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqcConfig {
    pub n_features: usize,
    #[serde(default = "default_stack")]
    pub stack_factor: usize,
    pub n_layers: usize,
    pub embedding: EmbeddingMode,
    #[serde(default = "default_entangler")]
    pub entangler: Entangler,
    pub readout: ReadoutId,
    #[serde(default = "default_actions")]
    pub n_actions: usize,
}

fn default_stack() -> usize {
    1
}
fn default_entangler() -> Entangler {
    Entangler::CnotChain
}
fn default_actions() -> usize {
    1
}

impl VqcConfig {
    pub fn n_qubits(&self) -> usize {
        self.n_features * self.stack_factor
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 || self.stack_factor == 0 || self.n_layers == 0 {
            return Err(Error::config(format!(
                "n_features ({}), stack_factor ({}) and n_layers ({}) must all be ≥ 1",
                self.n_features, self.stack_factor, self.n_layers
            )));
        }
        if self.n_actions == 0 {
            return Err(Error::config("n_actions must be ≥ 1"));
        }
        let n = self.n_qubits();
        if n > crate::qsim::MAX_QUBITS {
            return Err(Error::config(format!("{n} qubits exceeds the simulator limit")));
        }
        crate::qpolicy::build_readout(self.readout, n, self.n_actions)?;
        Ok(())
    }
}

/// Where a rotation gate takes its angle from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum AngleBinding {
    Encoding { feature: usize, lambda_slot: usize, layer: usize },
    Variational { theta_slot: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PlanOp {
    Rotation { kind: RotationKind, qubit: usize, binding: AngleBinding },
    Entangle { kind: TwoQubitKind, control: usize, target: usize },
}

/// Which block of a layer an op belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Encoding,
    Variational,
    Entangling,
}

impl PlanOp {
    pub fn block(&self) -> Block {
        match self {
            PlanOp::Rotation { binding: AngleBinding::Encoding { .. }, .. } => Block::Encoding,
            PlanOp::Rotation { binding: AngleBinding::Variational { .. }, .. } => Block::Variational,
            PlanOp::Entangle { .. } => Block::Entangling,
        }
    }
}

/// Ordered gate list with symbolic angle sources. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitPlan {
    n_qubits: usize,
    n_features: usize,
    embedding: EmbeddingMode,
    n_lambda: usize,
    n_theta: usize,
    ops: Vec<PlanOp>,
}

impl CircuitPlan {
    /// The standard layered circuit: per layer RY/RZ encoding on every qubit,
    /// one variational RY per qubit, then a linear entangling chain.
    pub fn build(config: &VqcConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_qubits();
        let mut ops = Vec::with_capacity(config.n_layers * (4 * n - 1));
        for layer in 0..config.n_layers {
            for q in 0..n {
                let binding = AngleBinding::Encoding {
                    feature: q % config.n_features,
                    lambda_slot: layer * n + q,
                    layer,
                };
                ops.push(PlanOp::Rotation { kind: RotationKind::Ry, qubit: q, binding });
                ops.push(PlanOp::Rotation { kind: RotationKind::Rz, qubit: q, binding });
            }
            for q in 0..n {
                ops.push(PlanOp::Rotation {
                    kind: RotationKind::Ry,
                    qubit: q,
                    binding: AngleBinding::Variational { theta_slot: layer * n + q },
                });
            }
            for q in 0..n.saturating_sub(1) {
                ops.push(PlanOp::Entangle { kind: config.entangler.gate(), control: q, target: q + 1 });
            }
        }
        Ok(CircuitPlan {
            n_qubits: n,
            n_features: config.n_features,
            embedding: config.embedding,
            n_lambda: n * config.n_layers,
            n_theta: n * config.n_layers,
            ops,
        })
    }

    /// An arbitrary op list. Slot counts are inferred from the highest slot index used.
    pub fn custom(
        n_qubits: usize,
        n_features: usize,
        embedding: EmbeddingMode,
        ops: Vec<PlanOp>,
    ) -> Result<Self> {
        StateVector::new(n_qubits)?;
        let mut n_lambda = 0;
        let mut n_theta = 0;
        for op in &ops {
            match *op {
                PlanOp::Rotation { qubit, binding, .. } => {
                    if qubit >= n_qubits {
                        return Err(Error::config(format!("rotation on qubit {qubit} ≥ {n_qubits}")));
                    }
                    match binding {
                        AngleBinding::Encoding { feature, lambda_slot, .. } => {
                            if feature >= n_features {
                                return Err(Error::config(format!(
                                    "encoding reads feature {feature} ≥ {n_features}"
                                )));
                            }
                            n_lambda = n_lambda.max(lambda_slot + 1);
                        }
                        AngleBinding::Variational { theta_slot } => n_theta = n_theta.max(theta_slot + 1),
                    }
                }
                PlanOp::Entangle { control, target, .. } => {
                    if control == target || control >= n_qubits || target >= n_qubits {
                        return Err(Error::config(format!(
                            "invalid two-qubit gate ({control}, {target}) on {n_qubits} qubits"
                        )));
                    }
                }
            }
        }
        Ok(CircuitPlan { n_qubits, n_features, embedding, n_lambda, n_theta, ops })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn embedding(&self) -> EmbeddingMode {
        self.embedding
    }

    pub fn n_lambda(&self) -> usize {
        self.n_lambda
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn ops(&self) -> &[PlanOp] {
        &self.ops
    }

    pub(crate) fn check(&self, params: &ParameterStore, s: &[f64]) -> Result<()> {
        if s.len() != self.n_features {
            return Err(Error::config(format!(
                "observation has {} features, circuit expects {}",
                s.len(),
                self.n_features
            )));
        }
        if params.lambda.len() != self.n_lambda || params.theta.len() != self.n_theta {
            return Err(Error::config(format!(
                "parameter store has {}/{} lambda/theta slots, circuit needs {}/{}",
                params.lambda.len(),
                params.theta.len(),
                self.n_lambda,
                self.n_theta
            )));
        }
        Ok(())
    }

    /// Resolved angle of a rotation op.
    #[inline]
    pub(crate) fn angle(&self, binding: AngleBinding, params: &ParameterStore, s: &[f64]) -> f64 {
        match binding {
            AngleBinding::Encoding { feature, lambda_slot, .. } => {
                embed_angle(s[feature], params.lambda[lambda_slot], self.embedding)
            }
            AngleBinding::Variational { theta_slot } => params.theta[theta_slot],
        }
    }

    /// Runs the circuit on `|0…0⟩`.
    pub fn forward(&self, params: &ParameterStore, s: &[f64]) -> Result<StateVector> {
        let mut state = StateVector::new(self.n_qubits)?;
        self.forward_into(params, s, &mut state)?;
        Ok(state)
    }

    /// Like [`forward`](Self::forward) but reuses `state`, which is reset first.
    pub fn forward_into(&self, params: &ParameterStore, s: &[f64], state: &mut StateVector) -> Result<()> {
        self.check(params, s)?;
        if state.n_qubits() != self.n_qubits {
            *state = StateVector::new(self.n_qubits)?;
        } else {
            state.reset();
        }
        for (index, op) in self.ops.iter().enumerate() {
            match *op {
                PlanOp::Rotation { kind, qubit, binding } => {
                    let angle = self.angle(binding, params, s);
                    if !angle.is_finite() {
                        return Err(Error::numeric(format!("op {index}: angle {angle} from {binding:?}")));
                    }
                    state.rotate_unchecked(kind, qubit, angle);
                }
                PlanOp::Entangle { kind, control, target } => {
                    state.controlled_unchecked(kind, control, target)
                }
            }
        }
        Ok(())
    }
}

/// Trainable values of one circuit: input scaling, variational angles and output scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterStore {
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    pub w: Vec<f64>,
}

impl ParameterStore {
    /// λ = 1, w = 1, θ ~ N(0, `theta_std`).
    pub fn init<R: Rng + ?Sized>(plan: &CircuitPlan, n_w: usize, theta_std: f64, rng: &mut R) -> Result<Self> {
        let normal = Normal::new(0.0, theta_std)
            .map_err(|e| Error::config(format!("theta init std {theta_std}: {e}")))?;
        Ok(ParameterStore {
            lambda: vec![1.0; plan.n_lambda()],
            theta: (0..plan.n_theta()).map(|_| normal.sample(rng)).collect(),
            w: vec![1.0; n_w],
        })
    }

    pub fn zeros(plan: &CircuitPlan, n_w: usize) -> Self {
        ParameterStore {
            lambda: vec![0.0; plan.n_lambda()],
            theta: vec![0.0; plan.n_theta()],
            w: vec![0.0; n_w],
        }
    }

    pub fn n_trainable(&self) -> usize {
        self.lambda.len() + self.theta.len() + self.w.len()
    }
}

/// Trainable parameter totals of a quantum actor and critic built from these configs.
pub fn count_parameters(actor: &VqcConfig, critic: &VqcConfig) -> Result<usize> {
    actor.validate()?;
    critic.validate()?;
    let actor_n = 2 * actor.n_qubits() * actor.n_layers + actor_weight_count(actor.n_actions);
    let critic_n = 2 * critic.n_qubits() * critic.n_layers
        + critic_weight_count(critic.readout, critic.n_qubits());
    Ok(actor_n + critic_n)
}

/// Plan plus parameters, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitCheckpoint {
    pub plan: CircuitPlan,
    pub params: ParameterStore,
}

impl CircuitCheckpoint {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::ZProduct;
    use std::f64::consts::FRAC_PI_2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(n_features: usize, stack: usize, layers: usize) -> VqcConfig {
        VqcConfig {
            n_features,
            stack_factor: stack,
            n_layers: layers,
            embedding: EmbeddingMode::NormIdentity,
            entangler: Entangler::CnotChain,
            readout: ReadoutId::M1,
            n_actions: 1,
        }
    }

    #[test]
    fn normalize_pendulum_examples() {
        let b = [(-1.0, 1.0), (-1.0, 1.0), (-8.0, 8.0)];
        assert_eq!(normalize_features(&[0.0, 0.0, 0.0], &b).unwrap(), vec![0.0, 0.0, 0.0]);
        let v = normalize_features(&[1.0, 0.0, 8.0], &b).unwrap();
        assert_eq!(v, vec![FRAC_PI_2, 0.0, FRAC_PI_2]);
        let v = normalize_features(&[-1.0, 0.5, -4.0], &b).unwrap();
        let want = [-FRAC_PI_2, PI / 4.0, -PI / 4.0];
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_clips_and_rejects() {
        let b = [(-1.0, 1.0)];
        assert_eq!(normalize_features(&[5.0], &b).unwrap(), vec![FRAC_PI_2]);
        assert!(matches!(normalize_features(&[f64::NAN], &b), Err(Error::Numeric(_))));
        assert!(matches!(normalize_features(&[0.0], &[(1.0, 1.0)]), Err(Error::Config(_))));
        assert!(matches!(normalize_features(&[0.0, 1.0], &b), Err(Error::Config(_))));
    }

    #[test]
    fn embed_angle_examples() {
        assert_eq!(embed_angle(FRAC_PI_2, 1.0, EmbeddingMode::NormIdentity), FRAC_PI_2);
        assert!((embed_angle(1.0, 2.0, EmbeddingMode::RawArctan) - 1.10714871779).abs() < 1e-11);
        assert_eq!(embed_angle(0.9, 0.0, EmbeddingMode::NormIdentity), 0.0);
        assert_eq!(embed_angle(0.9, 0.0, EmbeddingMode::NormArctan), 0.0);
        assert_eq!(embed_angle(0.0, 3.0, EmbeddingMode::NormSigmoid), 0.5);
    }

    #[test]
    fn embed_derivative_matches_finite_difference() {
        let h = 1e-6;
        for mode in EmbeddingMode::ALL {
            for (x, l) in [(0.3, 1.2), (-1.4, 0.7), (2.0, -0.5)] {
                let fd = (embed_angle(x, l + h, mode) - embed_angle(x, l - h, mode)) / (2.0 * h);
                assert!((fd - embed_angle_dlambda(x, l, mode)).abs() < 1e-8, "{mode:?}");
            }
        }
    }

    #[test]
    fn plan_counts_and_blocks() {
        let plan = CircuitPlan::build(&cfg(3, 1, 1)).unwrap();
        assert_eq!(plan.n_qubits(), 3);
        assert_eq!(plan.ops().len(), 11);
        let count = |b| plan.ops().iter().filter(|op| op.block() == b).count();
        assert_eq!(count(Block::Encoding), 6);
        assert_eq!(count(Block::Variational), 3);
        assert_eq!(count(Block::Entangling), 2);

        let plan = CircuitPlan::build(&cfg(3, 1, 4)).unwrap();
        assert_eq!(plan.ops().len(), 4 * (2 * 3 + 3 + 2));
        assert_eq!(plan.n_lambda(), 12);
        assert_eq!(plan.n_theta(), 12);
        // encoding, variational, entangling in every layer
        let per_layer = 11;
        for layer in plan.ops().chunks(per_layer) {
            let blocks: Vec<_> = layer.iter().map(PlanOp::block).collect();
            let mut sorted = blocks.clone();
            sorted.sort_by_key(|b| *b as u8);
            assert_eq!(blocks, sorted);
        }
    }

    #[test]
    fn stacked_plan_maps_features_modulo() {
        let plan = CircuitPlan::build(&cfg(3, 2, 1)).unwrap();
        assert_eq!(plan.n_qubits(), 6);
        let features: Vec<usize> = plan
            .ops()
            .iter()
            .filter_map(|op| match op {
                PlanOp::Rotation { kind: RotationKind::Ry, binding: AngleBinding::Encoding { feature, .. }, .. } => {
                    Some(*feature)
                }
                _ => None,
            })
            .collect();
        assert_eq!(features, vec![0, 1, 2, 0, 1, 2]);
        assert_eq!(CircuitPlan::build(&cfg(3, 3, 1)).unwrap().n_qubits(), 9);
    }

    #[test]
    fn plan_rejects_inconsistent_config() {
        assert!(CircuitPlan::build(&cfg(0, 1, 1)).is_err());
        assert!(CircuitPlan::build(&cfg(3, 1, 0)).is_err());
        assert!(CircuitPlan::build(&cfg(5, 3, 1)).is_err());
    }

    #[test]
    fn zero_parameters_leave_ground_state() {
        let plan = CircuitPlan::build(&cfg(3, 2, 3)).unwrap();
        let params = ParameterStore::zeros(&plan, 0);
        let state = plan.forward(&params, &[0.4, -1.1, 0.9]).unwrap();
        for q in 0..6 {
            assert_eq!(state.expectation(&ZProduct::single(q)).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_qubit_forward_is_cosine() {
        let plan = CircuitPlan::build(&cfg(1, 1, 1)).unwrap();
        let params = ParameterStore { lambda: vec![1.0], theta: vec![0.0], w: vec![] };
        let state = plan.forward(&params, &[0.7]).unwrap();
        let z = state.expectation(&ZProduct::single(0)).unwrap();
        assert!((z - 0.7f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn forward_rejects_wrong_observation_length() {
        let plan = CircuitPlan::build(&cfg(3, 1, 1)).unwrap();
        let params = ParameterStore::zeros(&plan, 0);
        assert!(matches!(plan.forward(&params, &[0.0, 0.0]), Err(Error::Config(_))));
    }

    #[test]
    fn stacked_copies_agree_before_entangling() {
        // first layer without its entangling block
        let config = cfg(3, 2, 1);
        let full = CircuitPlan::build(&config).unwrap();
        let ops: Vec<PlanOp> =
            full.ops().iter().copied().filter(|op| op.block() != Block::Entangling).collect();
        let plan = CircuitPlan::custom(6, 3, EmbeddingMode::NormIdentity, ops).unwrap();
        let params = ParameterStore::zeros(&plan, 0);
        let params = ParameterStore { lambda: vec![1.3; params.lambda.len()], ..params };
        let state = plan.forward(&params, &[0.2, -0.8, 1.4]).unwrap();
        for q in 0..3 {
            let a = state.expectation(&ZProduct::single(q)).unwrap();
            let b = state.expectation(&ZProduct::single(q + 3)).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn feature_relabeling_is_a_symmetry() {
        let base = CircuitPlan::build(&cfg(3, 1, 2)).unwrap();
        let perm = [2usize, 0, 1];
        let relabeled: Vec<PlanOp> = base
            .ops()
            .iter()
            .map(|op| match *op {
                PlanOp::Rotation { kind, qubit, binding: AngleBinding::Encoding { feature, lambda_slot, layer } } => {
                    PlanOp::Rotation {
                        kind,
                        qubit,
                        binding: AngleBinding::Encoding { feature: perm[feature], lambda_slot, layer },
                    }
                }
                other => other,
            })
            .collect();
        let permuted = CircuitPlan::custom(3, 3, EmbeddingMode::NormIdentity, relabeled).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = ParameterStore::init(&base, 0, 0.8, &mut rng).unwrap();
        let s = [0.3, -0.9, 1.2];
        let mut s_perm = [0.0; 3];
        for (j, &p) in perm.iter().enumerate() {
            s_perm[p] = s[j];
        }
        let a = base.forward(&params, &s).unwrap();
        let b = permuted.forward(&params, &s_perm).unwrap();
        for obs in [ZProduct::single(0), ZProduct::single(2), ZProduct::all(3)] {
            assert!((a.expectation(&obs).unwrap() - b.expectation(&obs).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn parameter_counts_match_published_totals() {
        let actor = cfg(6, 1, 7);
        let critic = actor.clone();
        assert_eq!(count_parameters(&actor, &critic).unwrap(), 176);
        let actor2 = VqcConfig { n_actions: 2, ..actor.clone() };
        assert_eq!(count_parameters(&actor2, &critic).unwrap(), 178);
        let small = cfg(3, 1, 5);
        assert_eq!(count_parameters(&small, &small).unwrap(), 65);
    }

    #[test]
    fn init_uses_unit_scalings() {
        let plan = CircuitPlan::build(&cfg(3, 1, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = ParameterStore::init(&plan, 4, 0.1, &mut rng).unwrap();
        assert!(p.lambda.iter().all(|&l| l == 1.0));
        assert!(p.w.iter().all(|&w| w == 1.0));
        assert_eq!(p.n_trainable(), 6 + 6 + 4);
        assert!(p.theta.iter().all(|t| t.abs() < 0.6));
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let plan = CircuitPlan::build(&cfg(3, 2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut params = ParameterStore::init(&plan, 6, 0.1, &mut rng).unwrap();
        params.w[2] = 0.1 + 0.2;
        params.lambda[0] = 1.0 / 3.0;
        let ck = CircuitCheckpoint { plan, params };
        let back = CircuitCheckpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back, ck);
    }
}
