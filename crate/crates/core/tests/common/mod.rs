//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrl::diff::random_assignment;
use qrl::qpolicy::{build_readout, ReadoutId};
use qrl::qsim::{Gate, RotationKind, StateVector, TwoQubitKind, ZProduct};
use qrl::vqc::{CircuitPlan, EmbeddingMode, Entangler, ParameterStore, VqcConfig};

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim).map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

/// Tensor product of per-qubit 2×2 factors, qubit 0 leftmost.
pub fn tensor(factors: &[Matrix]) -> Matrix {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

pub fn single_qubit_matrix(kind: RotationKind, angle: f64) -> Matrix {
    let (cs, sn) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    match kind {
        RotationKind::Ry => vec![vec![c(cs, 0.0), c(-sn, 0.0)], vec![c(sn, 0.0), c(cs, 0.0)]],
        RotationKind::Rz => vec![vec![c(cs, -sn), c(0.0, 0.0)], vec![c(0.0, 0.0), c(cs, sn)]],
    }
}

/// Full `2^n × 2^n` unitary of `gate`, built from Kronecker products.
pub fn gate_matrix(n: usize, gate: &Gate) -> Matrix {
    let id = identity(2);
    match *gate {
        Gate::Rotation { kind, qubit, angle } => {
            let f: Vec<Matrix> = (0..n).map(|q| if q == qubit { single_qubit_matrix(kind, angle) } else { id.clone() }).collect();
            tensor(&f)
        }
        Gate::Controlled { kind, control, target } => {
            let p0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]];
            let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
            let op = match kind {
                TwoQubitKind::Cnot => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
                TwoQubitKind::Cz => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
            };
            let idle: Vec<Matrix> = (0..n).map(|q| if q == control { p0.clone() } else { id.clone() }).collect();
            let active: Vec<Matrix> = (0..n)
                .map(|q| if q == control { p1.clone() } else if q == target { op.clone() } else { id.clone() })
                .collect();
            add(&tensor(&idle), &tensor(&active))
        }
    }
}

pub fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn z_product_matrix(n: usize, obs: &ZProduct) -> Matrix {
    let z = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]];
    let f: Vec<Matrix> = (0..n).map(|q| if obs.qubits().contains(&q) { z.clone() } else { identity(2) }).collect();
    tensor(&f)
}

pub fn dense_expectation(n: usize, psi: &[Complex64], obs: &ZProduct) -> f64 {
    let m = z_product_matrix(n, obs);
    let mpsi = mat_vec(&m, psi);
    psi.iter().zip(&mpsi).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
}

pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> Gate {
    let kinds = if n >= 2 { 4 } else { 2 };
    match rng.random_range(0..kinds) {
        0 => Gate::Rotation { kind: RotationKind::Ry, qubit: rng.random_range(0..n), angle: rng.random_range(-7.0..7.0) },
        1 => Gate::Rotation { kind: RotationKind::Rz, qubit: rng.random_range(0..n), angle: rng.random_range(-7.0..7.0) },
        k => {
            let control = rng.random_range(0..n);
            let mut target = rng.random_range(0..n - 1);
            if target >= control {
                target += 1;
            }
            let kind = if k == 2 { TwoQubitKind::Cnot } else { TwoQubitKind::Cz };
            Gate::Controlled { kind, control, target }
        }
    }
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

pub fn random_z_product<R: Rng>(rng: &mut R, n: usize) -> ZProduct {
    let mut qubits: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    if qubits.is_empty() {
        qubits.push(rng.random_range(0..n));
    }
    ZProduct::new(qubits).unwrap()
}

/// Result of comparing a kernel run against the dense oracle.
pub struct DenseCheck {
    pub max_amp_err: f64,
    pub max_exp_err: f64,
}

/// Runs `len` random gates from a random start state through both the in-place
/// kernels and explicit unitaries.
pub fn dense_equivalence(seed: u64, n: usize, len: usize) -> DenseCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = random_state(&mut rng, n);
    let mut dense: Vec<Complex64> = state.amplitudes().to_vec();
    for _ in 0..len {
        let g = random_gate(&mut rng, n);
        g.apply(&mut state).unwrap();
        dense = mat_vec(&gate_matrix(n, &g), &dense);
    }
    let max_amp_err = state.amplitudes().iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let mut max_exp_err: f64 = 0.0;
    for _ in 0..3 {
        let obs = random_z_product(&mut rng, n);
        let e = state.expectation(&obs).unwrap();
        max_exp_err = max_exp_err.max((e - dense_expectation(n, &dense, &obs)).abs());
    }
    DenseCheck { max_amp_err, max_exp_err }
}

pub const EMBEDDINGS: [EmbeddingMode; 5] = EmbeddingMode::ALL;

/// Random circuit config with `3..=6` qubits and `1..=9` layers.
pub fn random_config<R: Rng>(rng: &mut R, readout: ReadoutId) -> VqcConfig {
    let n_features = rng.random_range(3..=6);
    VqcConfig {
        n_features,
        stack_factor: 1,
        n_layers: rng.random_range(1..=9),
        embedding: EMBEDDINGS[rng.random_range(0..EMBEDDINGS.len())],
        entangler: if rng.random_bool(0.5) { Entangler::CnotChain } else { Entangler::CzChain },
        readout,
        n_actions: rng.random_range(1..=2),
    }
}

/// Every observable the readout of `config` measures, actor first.
pub fn readout_observables(config: &VqcConfig) -> Vec<ZProduct> {
    let r = build_readout(config.readout, config.n_qubits(), config.n_actions).unwrap();
    r.mu.into_iter().chain(r.sigma).chain(r.critic).collect()
}

pub fn expectation(plan: &CircuitPlan, params: &ParameterStore, s: &[f64], obs: &ZProduct) -> f64 {
    plan.forward(params, s).unwrap().expectation(obs).unwrap()
}

/// Central difference with step `h` on one θ- or λ-slot.
pub fn finite_difference(plan: &CircuitPlan, params: &ParameterStore, s: &[f64], obs: &ZProduct, theta: bool, slot: usize, h: f64) -> f64 {
    let mut p = params.clone();
    let at = |p: &mut ParameterStore, v: f64| {
        if theta {
            p.theta[slot] = v;
        } else {
            p.lambda[slot] = v;
        }
    };
    let x = if theta { params.theta[slot] } else { params.lambda[slot] };
    at(&mut p, x + h);
    let plus = expectation(plan, &p, s, obs);
    at(&mut p, x - h);
    let minus = expectation(plan, &p, s, obs);
    (plus - minus) / (2.0 * h)
}

/// Worst disagreement of one random circuit between adjoint partials and
/// (shift rule, finite differences).
pub struct TriangleCheck {
    pub shift_err: f64,
    pub fd_err: f64,
    pub observables: usize,
}

pub fn gradient_triangle(seed: u64, readout: ReadoutId) -> TriangleCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = random_config(&mut rng, readout);
    let plan = CircuitPlan::build(&config).unwrap();
    let (params, s) = random_assignment(&plan, 0, &mut rng);
    let observables = readout_observables(&config);
    let records = qrl::diff::gradients(&plan, &params, &s, &observables).unwrap();
    let mut shift_err: f64 = 0.0;
    let mut fd_err: f64 = 0.0;
    for (obs, rec) in observables.iter().zip(&records) {
        let per_gate = qrl::diff::gate_gradients(&plan, &params, &s, obs).unwrap();
        for (i, op) in plan.ops().iter().enumerate() {
            if let qrl::vqc::PlanOp::Rotation { .. } = op {
                let shift = qrl::diff::parameter_shift(&plan, &params, &s, obs, i).unwrap();
                shift_err = shift_err.max((shift - per_gate[i]).abs());
            }
        }
        for (k, d) in rec.d_theta.iter().enumerate() {
            fd_err = fd_err.max((d - finite_difference(&plan, &params, &s, obs, true, k, 1e-5)).abs());
        }
        for (k, d) in rec.d_lambda.iter().enumerate() {
            fd_err = fd_err.max((d - finite_difference(&plan, &params, &s, obs, false, k, 1e-5)).abs());
        }
    }
    TriangleCheck { shift_err, fd_err, observables: observables.len() }
}
