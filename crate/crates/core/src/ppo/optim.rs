use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

#[derive(Debug, Clone)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

/// One optimizer state per parameter group; each group steps with its own rate.
#[derive(Debug, Clone)]
pub struct GroupOptimizer {
    kind: OptimizerKind,
    state: Vec<Moments>,
}

impl GroupOptimizer {
    pub fn new(kind: OptimizerKind, group_lens: &[usize]) -> Self {
        let state = group_lens
            .iter()
            .map(|&n| Moments { m: vec![0.0; n], v: vec![0.0; n], t: 0 })
            .collect();
        GroupOptimizer { kind, state }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    /// Descends `params` of group `g` along `grad`. A zero rate leaves the group untouched.
    pub fn step(&mut self, g: usize, params: &mut [f64], grad: &[f64], lr: f64) {
        assert_eq!(params.len(), grad.len());
        if lr == 0.0 {
            return;
        }
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, d) in params.iter_mut().zip(grad) {
                    *p -= lr * d;
                }
            }
            OptimizerKind::Adam => {
                let st = &mut self.state[g];
                st.t += 1;
                let bc1 = 1.0 - BETA1.powi(st.t);
                let bc2 = 1.0 - BETA2.powi(st.t);
                for i in 0..params.len() {
                    st.m[i] = BETA1 * st.m[i] + (1.0 - BETA1) * grad[i];
                    st.v[i] = BETA2 * st.v[i] + (1.0 - BETA2) * grad[i] * grad[i];
                    let m_hat = st.m[i] / bc1;
                    let v_hat = st.v[i] / bc2;
                    params[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
                }
            }
        }
    }
}
