use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ActorCritic, GaussianPolicy, GroupInfo, GroupRole, PolicyPartials};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    LeakyRelu,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    0.01 * x
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative in terms of the pre-activation `x` and output `y`.
    fn slope(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.01
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpConfig {
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default)]
    pub init_log_std: f64,
}

fn default_hidden() -> Vec<usize> {
    vec![64, 64]
}

fn default_activation() -> Activation {
    Activation::Relu
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig { hidden: default_hidden(), activation: default_activation(), init_log_std: 0.0 }
    }
}

/// Dense layer `y = W x + b`, `W` stored row-major as `out × in`.
#[derive(Debug, Clone, PartialEq)]
struct Dense {
    n_in: usize,
    n_out: usize,
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    fn init<R: Rng + ?Sized>(n_in: usize, n_out: usize, gain: f64, rng: &mut R) -> Self {
        let bound = gain / (n_in as f64).sqrt();
        Dense {
            n_in,
            n_out,
            weight: (0..n_in * n_out).map(|_| rng.random_range(-bound..bound)).collect(),
            bias: vec![0.0; n_out],
        }
    }

    fn n_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.weight[o * self.n_in..(o + 1) * self.n_in];
            out.push(self.bias[o] + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>());
        }
    }
}

/// Stack of dense layers with a shared hidden activation and a linear output.
#[derive(Debug, Clone, PartialEq)]
struct Mlp {
    layers: Vec<Dense>,
    activation: Activation,
}

struct Trace {
    /// Input of each layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of each hidden layer.
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl Mlp {
    fn init<R: Rng + ?Sized>(sizes: &[usize], activation: Activation, out_gain: f64, rng: &mut R) -> Self {
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| Dense::init(w[0], w[1], if i == last { out_gain } else { 1.0 }, rng))
            .collect();
        Mlp { layers, activation }
    }

    fn n_params(&self) -> usize {
        self.layers.iter().map(Dense::n_params).sum()
    }

    fn forward(&self, x: &[f64]) -> Trace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.n_out);
            layer.forward(&h, &mut z);
            inputs.push(std::mem::take(&mut h));
            if i + 1 < self.layers.len() {
                h = z.iter().map(|&v| self.activation.apply(v)).collect();
                pre.push(z);
            } else {
                h = z;
            }
        }
        Trace { inputs, pre, output: h }
    }

    /// Backpropagates `d_out` and adds parameter gradients into `grad` (flat, layer by layer: W then b).
    fn backward(&self, trace: &Trace, d_out: &[f64], grad: &mut [f64]) {
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for l in &self.layers {
            offsets.push(off);
            off += l.n_params();
        }
        let mut delta = d_out.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace.inputs[i];
            let base = offsets[i];
            let (gw, gb) = grad[base..base + layer.n_params()].split_at_mut(layer.weight.len());
            for o in 0..layer.n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                for (g, x) in gw[o * layer.n_in..(o + 1) * layer.n_in].iter_mut().zip(input) {
                    *g += d * x;
                }
            }
            if i == 0 {
                break;
            }
            let mut next = vec![0.0; layer.n_in];
            for o in 0..layer.n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (n, w) in next.iter_mut().zip(&layer.weight[o * layer.n_in..(o + 1) * layer.n_in]) {
                    *n += d * w;
                }
            }
            let pre = &trace.pre[i - 1];
            for ((n, &z), &y) in next.iter_mut().zip(pre).zip(input) {
                *n *= self.activation.slope(z, y);
            }
            delta = next;
        }
    }

    fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weight.iter().chain(&l.bias).copied()).collect()
    }

    fn load(&mut self, flat: &[f64]) {
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weight.len();
            l.weight.copy_from_slice(&flat[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
    }
}

/// Parameter count of one dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayerShape {
    pub n_in: usize,
    pub n_out: usize,
    pub params: usize,
}

/// Classical actor-critic baseline: separate MLPs for the action means and the value,
/// plus a state-independent log standard deviation per action.
///
/// Parameters are kept flat (`actor` = actor MLP then log-σ, `critic` = critic MLP)
/// so the optimizer can treat them as two groups; the layer structs are views
/// rebuilt on every parameter write.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpActorCritic {
    obs_dim: usize,
    n_actions: usize,
    actor_net: Mlp,
    critic_net: Mlp,
    actor_flat: Vec<f64>,
    critic_flat: Vec<f64>,
}

impl MlpActorCritic {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, n_actions: usize, config: &MlpConfig, rng: &mut R) -> Result<Self> {
        if obs_dim == 0 || n_actions == 0 || config.hidden.contains(&0) {
            return Err(Error::config("MLP dimensions must be positive"));
        }
        let mut sizes = vec![obs_dim];
        sizes.extend(&config.hidden);
        let mut actor_sizes = sizes.clone();
        actor_sizes.push(n_actions);
        sizes.push(1);
        let actor_net = Mlp::init(&actor_sizes, config.activation, 0.01, rng);
        let critic_net = Mlp::init(&sizes, config.activation, 1.0, rng);
        let mut actor_flat = actor_net.flatten();
        actor_flat.extend(std::iter::repeat_n(config.init_log_std, n_actions));
        let critic_flat = critic_net.flatten();
        Ok(MlpActorCritic { obs_dim, n_actions, actor_net, critic_net, actor_flat, critic_flat })
    }

    fn log_std(&self) -> &[f64] {
        &self.actor_flat[self.actor_net.n_params()..]
    }

    /// Copies the flat parameter vectors back into the layer views.
    pub fn sync(&mut self) {
        let n = self.actor_net.n_params();
        self.actor_net.load(&self.actor_flat[..n]);
        self.critic_net.load(&self.critic_flat);
    }

    /// Sets every weight and bias (and log-σ) to zero.
    pub fn zero(&mut self) {
        self.actor_flat.fill(0.0);
        self.critic_flat.fill(0.0);
        self.sync();
    }

    pub fn actor_layers(&self) -> Vec<LayerShape> {
        shapes(&self.actor_net)
    }

    pub fn critic_layers(&self) -> Vec<LayerShape> {
        shapes(&self.critic_net)
    }

    fn check_obs(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.obs_dim {
            return Err(Error::config(format!("observation has {} features, MLP expects {}", s.len(), self.obs_dim)));
        }
        Ok(())
    }
}

fn shapes(net: &Mlp) -> Vec<LayerShape> {
    net.layers.iter().map(|l| LayerShape { n_in: l.n_in, n_out: l.n_out, params: l.n_params() }).collect()
}

impl ActorCritic for MlpActorCritic {
    fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn policy(&self, s: &[f64]) -> Result<GaussianPolicy> {
        self.check_obs(s)?;
        let mu = self.actor_net.forward(s).output;
        let sigma = self.log_std().iter().map(|l| l.exp()).collect();
        Ok(GaussianPolicy::new(mu, sigma))
    }

    fn value(&self, s: &[f64]) -> Result<f64> {
        self.check_obs(s)?;
        Ok(self.critic_net.forward(s).output[0])
    }

    fn groups(&self) -> Vec<GroupInfo> {
        vec![
            GroupInfo { name: "actor".into(), role: GroupRole::Classical, len: self.actor_flat.len() },
            GroupInfo { name: "critic".into(), role: GroupRole::Classical, len: self.critic_flat.len() },
        ]
    }

    fn params(&self) -> Vec<&[f64]> {
        vec![&self.actor_flat, &self.critic_flat]
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.actor_flat, &mut self.critic_flat]
    }

    fn after_update(&mut self) {
        self.sync();
    }

    fn actor_backward(
        &self,
        s: &[f64],
        head: &mut dyn FnMut(&GaussianPolicy) -> PolicyPartials,
        grads: &mut [Vec<f64>],
    ) -> Result<GaussianPolicy> {
        self.check_obs(s)?;
        let trace = self.actor_net.forward(s);
        let sigma: Vec<f64> = self.log_std().iter().map(|l| l.exp()).collect();
        let policy = GaussianPolicy::new(trace.output.clone(), sigma);
        let partials = head(&policy);
        let n_net = self.actor_net.n_params();
        let (net_grad, log_std_grad) = grads[0].split_at_mut(n_net);
        self.actor_net.backward(&trace, &partials.d_mu, net_grad);
        for ((g, d), sg) in log_std_grad.iter_mut().zip(&partials.d_sigma).zip(&policy.sigma) {
            *g += d * sg;
        }
        Ok(policy)
    }

    fn critic_backward(
        &self,
        s: &[f64],
        head: &mut dyn FnMut(f64) -> f64,
        grads: &mut [Vec<f64>],
    ) -> Result<f64> {
        self.check_obs(s)?;
        let trace = self.critic_net.forward(s);
        let value = trace.output[0];
        let d = head(value);
        self.critic_net.backward(&trace, &[d], &mut grads[1]);
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net(seed: u64) -> MlpActorCritic {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MlpActorCritic::new(3, 1, &MlpConfig::default(), &mut rng).unwrap()
    }

    #[test]
    fn parameter_counts() {
        let n = net(0);
        // (3+1)·64 + (64+1)·64 + (64+1)·1 = 4481, plus one log-σ
        assert_eq!(n.groups()[0].len, 4482);
        assert_eq!(n.groups()[1].len, 4481);
        let layers: Vec<usize> = n.actor_layers().iter().map(|l| l.params).collect();
        assert_eq!(layers, vec![256, 4160, 65]);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut n = net(1);
        n.zero();
        for s in [[0.0, 0.0, 0.0], [1.0, -3.0, 7.0]] {
            assert_eq!(n.policy(&s).unwrap().mu, vec![0.0]);
            assert_eq!(n.policy(&s).unwrap().sigma, vec![1.0]);
            assert_eq!(n.value(&s).unwrap(), 0.0);
        }
    }

    #[test]
    fn relu_blocks_negative_preactivations() {
        let mlp = Mlp {
            layers: vec![
                Dense { n_in: 1, n_out: 2, weight: vec![1.0, -1.0], bias: vec![0.0, 0.0] },
                Dense { n_in: 2, n_out: 1, weight: vec![1.0, 1.0], bias: vec![0.0] },
            ],
            activation: Activation::Relu,
        };
        let trace = mlp.forward(&[2.0]);
        assert_eq!(trace.output, vec![2.0]);
        let mut grad = vec![0.0; mlp.n_params()];
        mlp.backward(&trace, &[1.0], &mut grad);
        // first-layer weights [w0, w1], biases [b0, b1], second-layer [v0, v1], c
        assert_eq!(grad, vec![2.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        for activation in [Activation::Relu, Activation::Tanh, Activation::LeakyRelu] {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let config = MlpConfig { hidden: vec![8, 5], activation, init_log_std: -0.3 };
            let mut n = MlpActorCritic::new(3, 2, &config, &mut rng).unwrap();
            // larger output layer so the mean path is not tiny
            for v in n.actor_flat.iter_mut() {
                *v *= 3.0;
            }
            n.sync();
            let s = [0.5, -1.2, 2.0];
            let action = [0.4, -0.7];
            let loss = |m: &MlpActorCritic| {
                -m.policy(&s).unwrap().log_prob(&action) + 0.5 * (m.value(&s).unwrap() - 2.0).powi(2)
            };
            let mut grads = n.zero_grads();
            n.actor_backward(
                &s,
                &mut |p| {
                    let (dm, ds) = p.log_prob_partials(&action);
                    PolicyPartials { d_mu: dm.iter().map(|x| -x).collect(), d_sigma: ds.iter().map(|x| -x).collect() }
                },
                &mut grads,
            )
            .unwrap();
            n.critic_backward(&s, &mut |v| v - 2.0, &mut grads).unwrap();
            let h = 1e-6;
            for g in 0..2 {
                for i in 0..grads[g].len() {
                    let orig = n.params()[g][i];
                    n.params_mut()[g][i] = orig + h;
                    n.sync();
                    let up = loss(&n);
                    n.params_mut()[g][i] = orig - h;
                    n.sync();
                    let dn = loss(&n);
                    n.params_mut()[g][i] = orig;
                    n.sync();
                    let fd = (up - dn) / (2.0 * h);
                    let an = grads[g][i];
                    assert!((fd - an).abs() <= 1e-5 * fd.abs().max(an.abs()).max(1e-3), "{activation:?} g{g}[{i}]: {fd} vs {an}");
                }
            }
        }
    }
}
