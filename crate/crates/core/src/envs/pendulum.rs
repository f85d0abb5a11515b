use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Env, EnvSpec, Step};
use crate::error::{Error, Result};

const GRAVITY: f64 = 10.0;
const MASS: f64 = 1.0;
const LENGTH: f64 = 1.0;
const DT: f64 = 0.05;
const MAX_SPEED: f64 = 8.0;
const MAX_TORQUE: f64 = 2.0;
const EPISODE_STEPS: usize = 200;

/// Angle 0 is upright; angular velocity is clamped to `[-8, 8]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub angle: f64,
    pub velocity: f64,
}

impl PendulumState {
    pub fn observation(&self) -> Vec<f64> {
        vec![self.angle.cos(), self.angle.sin(), self.velocity]
    }

    /// Mechanical energy per unit inertia of the undamped, unforced dynamics.
    pub fn energy(&self) -> f64 {
        0.5 * self.velocity * self.velocity + 3.0 * GRAVITY / (2.0 * LENGTH) * self.angle.cos()
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// Torque-limited pendulum swing-up task with a 200-step time limit.
#[derive(Debug, Clone)]
pub struct Pendulum {
    spec: EnvSpec,
    state: PendulumState,
    steps: usize,
    rng: ChaCha8Rng,
}

impl Pendulum {
    pub fn new(seed: u64) -> Self {
        Pendulum {
            spec: EnvSpec {
                name: "pendulum".into(),
                obs_bounds: vec![(-1.0, 1.0), (-1.0, 1.0), (-MAX_SPEED, MAX_SPEED)],
                action_bounds: vec![(-MAX_TORQUE, MAX_TORQUE)],
                max_episode_steps: EPISODE_STEPS,
            },
            state: PendulumState { angle: PI, velocity: 0.0 },
            steps: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn state(&self) -> PendulumState {
        self.state
    }

    /// Places the pendulum in `state` and restarts the episode clock.
    pub fn set_state(&mut self, state: PendulumState) {
        self.state = state;
        self.steps = 0;
    }

    /// One integration step; returns the reward for the pre-step state.
    pub fn dynamics(state: PendulumState, torque: f64) -> (PendulumState, f64) {
        let u = torque.clamp(-MAX_TORQUE, MAX_TORQUE);
        let th = state.angle;
        let w = state.velocity;
        let cost = wrap_angle(th).powi(2) + 0.1 * w * w + 0.001 * u * u;
        let new_w = (w + (3.0 * GRAVITY / (2.0 * LENGTH) * th.sin() + 3.0 / (MASS * LENGTH * LENGTH) * u) * DT)
            .clamp(-MAX_SPEED, MAX_SPEED);
        let new_th = th + new_w * DT;
        (PendulumState { angle: new_th, velocity: new_w }, -cost)
    }
}

impl Env for Pendulum {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: Option<u64>) -> Vec<f64> {
        if let Some(seed) = seed {
            self.rng = ChaCha8Rng::seed_from_u64(seed);
        }
        self.state = PendulumState {
            angle: self.rng.random_range(-PI..=PI),
            velocity: self.rng.random_range(-1.0..=1.0),
        };
        self.steps = 0;
        self.state.observation()
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        let &[torque] = action else {
            return Err(Error::Env { step: self.steps, message: format!("expected 1 action, got {}", action.len()) });
        };
        if !torque.is_finite() {
            return Err(Error::Env { step: self.steps, message: format!("torque {torque}") });
        }
        let (next, reward) = Self::dynamics(self.state, torque);
        self.state = next;
        self.steps += 1;
        Ok(Step {
            observation: next.observation(),
            reward,
            terminated: false,
            truncated: self.steps >= EPISODE_STEPS,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_is_seeded_and_bounded() {
        let mut a = Pendulum::new(0);
        let mut b = Pendulum::new(99);
        assert_eq!(a.reset(Some(5)), b.reset(Some(5)));
        for _ in 0..100 {
            let obs = a.reset(None);
            assert!(obs[0].abs() <= 1.0 && obs[1].abs() <= 1.0);
            assert!(obs[2].abs() <= 1.0);
            assert!((obs[0].powi(2) + obs[1].powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reset_angle_mean_is_centered() {
        let mut env = Pendulum::new(17);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| {
                env.reset(None);
                env.state().angle
            })
            .sum::<f64>()
            / n as f64;
        // uniform on [-π, π]: σ = 2π/√12
        let se = 2.0 * PI / 12f64.sqrt() / (n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn hanging_at_rest_costs_pi_squared() {
        let (_, r) = Pendulum::dynamics(PendulumState { angle: PI, velocity: 0.0 }, 0.0);
        assert!((r + PI * PI).abs() < 1e-12);
        assert!((r + 9.8696).abs() < 1e-4);
    }

    #[test]
    fn upright_at_rest_is_equilibrium() {
        let s = PendulumState { angle: 0.0, velocity: 0.0 };
        let (next, r) = Pendulum::dynamics(s, 0.0);
        assert_eq!(r, 0.0);
        assert_eq!(next, s);
    }

    #[test]
    fn torque_is_clipped() {
        let mut a = Pendulum::new(0);
        let mut b = Pendulum::new(0);
        a.reset(Some(3));
        b.reset(Some(3));
        for _ in 0..50 {
            assert_eq!(a.step(&[3.0]).unwrap(), b.step(&[2.0]).unwrap());
        }
    }

    #[test]
    fn episode_truncates_at_200() {
        let mut env = Pendulum::new(1);
        env.reset(None);
        for i in 1..=200 {
            let step = env.step(&[0.5]).unwrap();
            assert!(!step.terminated);
            assert_eq!(step.truncated, i == 200);
            assert!(step.observation[2].abs() <= 8.0);
            assert!(step.reward <= 0.0);
            assert!(step.reward >= -(PI * PI + 0.1 * 64.0 + 0.001 * 4.0));
        }
    }

    #[test]
    fn energy_drift_is_small_near_bottom() {
        let mut env = Pendulum::new(0);
        env.set_state(PendulumState { angle: PI - 0.1, velocity: 0.0 });
        let mut e = env.state().energy();
        for _ in 0..200 {
            env.step(&[0.0]).unwrap();
            let e_next = env.state().energy();
            assert!(((e_next - e) / e).abs() < 0.02);
            e = e_next;
        }
    }

    #[test]
    fn bad_actions_are_env_faults() {
        let mut env = Pendulum::new(0);
        env.reset(None);
        assert!(matches!(env.step(&[f64::NAN]), Err(Error::Env { step: 0, .. })));
        assert!(matches!(env.step(&[0.0, 1.0]), Err(Error::Env { .. })));
    }

    #[test]
    fn wrap_angle_range() {
        for x in [-10.0, -PI, 0.0, 3.0, PI, 7.5, 100.0] {
            let w = wrap_angle(x);
            assert!((-PI..PI).contains(&w));
            assert!(((x - w) / (2.0 * PI)).fract().abs() < 1e-9 || ((x - w) / (2.0 * PI)).fract().abs() > 1.0 - 1e-9);
        }
    }
}
