//! Hybrid quantum-classical actor-critic agents for continuous control.
//!
//! Variational circuits run on an exact statevector simulator, are
//! differentiated with the adjoint method and trained with PPO.

pub mod diff;
pub mod envs;
pub mod error;
pub mod harness;
pub mod ppo;
pub mod qpolicy;
pub mod qsim;
pub mod vqc;

pub use error::{Error, Result};
