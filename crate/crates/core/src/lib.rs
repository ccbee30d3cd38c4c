//! Perturbation-adaptive quadruped locomotion training stack.
//!
//! The crate implements a three-phase pipeline on top of a simplified
//! quadruped simulator:
//!
//! 1. a privileged teacher policy (three feature encoders + base policy)
//!    trained with PPO under force and terrain curricula,
//! 2. a deployable student policy (proprioceptive history encoder + base
//!    policy) distilled from the teacher by action and latent imitation,
//! 3. a small residual policy trained with PPO on top of the frozen
//!    student to recover robustness lost in distillation.
//!
//! Physics, observations, rewards and evaluation run in `f64`. Network
//! parameters and the optimization loops are generic over the scalar
//! type: gradient-check tests instantiate `f64`, the training binaries
//! default to `f32` (see the `train-f64` feature).

pub mod curriculum;
pub mod error;
pub mod eval;
pub mod nn;
pub mod obs;
pub mod orchestrator;
pub mod policy;
pub mod ppo;
pub mod reward;
pub mod sim;
pub mod train;

pub use error::{Error, Result};

/// Scalar type used by the training loops.
#[cfg(not(feature = "train-f64"))]
pub type TrainReal = f32;
#[cfg(feature = "train-f64")]
pub type TrainReal = f64;
