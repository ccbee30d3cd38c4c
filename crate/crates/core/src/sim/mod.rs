//! Simplified quadruped environment: heightfield terrains, trunk +
//! kinematic-leg dynamics with spring-damper contact, PD actuation,
//! external perturbations and per-episode domain randomization.

mod env;
mod params;
pub mod quat;
mod robot;
mod terrain;

pub use env::{Environment, StepResult, StepSnapshot};
pub use params::{EpisodeParams, PerturbationEvent, RandomizationConfig};
pub use robot::{
    fk_foot_positions, foot_jacobian_trunk, foot_position_trunk, knee_position_trunk, RobotState,
    SimConfig, LEG_X_SIGN, LEG_Y_SIGN, NUM_JOINTS, NUM_LEGS,
};
pub use terrain::{HeightField, TerrainKind};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic stream seeding from a list of parts (splitmix64 chain).
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &p in parts {
        let mut z = h ^ p.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

pub fn rng_from(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(parts))
}
