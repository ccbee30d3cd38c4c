//! Per-episode domain randomization. All randomized parameters are
//! sampled uniformly within their configured ranges; perturbation
//! magnitudes additionally scale with the force-curriculum level.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::quat::Vec3;
use super::robot::SimConfig;

/// Ranges for the randomized dynamics, perturbations and sensor noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomizationConfig {
    pub dynamics_enabled: bool,
    pub perturbations_enabled: bool,
    pub sensor_noise_enabled: bool,

    pub trunk_mass_delta: f64,    // +/- kg
    pub com_displacement: f64,    // +/- m per axis
    pub friction_range: [f64; 2],

    pub force_xy: f64,            // +/- N
    pub force_z: f64,             // +/- N
    pub force_noise: f64,         // +/- N per policy step

    pub command_range: f64,       // +/- m/s and rad/s

    pub noise_ang_vel: f64,       // +/- rad/s
    pub noise_gravity: f64,       // +/-
    pub noise_joint_pos: f64,     // +/- rad
    pub noise_joint_vel: f64,     // +/- rad/s
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        RandomizationConfig {
            dynamics_enabled: true,
            perturbations_enabled: true,
            sensor_noise_enabled: true,
            trunk_mass_delta: 1.0,
            com_displacement: 0.03,
            friction_range: [0.25, 1.5],
            force_xy: 60.0,
            force_z: 10.0,
            force_noise: 2.0,
            command_range: 1.0,
            noise_ang_vel: 0.05,
            noise_gravity: 0.05,
            noise_joint_pos: 0.01,
            noise_joint_vel: 0.075,
        }
    }
}

/// One scheduled disturbance: a force held for `duration` seconds and/or
/// an instantaneous trunk angular-velocity change at `start_time`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationEvent {
    pub start_time: f64,
    pub duration: f64,
    pub force: Vec3,
    pub wrench_delta_omega: Vec3,
}

impl PerturbationEvent {
    pub fn force_active_at(&self, t: f64) -> bool {
        t >= self.start_time && t < self.start_time + self.duration
    }
}

/// Everything an episode draws at reset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeParams {
    pub trunk_mass_delta: f64,
    pub com_displacement: Vec3,
    pub friction: f64,
    pub command: Vec3,
    pub events: Vec<PerturbationEvent>,
    pub command_resample: bool,
}

impl EpisodeParams {
    /// Fixed-dynamics parameters used by the evaluation protocols.
    pub fn nominal() -> Self {
        EpisodeParams {
            trunk_mass_delta: 0.0,
            com_displacement: [0.0; 3],
            friction: 1.0,
            command: [0.0; 3],
            events: Vec::new(),
            command_resample: false,
        }
    }

    /// Uniform draws from the configured ranges; perturbation magnitudes
    /// scale with `force_level` in [0, 1].
    pub fn sample(
        cfg: &SimConfig,
        rnd: &RandomizationConfig,
        force_level: f64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let u = |rng: &mut ChaCha8Rng, half: f64| {
            if half == 0.0 {
                0.0
            } else {
                rng.random_range(-half..=half)
            }
        };
        let (mass, com, friction) = if rnd.dynamics_enabled {
            (
                u(rng, rnd.trunk_mass_delta),
                [
                    u(rng, rnd.com_displacement),
                    u(rng, rnd.com_displacement),
                    u(rng, rnd.com_displacement),
                ],
                rng.random_range(rnd.friction_range[0]..=rnd.friction_range[1]),
            )
        } else {
            (0.0, [0.0; 3], 1.0)
        };
        let command = [
            u(rng, rnd.command_range),
            u(rng, rnd.command_range),
            u(rng, rnd.command_range),
        ];

        let mut events = Vec::new();
        if rnd.perturbations_enabled && force_level > 0.0 {
            let horizon = cfg.max_episode_steps as f64 * cfg.dt_policy();
            // One force event per episode at a uniformly random start.
            let start = rng.random_range(0.0..(horizon - cfg.force_event_duration).max(0.1));
            events.push(PerturbationEvent {
                start_time: start,
                duration: cfg.force_event_duration,
                force: [
                    force_level * u(rng, rnd.force_xy),
                    force_level * u(rng, rnd.force_xy),
                    force_level * u(rng, rnd.force_z),
                ],
                wrench_delta_omega: [0.0; 3],
            });
            // Wrench impulses on a fixed interval.
            let mut t = cfg.wrench_interval;
            while t < horizon {
                let dir = random_unit(rng);
                events.push(PerturbationEvent {
                    start_time: t,
                    duration: 0.0,
                    force: [0.0; 3],
                    wrench_delta_omega: [
                        force_level * cfg.wrench_magnitude * dir[0],
                        force_level * cfg.wrench_magnitude * dir[1],
                        force_level * cfg.wrench_magnitude * dir[2],
                    ],
                });
                t += cfg.wrench_interval;
            }
        }

        EpisodeParams {
            trunk_mass_delta: mass,
            com_displacement: com,
            friction,
            command,
            events,
            command_resample: true,
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v: [f64; 3] = [
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}
