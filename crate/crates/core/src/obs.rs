//! Observation assembly: the four observation blocks and the 50-step
//! proprioceptive history, with fixed dimensions, scalings and
//! sensor-noise injection.
//!
//! Proprioceptive block layout (45):
//!   [0..3)   trunk angular velocity, body frame, scaled 0.25
//!   [3..6)   gravity unit vector, body frame
//!   [6..18)  joint positions
//!   [18..30) joint velocities, scaled 0.05
//!   [30..33) commands: vx* and vy* scaled 2.0, wz* scaled 0.25
//!   [33..45) previous action (raw network output)
//!
//! Privileged state layout (28):
//!   [0..3)   trunk linear velocity, body frame
//!   [3]      trunk mass delta
//!   [4..7)   COM displacement
//!   [7]      ground friction coefficient
//!   [8..20)  foot contact forces, body frame, 4 x 3
//!   [20..28) thigh/calf contact flags as 0/1

use rand::Rng;

use crate::sim::{quat, Environment, NUM_JOINTS, NUM_LEGS};

pub const PROPRIO_DIM: usize = 45;
pub const PRIV_STATE_DIM: usize = 28;
pub const FORCE_HIST_STEPS: usize = 10;
pub const FORCE_HIST_DIM: usize = 30;
pub const TERRAIN_SAMPLE_DIM: usize = 187;
pub const TERRAIN_GRID_X: usize = 17;
pub const TERRAIN_GRID_Y: usize = 11;
pub const HISTORY_STEPS: usize = 50;
pub const HISTORY_DIM: usize = HISTORY_STEPS * PROPRIO_DIM;
pub const ACTION_DIM: usize = 12;

pub const ANG_VEL_SCALE: f64 = 0.25;
pub const JOINT_VEL_SCALE: f64 = 0.05;
pub const LIN_CMD_SCALE: f64 = 2.0;
pub const ANG_CMD_SCALE: f64 = 0.25;

/// Spacing of the 17 x 11 height-sample grid under the trunk.
pub const TERRAIN_SAMPLE_SPACING: f64 = 0.1;

/// Last 10 policy-step external force vectors, oldest first, zero-filled
/// at episode start.
#[derive(Debug, Clone)]
pub struct ForceHistory {
    buf: [f64; FORCE_HIST_DIM],
}

impl Default for ForceHistory {
    fn default() -> Self {
        Self::new()
    }
}

impl ForceHistory {
    pub fn new() -> Self {
        ForceHistory {
            buf: [0.0; FORCE_HIST_DIM],
        }
    }

    /// Drops the oldest force vector and appends the newest.
    pub fn push(&mut self, force: &[f64; 3]) {
        self.buf.copy_within(3.., 0);
        self.buf[FORCE_HIST_DIM - 3..].copy_from_slice(force);
    }

    pub fn as_array(&self) -> &[f64; FORCE_HIST_DIM] {
        &self.buf
    }
}

/// Ring of the last 50 proprioceptive observations, flattened oldest to
/// newest, zero-padded after reset.
#[derive(Debug, Clone)]
pub struct ProprioHistory {
    buf: Vec<f64>,
}

impl Default for ProprioHistory {
    fn default() -> Self {
        Self::new()
    }
}

impl ProprioHistory {
    pub fn new() -> Self {
        ProprioHistory {
            buf: vec![0.0; HISTORY_DIM],
        }
    }

    pub fn push(&mut self, obs: &[f64; PROPRIO_DIM]) {
        self.buf.copy_within(PROPRIO_DIM.., 0);
        let start = HISTORY_DIM - PROPRIO_DIM;
        self.buf[start..].copy_from_slice(obs);
    }

    pub fn as_slice(&self) -> &[f64] {
        debug_assert_eq!(self.buf.len(), HISTORY_DIM);
        &self.buf
    }

    /// Entry `k`, counted oldest-to-newest.
    pub fn entry(&self, k: usize) -> &[f64] {
        &self.buf[k * PROPRIO_DIM..(k + 1) * PROPRIO_DIM]
    }
}

/// The four observation blocks of one policy step.
#[derive(Debug, Clone)]
pub struct ObservationBundle {
    pub proprio: [f64; PROPRIO_DIM],
    pub privileged: [f64; PRIV_STATE_DIM],
    pub force_hist: [f64; FORCE_HIST_DIM],
    pub terrain: [f64; TERRAIN_SAMPLE_DIM],
}

/// Sensor noise is drawn uniformly within the configured bounds, applied
/// to the raw quantities, then the scalings are applied. Noise is skipped
/// entirely in evaluation mode (`noisy = false`).
pub fn build_proprio(env: &mut Environment, noisy: bool) -> [f64; PROPRIO_DIM] {
    let rnd = env.rnd.clone();
    let use_noise = noisy && rnd.sensor_noise_enabled;
    // Per-sensor draws in slot order; a fixed consumption pattern keeps
    // the stream deterministic.
    let mut noise = [0.0f64; 30];
    if use_noise {
        let rng = env.sensor_rng();
        let mut draw = |half: f64| {
            if half > 0.0 {
                rng.random_range(-half..=half)
            } else {
                0.0
            }
        };
        for slot in noise.iter_mut().take(3) {
            *slot = draw(rnd.noise_ang_vel);
        }
        for slot in noise.iter_mut().take(6).skip(3) {
            *slot = draw(rnd.noise_gravity);
        }
        for slot in noise.iter_mut().take(18).skip(6) {
            *slot = draw(rnd.noise_joint_pos);
        }
        for slot in noise.iter_mut().take(30).skip(18) {
            *slot = draw(rnd.noise_joint_vel);
        }
    }

    let state = env.state();
    let command = env.command();
    let prev_action = env.prev_action();
    let gravity = quat::gravity_body(state.trunk_quat);

    let mut o = [0.0; PROPRIO_DIM];
    for i in 0..3 {
        o[i] = (state.trunk_ang_vel[i] + noise[i]) * ANG_VEL_SCALE;
    }
    for i in 0..3 {
        o[3 + i] = gravity[i] + noise[3 + i];
    }
    for j in 0..NUM_JOINTS {
        o[6 + j] = state.joint_pos[j] + noise[6 + j];
    }
    for j in 0..NUM_JOINTS {
        o[18 + j] = (state.joint_vel[j] + noise[18 + j]) * JOINT_VEL_SCALE;
    }
    o[30] = command[0] * LIN_CMD_SCALE;
    o[31] = command[1] * LIN_CMD_SCALE;
    o[32] = command[2] * ANG_CMD_SCALE;
    o[33..45].copy_from_slice(prev_action);
    o
}

/// Privileged state: ground-truth quantities unavailable on hardware.
pub fn build_privileged_state(env: &Environment) -> [f64; PRIV_STATE_DIM] {
    let state = env.state();
    let episode = env.episode();
    let q = state.trunk_quat;
    let v_body = quat::rotate_inv(q, state.trunk_lin_vel);

    let mut s = [0.0; PRIV_STATE_DIM];
    s[0..3].copy_from_slice(&v_body);
    s[3] = episode.trunk_mass_delta;
    s[4..7].copy_from_slice(&episode.com_displacement);
    s[7] = episode.friction;
    for leg in 0..NUM_LEGS {
        let f_body = quat::rotate_inv(q, env.contact_forces_world()[leg]);
        s[8 + 3 * leg..8 + 3 * leg + 3].copy_from_slice(&f_body);
    }
    for (i, &c) in state.limb_contact.iter().enumerate() {
        s[20 + i] = if c { 1.0 } else { 0.0 };
    }
    s
}

/// 187 height samples on a 17 x 11 grid (1.6 m x 1.0 m) centred on and
/// yaw-aligned with the trunk; entries are trunk height minus terrain
/// height. Row-major with the longitudinal (x) index outermost.
pub fn sample_terrain_heights(env: &Environment) -> [f64; TERRAIN_SAMPLE_DIM] {
    let state = env.state();
    let yaw = quat::yaw(state.trunk_quat);
    let (sy, cy) = yaw.sin_cos();
    let mut t = [0.0; TERRAIN_SAMPLE_DIM];
    let x0 = -((TERRAIN_GRID_X - 1) as f64) / 2.0 * TERRAIN_SAMPLE_SPACING;
    let y0 = -((TERRAIN_GRID_Y - 1) as f64) / 2.0 * TERRAIN_SAMPLE_SPACING;
    let mut idx = 0;
    for ix in 0..TERRAIN_GRID_X {
        let dx = x0 + ix as f64 * TERRAIN_SAMPLE_SPACING;
        for iy in 0..TERRAIN_GRID_Y {
            let dy = y0 + iy as f64 * TERRAIN_SAMPLE_SPACING;
            let wx = state.trunk_pos[0] + cy * dx - sy * dy;
            let wy = state.trunk_pos[1] + sy * dx + cy * dy;
            t[idx] = state.trunk_pos[2] - env.terrain().height_at(wx, wy);
            idx += 1;
        }
    }
    debug_assert_eq!(idx, TERRAIN_SAMPLE_DIM);
    t
}

/// Builds all four blocks for the current state.
pub fn observe(env: &mut Environment, noisy: bool) -> ObservationBundle {
    ObservationBundle {
        proprio: build_proprio(env, noisy),
        privileged: build_privileged_state(env),
        force_hist: *env.force_history().as_array(),
        terrain: sample_terrain_heights(env),
    }
}
