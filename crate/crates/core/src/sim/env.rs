//! The environment: 200 Hz physics under a 50 Hz control interface.
//!
//! Legs are massless and kinematic: ground reaction forces act on the
//! trunk at the foot locations, and the joints feel the same load through
//! Jacobian-transpose feedback added to their PD torque. The randomized
//! COM displacement enters through the torque arms of gravity and of the
//! external perturbation force.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{EpisodeParams, RandomizationConfig};
use super::quat::{self, Vec3};
use super::robot::{
    fk_foot_positions, foot_jacobian_trunk, foot_position_trunk, knee_position_trunk, RobotState,
    SimConfig, NUM_JOINTS, NUM_LEGS,
};
use super::terrain::HeightField;
use crate::obs::{ForceHistory, ProprioHistory};

/// Reward and logging inputs produced by one policy step.
#[derive(Debug, Clone)]
pub struct StepSnapshot {
    pub time: f64,
    pub command: Vec3,
    pub lin_vel_body: Vec3,
    pub ang_vel_body: Vec3,
    pub gravity_body: Vec3,
    pub height_above_terrain: f64,
    pub joint_vel: [f64; NUM_JOINTS],
    pub prev_joint_vel: [f64; NUM_JOINTS],
    pub q_target: [f64; NUM_JOINTS],
    pub prev_q_target: [f64; NUM_JOINTS],
    /// Component-wise mean of the applied PD torques over the substeps.
    pub mean_torque: [f64; NUM_JOINTS],
    /// Thigh/calf links in contact at the end of the step.
    pub collision_count: u32,
    /// Air time credited to feet that touched down during this step.
    pub touchdown_air_time: [Option<f64>; NUM_LEGS],
    pub foot_pos_trunk: [Vec3; NUM_LEGS],
    pub applied_force: Vec3,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub snapshot: StepSnapshot,
    pub terminated: bool,
    pub timeout: bool,
    pub fault: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.timeout || self.fault
    }
}

pub struct Environment {
    pub cfg: SimConfig,
    pub rnd: RandomizationConfig,
    terrain: HeightField,
    state: RobotState,
    episode: EpisodeParams,
    dyn_rng: ChaCha8Rng,
    sensor_rng: ChaCha8Rng,
    time: f64,
    steps: u32,
    command: Vec3,
    prev_action: [f64; NUM_JOINTS],
    prev_q_target: [f64; NUM_JOINTS],
    contact_anchor: [Option<[f64; 2]>; NUM_LEGS],
    contact_forces_world: [Vec3; NUM_LEGS],
    wrench_applied: Vec<bool>,
    force_hist: ForceHistory,
    proprio_hist: ProprioHistory,
    done: bool,
    /// Evaluation protocols can disable termination to keep trials the
    /// same length.
    pub termination_enabled: bool,
}

impl Environment {
    pub fn new(cfg: SimConfig, rnd: RandomizationConfig, terrain: HeightField, seed: u64) -> Self {
        let mut env = Environment {
            state: RobotState::at_rest(&cfg, [0.0, 0.0, cfg.nominal_height]),
            prev_q_target: cfg.default_joint_pos(),
            cfg,
            rnd,
            terrain,
            episode: EpisodeParams::nominal(),
            dyn_rng: crate::sim::rng_from(&[seed, 0x6479_6e61]),
            sensor_rng: crate::sim::rng_from(&[seed, 0x7365_6e73]),
            time: 0.0,
            steps: 0,
            command: [0.0; 3],
            prev_action: [0.0; NUM_JOINTS],
            contact_anchor: [None; NUM_LEGS],
            contact_forces_world: [[0.0; 3]; NUM_LEGS],
            wrench_applied: Vec::new(),
            force_hist: ForceHistory::new(),
            proprio_hist: ProprioHistory::new(),
            done: false,
            termination_enabled: true,
        };
        env.reset(EpisodeParams::nominal());
        env
    }

    /// Starts a new episode: robot spawned in the air in the default pose.
    pub fn reset(&mut self, episode: EpisodeParams) {
        let spawn_z = self.terrain.height_at(0.0, 0.0)
            + self.cfg.nominal_height
            + self.cfg.spawn_height_offset;
        self.state = RobotState::at_rest(&self.cfg, [0.0, 0.0, spawn_z]);
        self.command = episode.command;
        self.wrench_applied = vec![false; episode.events.len()];
        self.episode = episode;
        self.time = 0.0;
        self.steps = 0;
        self.prev_action = [0.0; NUM_JOINTS];
        self.prev_q_target = self.cfg.default_joint_pos();
        self.contact_anchor = [None; NUM_LEGS];
        self.contact_forces_world = [[0.0; 3]; NUM_LEGS];
        self.force_hist = ForceHistory::new();
        self.proprio_hist = ProprioHistory::new();
        self.done = false;
    }

    /// Samples a fresh set of episode parameters and resets into it.
    pub fn randomize_episode(&mut self, force_level: f64) -> EpisodeParams {
        let params = EpisodeParams::sample(&self.cfg, &self.rnd.clone(), force_level, &mut self.dyn_rng);
        self.reset(params.clone());
        params
    }

    pub fn set_terrain(&mut self, terrain: HeightField) {
        self.terrain = terrain;
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    /// Direct state access for test harnesses and evaluation protocols.
    pub fn state_mut(&mut self) -> &mut RobotState {
        &mut self.state
    }

    pub fn terrain(&self) -> &HeightField {
        &self.terrain
    }

    pub fn episode(&self) -> &EpisodeParams {
        &self.episode
    }

    pub fn command(&self) -> Vec3 {
        self.command
    }

    pub fn set_command(&mut self, command: Vec3) {
        self.command = command;
        self.episode.command_resample = false;
    }

    pub fn prev_action(&self) -> &[f64; NUM_JOINTS] {
        &self.prev_action
    }

    pub fn contact_forces_world(&self) -> &[Vec3; NUM_LEGS] {
        &self.contact_forces_world
    }

    pub fn force_history(&self) -> &ForceHistory {
        &self.force_hist
    }

    pub fn proprio_history(&self) -> &ProprioHistory {
        &self.proprio_hist
    }

    pub fn push_proprio(&mut self, obs: &[f64; crate::obs::PROPRIO_DIM]) {
        self.proprio_hist.push(obs);
    }

    pub fn sensor_rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.sensor_rng
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn height_above_terrain(&self) -> f64 {
        self.state.trunk_pos[2]
            - self
                .terrain
                .height_at(self.state.trunk_pos[0], self.state.trunk_pos[1])
    }

    /// Instantaneous world-frame lateral velocity change, used by the
    /// impulse-trial protocol.
    pub fn apply_lateral_impulse(&mut self, delta_v: f64) {
        self.state.trunk_lin_vel[1] += delta_v;
    }

    /// Runs one policy step: exactly `substeps` physics substeps with the
    /// joint targets held at `q_default + action_scale * action`.
    pub fn step(&mut self, action: &[f64; NUM_JOINTS]) -> StepResult {
        let prev_joint_vel = self.state.joint_vel;
        let prev_q_target = self.prev_q_target;

        if !action.iter().all(|a| a.is_finite()) {
            self.done = true;
            return self.fault_result(prev_joint_vel, prev_q_target, *action);
        }

        // Command resampling on a fixed interval.
        if self.episode.command_resample && self.steps > 0 {
            let every = (self.cfg.command_resample_interval / self.cfg.dt_policy()).round() as u32;
            if every > 0 && self.steps % every == 0 {
                let r = self.rnd.command_range;
                self.command = [
                    self.dyn_rng.random_range(-r..=r),
                    self.dyn_rng.random_range(-r..=r),
                    self.dyn_rng.random_range(-r..=r),
                ];
            }
        }

        let default_q = self.cfg.default_joint_pos();
        let mut q_target = [0.0; NUM_JOINTS];
        for j in 0..NUM_JOINTS {
            let lim = self.cfg.joint_limit(j);
            q_target[j] = (default_q[j] + self.cfg.action_scale * action[j]).clamp(-lim, lim);
        }

        // External force for this policy step (held across substeps),
        // with per-step noise while a force event is active.
        let mut ext_force = [0.0; 3];
        let mut force_event_active = false;
        for e in &self.episode.events {
            if e.duration > 0.0 && e.force_active_at(self.time) {
                ext_force = quat::add(ext_force, e.force);
                force_event_active = true;
            }
        }
        if force_event_active && self.rnd.force_noise > 0.0 {
            for f in ext_force.iter_mut() {
                *f += self.dyn_rng.random_range(-self.rnd.force_noise..=self.rnd.force_noise);
            }
        }

        let mass = self.cfg.trunk_mass + self.episode.trunk_mass_delta;
        let inertia = self.cfg.trunk_inertia;
        let dt = self.cfg.dt_physics;
        let mut torque_acc = [0.0; NUM_JOINTS];
        let mut touchdown: [Option<f64>; NUM_LEGS] = [None; NUM_LEGS];
        let mut fault = false;

        for _ in 0..self.cfg.substeps {
            // Instantaneous wrench impulses.
            for (i, e) in self.episode.events.iter().enumerate() {
                if !self.wrench_applied[i]
                    && e.wrench_delta_omega != [0.0; 3]
                    && self.time >= e.start_time
                {
                    self.state.trunk_ang_vel =
                        quat::add(self.state.trunk_ang_vel, e.wrench_delta_omega);
                    self.wrench_applied[i] = true;
                }
            }

            let q = self.state.trunk_quat;
            let tau_pd = self.cfg.pd_torque(&q_target, &self.state.joint_pos, &self.state.joint_vel);
            for j in 0..NUM_JOINTS {
                torque_acc[j] += tau_pd[j];
            }

            // Contacts.
            let mut total_force = [0.0, 0.0, -mass * self.cfg.gravity];
            let com_arm = quat::rotate(q, self.episode.com_displacement);
            let mut total_torque = quat::cross(com_arm, [0.0, 0.0, -mass * self.cfg.gravity]);
            let mut tau_fb = [0.0; NUM_JOINTS];

            for leg in 0..NUM_LEGS {
                let q_leg = [
                    self.state.joint_pos[3 * leg],
                    self.state.joint_pos[3 * leg + 1],
                    self.state.joint_pos[3 * leg + 2],
                ];
                let qd_leg = [
                    self.state.joint_vel[3 * leg],
                    self.state.joint_vel[3 * leg + 1],
                    self.state.joint_vel[3 * leg + 2],
                ];
                let p_trunk = foot_position_trunk(&self.cfg, leg, &q_leg);
                let jac = foot_jacobian_trunk(&self.cfg, leg, &q_leg);
                let p_world = quat::add(self.state.trunk_pos, quat::rotate(q, p_trunk));

                // Foot velocity: trunk + rotation + joint motion.
                let v_joint = [
                    jac[0][0] * qd_leg[0] + jac[1][0] * qd_leg[1] + jac[2][0] * qd_leg[2],
                    jac[0][1] * qd_leg[0] + jac[1][1] * qd_leg[1] + jac[2][1] * qd_leg[2],
                    jac[0][2] * qd_leg[0] + jac[1][2] * qd_leg[1] + jac[2][2] * qd_leg[2],
                ];
                let v_world = quat::add(
                    self.state.trunk_lin_vel,
                    quat::rotate(
                        q,
                        quat::add(quat::cross(self.state.trunk_ang_vel, p_trunk), v_joint),
                    ),
                );

                let (force, in_contact) = contact_force(
                    &self.cfg,
                    &self.terrain,
                    self.episode.friction,
                    &mut self.contact_anchor[leg],
                    p_world,
                    v_world,
                );
                self.contact_forces_world[leg] = force;

                if in_contact {
                    if !self.state.foot_contact[leg] {
                        let credit = self.state.foot_air_time[leg];
                        touchdown[leg] = Some(touchdown[leg].unwrap_or(0.0) + credit);
                        self.state.foot_air_time[leg] = 0.0;
                    }
                    self.state.foot_contact[leg] = true;
                } else {
                    self.state.foot_contact[leg] = false;
                    self.state.foot_air_time[leg] += dt;
                }

                if force != [0.0; 3] {
                    total_force = quat::add(total_force, force);
                    let arm = quat::sub(p_world, self.state.trunk_pos);
                    total_torque = quat::add(total_torque, quat::cross(arm, force));
                    // Jacobian-transpose load on the joints.
                    let f_body = quat::rotate_inv(q, force);
                    for jj in 0..3 {
                        tau_fb[3 * leg + jj] =
                            self.cfg.joint_load_gain * quat::dot(jac[jj], f_body);
                    }
                }

                // Thigh / calf contact flags.
                let knee_trunk = knee_position_trunk(&self.cfg, leg, &q_leg);
                let knee_world = quat::add(self.state.trunk_pos, quat::rotate(q, knee_trunk));
                let calf_mid = quat::scale(quat::add(knee_world, p_world), 0.5);
                self.state.limb_contact[leg] = knee_world[2]
                    - self.terrain.height_at(knee_world[0], knee_world[1])
                    < self.cfg.limb_contact_radius;
                self.state.limb_contact[NUM_LEGS + leg] = calf_mid[2]
                    - self.terrain.height_at(calf_mid[0], calf_mid[1])
                    < self.cfg.limb_contact_radius;
            }

            // External perturbation force at the (displaced) COM.
            if ext_force != [0.0; 3] {
                total_force = quat::add(total_force, ext_force);
                total_torque = quat::add(total_torque, quat::cross(com_arm, ext_force));
            }

            // Joint dynamics.
            for j in 0..NUM_JOINTS {
                let acc = (tau_pd[j] + tau_fb[j] - self.cfg.joint_damping * self.state.joint_vel[j])
                    / self.cfg.joint_inertia;
                self.state.joint_vel[j] += acc * dt;
                self.state.joint_pos[j] += self.state.joint_vel[j] * dt;
                let lim = self.cfg.joint_limit(j);
                if self.state.joint_pos[j] > lim {
                    self.state.joint_pos[j] = lim;
                    self.state.joint_vel[j] = self.state.joint_vel[j].min(0.0);
                } else if self.state.joint_pos[j] < -lim {
                    self.state.joint_pos[j] = -lim;
                    self.state.joint_vel[j] = self.state.joint_vel[j].max(0.0);
                }
            }

            // Trunk: semi-implicit Euler, rotation in the body frame.
            for i in 0..3 {
                self.state.trunk_lin_vel[i] += total_force[i] / mass * dt;
                self.state.trunk_pos[i] += self.state.trunk_lin_vel[i] * dt;
            }
            let torque_body = quat::rotate_inv(q, total_torque);
            let w = self.state.trunk_ang_vel;
            let iw = [inertia[0] * w[0], inertia[1] * w[1], inertia[2] * w[2]];
            let gyro = quat::cross(w, iw);
            for i in 0..3 {
                self.state.trunk_ang_vel[i] += (torque_body[i] - gyro[i]) / inertia[i] * dt;
            }
            self.state.trunk_quat = quat::integrate(q, self.state.trunk_ang_vel, dt);

            self.time += dt;
            if !self.state.is_finite() {
                fault = true;
                break;
            }
        }

        self.steps += 1;
        let timeout = self.steps >= self.cfg.max_episode_steps;
        let terminated = !fault
            && self.termination_enabled
            && self.height_above_terrain() < self.cfg.termination_height;
        self.done = fault || timeout || terminated;

        self.force_hist.push(&ext_force);

        let q = self.state.trunk_quat;
        let mut mean_torque = [0.0; NUM_JOINTS];
        for j in 0..NUM_JOINTS {
            mean_torque[j] = torque_acc[j] / self.cfg.substeps as f64;
        }
        let mut foot_pos_trunk = [[0.0; 3]; NUM_LEGS];
        for (leg, slot) in foot_pos_trunk.iter_mut().enumerate() {
            let q_leg = [
                self.state.joint_pos[3 * leg],
                self.state.joint_pos[3 * leg + 1],
                self.state.joint_pos[3 * leg + 2],
            ];
            *slot = foot_position_trunk(&self.cfg, leg, &q_leg);
        }

        let snapshot = StepSnapshot {
            time: self.time,
            command: self.command,
            lin_vel_body: quat::rotate_inv(q, self.state.trunk_lin_vel),
            ang_vel_body: self.state.trunk_ang_vel,
            gravity_body: quat::gravity_body(q),
            height_above_terrain: self.height_above_terrain(),
            joint_vel: self.state.joint_vel,
            prev_joint_vel,
            q_target,
            prev_q_target,
            mean_torque,
            collision_count: self.state.limb_contact.iter().filter(|&&c| c).count() as u32,
            touchdown_air_time: touchdown,
            foot_pos_trunk,
            applied_force: ext_force,
        };

        self.prev_action = *action;
        self.prev_q_target = q_target;

        StepResult {
            snapshot,
            terminated,
            timeout,
            fault,
        }
    }

    fn fault_result(
        &mut self,
        prev_joint_vel: [f64; NUM_JOINTS],
        prev_q_target: [f64; NUM_JOINTS],
        _action: [f64; NUM_JOINTS],
    ) -> StepResult {
        let q = self.state.trunk_quat;
        StepResult {
            snapshot: StepSnapshot {
                time: self.time,
                command: self.command,
                lin_vel_body: quat::rotate_inv(q, self.state.trunk_lin_vel),
                ang_vel_body: self.state.trunk_ang_vel,
                gravity_body: quat::gravity_body(q),
                height_above_terrain: self.height_above_terrain(),
                joint_vel: self.state.joint_vel,
                prev_joint_vel,
                q_target: prev_q_target,
                prev_q_target,
                mean_torque: [0.0; NUM_JOINTS],
                collision_count: 0,
                touchdown_air_time: [None; NUM_LEGS],
                foot_pos_trunk: [[0.0; 3]; NUM_LEGS],
                applied_force: [0.0; 3],
            },
            terminated: true,
            timeout: false,
            fault: true,
        }
    }

    /// Quaternion drift check, used by tests.
    pub fn quat_norm_error(&self) -> f64 {
        (quat::norm(self.state.trunk_quat) - 1.0).abs()
    }

    pub fn foot_positions_world(&self) -> [Vec3; NUM_LEGS] {
        fk_foot_positions(&self.cfg, &self.state)
    }
}

/// Penalty-based foot contact. Normal: linear spring-damper on the
/// penetration depth, clamped non-negative. Tangential: a spring-damper
/// toward a per-foot stick anchor, capped by the friction cone; the
/// anchor slides when the cap binds.
pub fn contact_force(
    cfg: &SimConfig,
    terrain: &HeightField,
    friction: f64,
    anchor: &mut Option<[f64; 2]>,
    p_world: Vec3,
    v_world: Vec3,
) -> (Vec3, bool) {
    let h = terrain.height_at(p_world[0], p_world[1]);
    let pen = h - p_world[2];
    if pen <= 0.0 {
        *anchor = None;
        return ([0.0; 3], false);
    }
    let normal = (cfg.contact_k_normal * pen - cfg.contact_d_normal * v_world[2]).max(0.0);

    let a = anchor.get_or_insert([p_world[0], p_world[1]]);
    let mut ft = [
        -cfg.contact_k_tangent * (p_world[0] - a[0]) - cfg.contact_d_tangent * v_world[0],
        -cfg.contact_k_tangent * (p_world[1] - a[1]) - cfg.contact_d_tangent * v_world[1],
    ];
    let cap = friction * normal;
    let mag = (ft[0] * ft[0] + ft[1] * ft[1]).sqrt();
    if mag > cap {
        let s = cap / mag;
        ft[0] *= s;
        ft[1] *= s;
        // Slide the anchor so the spring stays consistent with the
        // capped force.
        a[0] = p_world[0] + (ft[0] + cfg.contact_d_tangent * v_world[0]) / cfg.contact_k_tangent;
        a[1] = p_world[1] + (ft[1] + cfg.contact_d_tangent * v_world[1]) / cfg.contact_k_tangent;
    }
    ([ft[0], ft[1], normal], true)
}
