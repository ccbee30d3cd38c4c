//! Trunk + kinematic-leg robot model: forward kinematics, leg Jacobians,
//! PD actuation and the default standing pose.

use serde::{Deserialize, Serialize};

use super::quat::{self, Quat, Vec3};

pub const NUM_LEGS: usize = 4;
pub const JOINTS_PER_LEG: usize = 3; // abduction, hip flexion, knee
pub const NUM_JOINTS: usize = 12;

/// Leg order: front-left, front-right, rear-left, rear-right.
pub const LEG_X_SIGN: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
pub const LEG_Y_SIGN: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

/// Physical constants of the simplified robot and its contact model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Physics substep, 200 Hz.
    pub dt_physics: f64,
    /// Policy period, 50 Hz (4 substeps).
    pub substeps: usize,
    pub gravity: f64,

    pub trunk_mass: f64,
    pub trunk_inertia: [f64; 3],

    /// Hip mount points relative to the trunk centre (|x|, |y|).
    pub hip_mount_x: f64,
    pub hip_mount_y: f64,
    /// Lateral offset from the abduction axis to the leg plane.
    pub hip_offset: f64,
    pub thigh_length: f64,
    pub calf_length: f64,
    /// Standing trunk height; the default pose puts the feet exactly on
    /// flat ground at this height.
    pub nominal_height: f64,

    pub kp: f64,
    pub kd: f64,
    pub torque_limit: f64,
    pub joint_inertia: f64,
    pub joint_damping: f64,
    /// Symmetric limits per joint triple (abduction, hip, knee).
    pub joint_limits: [f64; 3],

    pub contact_k_normal: f64,
    pub contact_d_normal: f64,
    pub contact_k_tangent: f64,
    pub contact_d_tangent: f64,
    /// Gain on the Jacobian-transpose ground-load torque felt by the
    /// joints. Below 1 the massless-leg model is softened against
    /// buckling under impact transients.
    pub joint_load_gain: f64,

    pub action_scale: f64,
    /// Trunk height above local terrain below which the episode ends.
    pub termination_height: f64,
    /// Contact radius used for the thigh/calf collision flags.
    pub limb_contact_radius: f64,

    pub max_episode_steps: u32,
    pub command_resample_interval: f64,
    pub force_event_duration: f64,
    pub wrench_interval: f64,
    pub wrench_magnitude: f64,
    pub spawn_height_offset: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt_physics: 0.005,
            substeps: 4,
            gravity: 9.81,
            trunk_mass: 12.0,
            trunk_inertia: [0.08, 0.16, 0.21],
            hip_mount_x: 0.19,
            hip_mount_y: 0.047,
            hip_offset: 0.08,
            thigh_length: 0.213,
            calf_length: 0.213,
            nominal_height: 0.30,
            kp: 20.0,
            kd: 0.5,
            torque_limit: 23.5,
            joint_inertia: 0.02,
            joint_damping: 0.01,
            joint_limits: [1.05, 2.97, 2.69],
            contact_k_normal: 4000.0,
            contact_d_normal: 100.0,
            contact_k_tangent: 2000.0,
            contact_d_tangent: 50.0,
            joint_load_gain: 0.25,
            action_scale: 0.25,
            termination_height: 0.10,
            limb_contact_radius: 0.02,
            max_episode_steps: 1000,
            command_resample_interval: 10.0,
            force_event_duration: 0.5,
            wrench_interval: 15.0,
            wrench_magnitude: 2.5,
            spawn_height_offset: 0.05,
        }
    }
}

impl SimConfig {
    pub fn dt_policy(&self) -> f64 {
        self.dt_physics * self.substeps as f64
    }

    /// Default joint angles: feet directly under the hip pivots with the
    /// trunk at nominal height.
    pub fn default_joint_pos(&self) -> [f64; NUM_JOINTS] {
        let hip = (self.nominal_height / (self.thigh_length + self.calf_length)).acos();
        let knee = -2.0 * hip;
        let mut q = [0.0; NUM_JOINTS];
        for leg in 0..NUM_LEGS {
            q[3 * leg] = 0.0;
            q[3 * leg + 1] = hip;
            q[3 * leg + 2] = knee;
        }
        q
    }

    pub fn joint_limit(&self, joint: usize) -> f64 {
        self.joint_limits[joint % JOINTS_PER_LEG]
    }

    /// PD torque: clamp(kp (q* - q) - kd qdot, +/- torque_limit).
    pub fn pd_torque(
        &self,
        q_target: &[f64; NUM_JOINTS],
        q: &[f64; NUM_JOINTS],
        qdot: &[f64; NUM_JOINTS],
    ) -> [f64; NUM_JOINTS] {
        let mut tau = [0.0; NUM_JOINTS];
        for j in 0..NUM_JOINTS {
            tau[j] = (self.kp * (q_target[j] - q[j]) - self.kd * qdot[j])
                .clamp(-self.torque_limit, self.torque_limit);
        }
        tau
    }
}

/// Ground truth the simulator integrates.
#[derive(Debug, Clone)]
pub struct RobotState {
    pub trunk_pos: Vec3,
    /// Unit quaternion, world-from-body.
    pub trunk_quat: Quat,
    /// World frame.
    pub trunk_lin_vel: Vec3,
    /// Body frame.
    pub trunk_ang_vel: Vec3,
    pub joint_pos: [f64; NUM_JOINTS],
    pub joint_vel: [f64; NUM_JOINTS],
    pub foot_air_time: [f64; NUM_LEGS],
    pub foot_contact: [bool; NUM_LEGS],
    /// Thigh then calf contact per leg: [t0, t1, t2, t3, c0, c1, c2, c3].
    pub limb_contact: [bool; 8],
}

impl RobotState {
    pub fn at_rest(cfg: &SimConfig, pos: Vec3) -> Self {
        RobotState {
            trunk_pos: pos,
            trunk_quat: quat::IDENTITY,
            trunk_lin_vel: [0.0; 3],
            trunk_ang_vel: [0.0; 3],
            joint_pos: cfg.default_joint_pos(),
            joint_vel: [0.0; NUM_JOINTS],
            foot_air_time: [0.0; NUM_LEGS],
            foot_contact: [false; NUM_LEGS],
            limb_contact: [false; 8],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.trunk_pos.iter().all(|v| v.is_finite())
            && self.trunk_quat.iter().all(|v| v.is_finite())
            && self.trunk_lin_vel.iter().all(|v| v.is_finite())
            && self.trunk_ang_vel.iter().all(|v| v.is_finite())
            && self.joint_pos.iter().all(|v| v.is_finite())
            && self.joint_vel.iter().all(|v| v.is_finite())
    }
}

fn rot_x(theta: f64, v: Vec3) -> Vec3 {
    let (s, c) = theta.sin_cos();
    [v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]]
}

fn rot_x_deriv(theta: f64, v: Vec3) -> Vec3 {
    let (s, c) = theta.sin_cos();
    [0.0, -s * v[1] - c * v[2], c * v[1] - s * v[2]]
}

/// Foot position of one leg in the trunk frame.
pub fn foot_position_trunk(cfg: &SimConfig, leg: usize, q_leg: &[f64; 3]) -> Vec3 {
    let (theta, phi, psi) = (q_leg[0], q_leg[1], q_leg[2]);
    let mount = [
        LEG_X_SIGN[leg] * cfg.hip_mount_x,
        LEG_Y_SIGN[leg] * cfg.hip_mount_y,
        0.0,
    ];
    let v = [
        cfg.thigh_length * phi.sin() + cfg.calf_length * (phi + psi).sin(),
        LEG_Y_SIGN[leg] * cfg.hip_offset,
        -cfg.thigh_length * phi.cos() - cfg.calf_length * (phi + psi).cos(),
    ];
    quat::add(mount, rot_x(theta, v))
}

/// Knee position (end of thigh link) in the trunk frame.
pub fn knee_position_trunk(cfg: &SimConfig, leg: usize, q_leg: &[f64; 3]) -> Vec3 {
    let (theta, phi, _) = (q_leg[0], q_leg[1], q_leg[2]);
    let mount = [
        LEG_X_SIGN[leg] * cfg.hip_mount_x,
        LEG_Y_SIGN[leg] * cfg.hip_mount_y,
        0.0,
    ];
    let v = [
        cfg.thigh_length * phi.sin(),
        LEG_Y_SIGN[leg] * cfg.hip_offset,
        -cfg.thigh_length * phi.cos(),
    ];
    quat::add(mount, rot_x(theta, v))
}

/// 3x3 Jacobian of the trunk-frame foot position with respect to the
/// leg's (abduction, hip, knee) angles; columns are joint derivatives.
pub fn foot_jacobian_trunk(cfg: &SimConfig, leg: usize, q_leg: &[f64; 3]) -> [[f64; 3]; 3] {
    let (theta, phi, psi) = (q_leg[0], q_leg[1], q_leg[2]);
    let v = [
        cfg.thigh_length * phi.sin() + cfg.calf_length * (phi + psi).sin(),
        LEG_Y_SIGN[leg] * cfg.hip_offset,
        -cfg.thigh_length * phi.cos() - cfg.calf_length * (phi + psi).cos(),
    ];
    let d_theta = rot_x_deriv(theta, v);
    let d_phi = rot_x(
        theta,
        [
            cfg.thigh_length * phi.cos() + cfg.calf_length * (phi + psi).cos(),
            0.0,
            cfg.thigh_length * phi.sin() + cfg.calf_length * (phi + psi).sin(),
        ],
    );
    let d_psi = rot_x(
        theta,
        [
            cfg.calf_length * (phi + psi).cos(),
            0.0,
            cfg.calf_length * (phi + psi).sin(),
        ],
    );
    [d_theta, d_phi, d_psi]
}

/// World-frame positions of the four feet.
pub fn fk_foot_positions(cfg: &SimConfig, state: &RobotState) -> [Vec3; NUM_LEGS] {
    let mut out = [[0.0; 3]; NUM_LEGS];
    for (leg, slot) in out.iter_mut().enumerate() {
        let q_leg = [
            state.joint_pos[3 * leg],
            state.joint_pos[3 * leg + 1],
            state.joint_pos[3 * leg + 2],
        ];
        let p = foot_position_trunk(cfg, leg, &q_leg);
        *slot = quat::add(state.trunk_pos, quat::rotate(state.trunk_quat, p));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SimConfig {
        SimConfig::default()
    }

    #[test]
    fn default_pose_feet_on_ground() {
        let cfg = cfg();
        let state = RobotState::at_rest(&cfg, [0.0, 0.0, cfg.nominal_height]);
        let feet = fk_foot_positions(&cfg, &state);
        for f in feet {
            assert!(f[2].abs() < 1e-6, "foot z {}", f[2]);
        }
    }

    #[test]
    fn default_pose_feet_under_hips() {
        let cfg = cfg();
        let q = cfg.default_joint_pos();
        for leg in 0..NUM_LEGS {
            let q_leg = [q[3 * leg], q[3 * leg + 1], q[3 * leg + 2]];
            let p = foot_position_trunk(&cfg, leg, &q_leg);
            assert!((p[0] - LEG_X_SIGN[leg] * cfg.hip_mount_x).abs() < 1e-9);
            let expect_y = LEG_Y_SIGN[leg] * (cfg.hip_mount_y + cfg.hip_offset);
            assert!((p[1] - expect_y).abs() < 1e-9);
        }
    }

    #[test]
    fn planar_two_link_case() {
        // Zero abduction: x = L1 sin(phi) + L2 sin(phi+psi),
        //                 z = -L1 cos(phi) - L2 cos(phi+psi).
        let cfg = cfg();
        let (phi, psi) = (0.6, -1.1);
        let p = foot_position_trunk(&cfg, 0, &[0.0, phi, psi]);
        let x = cfg.thigh_length * phi.sin() + cfg.calf_length * (phi + psi).sin();
        let z = -cfg.thigh_length * phi.cos() - cfg.calf_length * (phi + psi).cos();
        assert!((p[0] - cfg.hip_mount_x - x).abs() < 1e-12);
        assert!((p[2] - z).abs() < 1e-12);
    }

    #[test]
    fn yaw_rotation_equivariance() {
        let cfg = cfg();
        let mut state = RobotState::at_rest(&cfg, [0.0, 0.0, cfg.nominal_height]);
        state.joint_pos[1] += 0.2;
        state.joint_pos[5] -= 0.15;
        let feet = fk_foot_positions(&cfg, &state);

        let yaw = std::f64::consts::FRAC_PI_2;
        let mut rotated = state.clone();
        rotated.trunk_quat = super::super::quat::from_yaw(yaw);
        let feet_rot = fk_foot_positions(&cfg, &rotated);

        for leg in 0..NUM_LEGS {
            let rel = quat::sub(feet[leg], state.trunk_pos);
            let expect = quat::add(
                state.trunk_pos,
                quat::rotate(super::super::quat::from_yaw(yaw), rel),
            );
            for i in 0..3 {
                assert!((feet_rot[leg][i] - expect[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cfg = cfg();
        let q = [0.3, 0.9, -1.4];
        let jac = foot_jacobian_trunk(&cfg, 1, &q);
        let h = 1e-7;
        for j in 0..3 {
            let mut qp = q;
            let mut qm = q;
            qp[j] += h;
            qm[j] -= h;
            let pp = foot_position_trunk(&cfg, 1, &qp);
            let pm = foot_position_trunk(&cfg, 1, &qm);
            for i in 0..3 {
                let fd = (pp[i] - pm[i]) / (2.0 * h);
                assert!((jac[j][i] - fd).abs() < 1e-6, "J[{j}][{i}]");
            }
        }
    }

    #[test]
    fn pd_torque_cases() {
        let cfg = cfg();
        let q = cfg.default_joint_pos();
        let zero_vel = [0.0; 12];
        // Equilibrium: tau = 0.
        let tau = cfg.pd_torque(&q, &q, &zero_vel);
        assert!(tau.iter().all(|&t| t == 0.0));
        // 0.1 rad error, zero velocity: tau = 2.0.
        let mut qt = q;
        qt[4] += 0.1;
        let tau = cfg.pd_torque(&qt, &q, &zero_vel);
        assert!((tau[4] - 2.0).abs() < 1e-12);
        // Saturation at the limit.
        qt[4] = q[4] + 100.0;
        let tau = cfg.pd_torque(&qt, &q, &zero_vel);
        assert_eq!(tau[4], cfg.torque_limit);
    }

    #[test]
    fn default_pose_within_joint_limits() {
        let cfg = cfg();
        let q = cfg.default_joint_pos();
        for j in 0..NUM_JOINTS {
            assert!(q[j].abs() <= cfg.joint_limit(j));
        }
    }
}
