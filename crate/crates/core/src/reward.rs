//! Per-step reward: 12 weighted terms over one policy-step transition.
//!
//! Each term is the product of its expression, its weight and the policy
//! period dt. Tracking terms are positive, penalties non-positive; the
//! foot air-time term is credited at touchdown and can take either sign.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{foot_position_trunk, SimConfig, StepSnapshot, NUM_JOINTS, NUM_LEGS};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub dt: f64,
    pub target_height: f64,
    /// Denominator of the tracking exponentials.
    pub tracking_sigma: f64,
    /// Denominator of the foot-position exponential.
    pub foot_pos_sigma: f64,
    /// Swing-duration offset in the air-time credit.
    pub air_time_offset: f64,
    /// Nominal stance foot targets in the trunk frame.
    pub stance_targets: [[f64; 3]; NUM_LEGS],
    pub weights: RewardWeights,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub lin_vel_tracking: f64,
    pub ang_vel_tracking: f64,
    pub lin_vel_penalty: f64,
    pub ang_vel_penalty: f64,
    pub orientation: f64,
    pub height: f64,
    pub joint_acceleration: f64,
    pub joint_torque: f64,
    pub action_rate: f64,
    pub self_collision: f64,
    pub foot_air_time: f64,
    pub foot_position: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            lin_vel_tracking: 1.0,
            ang_vel_tracking: 0.5,
            lin_vel_penalty: -2.0,
            ang_vel_penalty: -0.05,
            orientation: -1.0,
            height: -5.0,
            joint_acceleration: -1e-7,
            joint_torque: -0.0002,
            action_rate: -0.005,
            self_collision: -0.001,
            foot_air_time: 1.0,
            foot_position: 0.3,
        }
    }
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self::for_sim(&SimConfig::default())
    }
}

impl RewardConfig {
    /// Derives dt and the stance targets from the simulator constants.
    pub fn for_sim(sim: &SimConfig) -> Self {
        let q = sim.default_joint_pos();
        let mut stance = [[0.0; 3]; NUM_LEGS];
        for (leg, slot) in stance.iter_mut().enumerate() {
            *slot = foot_position_trunk(sim, leg, &[q[3 * leg], q[3 * leg + 1], q[3 * leg + 2]]);
        }
        RewardConfig {
            dt: sim.dt_policy(),
            target_height: sim.nominal_height,
            tracking_sigma: 0.25,
            foot_pos_sigma: 0.02,
            air_time_offset: 0.5,
            stance_targets: stance,
            weights: RewardWeights::default(),
        }
    }
}

/// The 12 weighted terms, each already multiplied by weight and dt.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RewardTerms {
    pub lin_vel_tracking: f64,
    pub ang_vel_tracking: f64,
    pub lin_vel_penalty: f64,
    pub ang_vel_penalty: f64,
    pub orientation: f64,
    pub height: f64,
    pub joint_acceleration: f64,
    pub joint_torque: f64,
    pub action_rate: f64,
    pub self_collision: f64,
    pub foot_air_time: f64,
    pub foot_position: f64,
}

pub const REWARD_TERM_NAMES: [&str; 12] = [
    "lin_vel_tracking",
    "ang_vel_tracking",
    "lin_vel_penalty",
    "ang_vel_penalty",
    "orientation",
    "height",
    "joint_acceleration",
    "joint_torque",
    "action_rate",
    "self_collision",
    "foot_air_time",
    "foot_position",
];

impl RewardTerms {
    pub fn as_array(&self) -> [f64; 12] {
        [
            self.lin_vel_tracking,
            self.ang_vel_tracking,
            self.lin_vel_penalty,
            self.ang_vel_penalty,
            self.orientation,
            self.height,
            self.joint_acceleration,
            self.joint_torque,
            self.action_rate,
            self.self_collision,
            self.foot_air_time,
            self.foot_position,
        ]
    }

    /// Exact sum of the 12 weighted terms.
    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

/// Evaluates all 12 terms for one transition.
pub fn compute_reward_terms(snap: &StepSnapshot, cfg: &RewardConfig) -> Result<RewardTerms> {
    let finite = snap.lin_vel_body.iter().all(|v| v.is_finite())
        && snap.ang_vel_body.iter().all(|v| v.is_finite())
        && snap.gravity_body.iter().all(|v| v.is_finite())
        && snap.height_above_terrain.is_finite()
        && snap.joint_vel.iter().all(|v| v.is_finite())
        && snap.mean_torque.iter().all(|v| v.is_finite());
    if !finite {
        return Err(Error::NumericFault("reward inputs".into()));
    }

    let w = &cfg.weights;
    let dt = cfg.dt;

    let ev = {
        let dx = snap.command[0] - snap.lin_vel_body[0];
        let dy = snap.command[1] - snap.lin_vel_body[1];
        dx * dx + dy * dy
    };
    let lin_vel_tracking = w.lin_vel_tracking * dt * (-ev / cfg.tracking_sigma).exp();

    let ew = {
        let dw = snap.command[2] - snap.ang_vel_body[2];
        dw * dw
    };
    let ang_vel_tracking = w.ang_vel_tracking * dt * (-ew / cfg.tracking_sigma).exp();

    let lin_vel_penalty = w.lin_vel_penalty * dt * snap.lin_vel_body[2] * snap.lin_vel_body[2];

    let ang_vel_penalty = w.ang_vel_penalty
        * dt
        * (snap.ang_vel_body[0] * snap.ang_vel_body[0]
            + snap.ang_vel_body[1] * snap.ang_vel_body[1]);

    let orientation = w.orientation
        * dt
        * (snap.gravity_body[0] * snap.gravity_body[0]
            + snap.gravity_body[1] * snap.gravity_body[1]);

    let dh = snap.height_above_terrain - cfg.target_height;
    let height = w.height * dt * dh * dh;

    let mut acc = 0.0;
    for j in 0..NUM_JOINTS {
        let a = (snap.prev_joint_vel[j] - snap.joint_vel[j]) / dt;
        acc += a * a;
    }
    let joint_acceleration = w.joint_acceleration * dt * acc;

    let tau_sq: f64 = snap.mean_torque.iter().map(|t| t * t).sum();
    let joint_torque = w.joint_torque * dt * tau_sq;

    let mut rate = 0.0;
    for j in 0..NUM_JOINTS {
        let d = snap.prev_q_target[j] - snap.q_target[j];
        rate += d * d;
    }
    let action_rate = w.action_rate * dt * rate;

    let self_collision = w.self_collision * dt * snap.collision_count as f64;

    let mut air = 0.0;
    for t in snap.touchdown_air_time.iter().flatten() {
        air += t - cfg.air_time_offset;
    }
    let foot_air_time = w.foot_air_time * dt * air;

    let mut stance = 0.0;
    for leg in 0..NUM_LEGS {
        let p = snap.foot_pos_trunk[leg];
        let d = cfg.stance_targets[leg];
        let e = (p[0] - d[0]) * (p[0] - d[0])
            + (p[1] - d[1]) * (p[1] - d[1])
            + (p[2] - d[2]) * (p[2] - d[2]);
        stance += (-e / cfg.foot_pos_sigma).exp();
    }
    let foot_position = w.foot_position * dt * stance;

    Ok(RewardTerms {
        lin_vel_tracking,
        ang_vel_tracking,
        lin_vel_penalty,
        ang_vel_penalty,
        orientation,
        height,
        joint_acceleration,
        joint_torque,
        action_rate,
        self_collision,
        foot_air_time,
        foot_position,
    })
}

pub fn total_reward(terms: &RewardTerms) -> f64 {
    terms.total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn perfect_snapshot(cfg: &RewardConfig) -> StepSnapshot {
        StepSnapshot {
            time: 0.0,
            command: [0.7, -0.2, 0.4],
            lin_vel_body: [0.7, -0.2, 0.0],
            ang_vel_body: [0.0, 0.0, 0.4],
            gravity_body: [0.0, 0.0, -1.0],
            height_above_terrain: cfg.target_height,
            joint_vel: [0.0; 12],
            prev_joint_vel: [0.0; 12],
            q_target: [0.1; 12],
            prev_q_target: [0.1; 12],
            mean_torque: [0.0; 12],
            collision_count: 0,
            touchdown_air_time: [None; 4],
            foot_pos_trunk: [[0.0; 3]; 4],
            applied_force: [0.0; 3],
        }
    }

    #[test]
    fn perfect_tracking_hits_weighted_maxima() {
        let cfg = RewardConfig::default();
        let snap = perfect_snapshot(&cfg);
        let t = compute_reward_terms(&snap, &cfg).unwrap();
        // exp(0) = 1 at perfect tracking: weights 1*dt and 0.5*dt.
        assert!((t.lin_vel_tracking - 0.02).abs() < 1e-12);
        assert!((t.ang_vel_tracking - 0.01).abs() < 1e-12);
        assert!((t.lin_vel_tracking + t.ang_vel_tracking - 0.03).abs() < 1e-12);
        // All penalties are zero at the ideal state.
        assert_eq!(t.lin_vel_penalty, 0.0);
        assert_eq!(t.ang_vel_penalty, 0.0);
        assert_eq!(t.orientation, 0.0);
        assert_eq!(t.height, 0.0);
        assert_eq!(t.joint_acceleration, 0.0);
        assert_eq!(t.joint_torque, 0.0);
        assert_eq!(t.action_rate, 0.0);
        assert_eq!(t.self_collision, 0.0);
        assert_eq!(t.foot_air_time, 0.0);
    }

    #[test]
    fn lin_vel_tracking_closed_form() {
        // v* = (1, 0), v = (0.5, 0): exp(-0.25 / 0.25) = e^-1.
        let cfg = RewardConfig::default();
        let mut snap = perfect_snapshot(&cfg);
        snap.command = [1.0, 0.0, 0.0];
        snap.lin_vel_body = [0.5, 0.0, 0.0];
        snap.ang_vel_body = [0.0; 3];
        let t = compute_reward_terms(&snap, &cfg).unwrap();
        let unweighted = t.lin_vel_tracking / (cfg.weights.lin_vel_tracking * cfg.dt);
        assert!((unweighted - (-1.0f64).exp()).abs() < 1e-12);
        assert!((unweighted - 0.3679).abs() < 1e-4);
    }

    #[test]
    fn torque_term_weight() {
        let cfg = RewardConfig::default();
        let mut snap = perfect_snapshot(&cfg);
        // ||tau||^2 = 100.
        snap.mean_torque = [0.0; 12];
        snap.mean_torque[0] = 10.0;
        let t = compute_reward_terms(&snap, &cfg).unwrap();
        assert!((t.joint_torque - (-0.0002 * cfg.dt * 100.0)).abs() < 1e-15);
        assert!((t.joint_torque + 4e-4).abs() < 1e-12);
    }

    #[test]
    fn air_time_credit_at_touchdown() {
        let cfg = RewardConfig::default();
        let mut snap = perfect_snapshot(&cfg);
        snap.touchdown_air_time = [Some(0.7), None, Some(0.3), None];
        let t = compute_reward_terms(&snap, &cfg).unwrap();
        // (0.7 - 0.5) + (0.3 - 0.5) = 0.
        assert!(t.foot_air_time.abs() < 1e-15);
        snap.touchdown_air_time = [Some(0.9), None, None, None];
        let t = compute_reward_terms(&snap, &cfg).unwrap();
        assert!((t.foot_air_time - 1.0 * cfg.dt * 0.4).abs() < 1e-12);
    }

    #[test]
    fn non_finite_input_is_numeric_fault() {
        let cfg = RewardConfig::default();
        let mut snap = perfect_snapshot(&cfg);
        snap.lin_vel_body[0] = f64::NAN;
        assert!(matches!(
            compute_reward_terms(&snap, &cfg),
            Err(Error::NumericFault(_))
        ));
    }

    #[test]
    fn zero_terms_sum_to_zero() {
        let t = RewardTerms::default();
        assert_eq!(t.total(), 0.0);
    }

    /// Independent closed-form re-evaluation of every term on random
    /// transitions; doubles as the re-summation oracle for the total.
    #[test]
    fn terms_match_independent_oracle() {
        let sim = SimConfig::default();
        let cfg = RewardConfig::for_sim(&sim);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let mut r = |s: f64| rng.random_range(-s..s);
            let snap = StepSnapshot {
                time: 0.0,
                command: [r(1.0), r(1.0), r(1.0)],
                lin_vel_body: [r(2.0), r(2.0), r(1.0)],
                ang_vel_body: [r(3.0), r(3.0), r(3.0)],
                gravity_body: [r(0.5), r(0.5), -1.0 + r(0.2)],
                height_above_terrain: 0.3 + r(0.2),
                joint_vel: std::array::from_fn(|_| r(8.0)),
                prev_joint_vel: std::array::from_fn(|_| r(8.0)),
                q_target: std::array::from_fn(|_| r(1.0)),
                prev_q_target: std::array::from_fn(|_| r(1.0)),
                mean_torque: std::array::from_fn(|_| r(20.0)),
                collision_count: rng.random_range(0..8),
                touchdown_air_time: std::array::from_fn(|_| {
                    if rng.random_range(0..3) == 0 {
                        Some(rng.random_range(0.0..1.2))
                    } else {
                        None
                    }
                }),
                foot_pos_trunk: std::array::from_fn(|_| [r(0.3), r(0.3), -0.3 + r(0.1)]),
                applied_force: [0.0; 3],
            };
            let t = compute_reward_terms(&snap, &cfg).unwrap();
            let dt = cfg.dt;
            let w = &cfg.weights;

            let e1 = (snap.command[0] - snap.lin_vel_body[0]).powi(2)
                + (snap.command[1] - snap.lin_vel_body[1]).powi(2);
            check(t.lin_vel_tracking, w.lin_vel_tracking * dt * (-e1 / 0.25).exp());
            let e2 = (snap.command[2] - snap.ang_vel_body[2]).powi(2);
            check(t.ang_vel_tracking, w.ang_vel_tracking * dt * (-e2 / 0.25).exp());
            check(t.lin_vel_penalty, w.lin_vel_penalty * dt * snap.lin_vel_body[2].powi(2));
            check(
                t.ang_vel_penalty,
                w.ang_vel_penalty
                    * dt
                    * (snap.ang_vel_body[0].powi(2) + snap.ang_vel_body[1].powi(2)),
            );
            check(
                t.orientation,
                w.orientation * dt * (snap.gravity_body[0].powi(2) + snap.gravity_body[1].powi(2)),
            );
            check(
                t.height,
                w.height * dt * (snap.height_above_terrain - cfg.target_height).powi(2),
            );
            let acc: f64 = (0..12)
                .map(|j| ((snap.prev_joint_vel[j] - snap.joint_vel[j]) / dt).powi(2))
                .sum();
            check(t.joint_acceleration, w.joint_acceleration * dt * acc);
            let tq: f64 = snap.mean_torque.iter().map(|x| x * x).sum();
            check(t.joint_torque, w.joint_torque * dt * tq);
            let ar: f64 = (0..12)
                .map(|j| (snap.prev_q_target[j] - snap.q_target[j]).powi(2))
                .sum();
            check(t.action_rate, w.action_rate * dt * ar);
            check(
                t.self_collision,
                w.self_collision * dt * snap.collision_count as f64,
            );
            let air: f64 = snap
                .touchdown_air_time
                .iter()
                .flatten()
                .map(|x| x - 0.5)
                .sum();
            check(t.foot_air_time, w.foot_air_time * dt * air);
            let fp: f64 = (0..4)
                .map(|leg| {
                    let p = snap.foot_pos_trunk[leg];
                    let d = cfg.stance_targets[leg];
                    let e = (p[0] - d[0]).powi(2) + (p[1] - d[1]).powi(2) + (p[2] - d[2]).powi(2);
                    (-e / 0.02).exp()
                })
                .sum();
            check(t.foot_position, w.foot_position * dt * fp);

            // Re-summation oracle for the total.
            let resum: f64 = t.as_array().iter().sum();
            assert!((t.total() - resum).abs() < 1e-15);

            // Sign structure.
            assert!(t.lin_vel_tracking > 0.0 && t.lin_vel_tracking <= w.lin_vel_tracking * dt);
            assert!(t.ang_vel_tracking > 0.0 && t.ang_vel_tracking <= w.ang_vel_tracking * dt);
            for p in [
                t.lin_vel_penalty,
                t.ang_vel_penalty,
                t.orientation,
                t.height,
                t.joint_acceleration,
                t.joint_torque,
                t.action_rate,
                t.self_collision,
            ] {
                assert!(p <= 0.0);
            }
        }
    }

    fn check(actual: f64, expect: f64) {
        assert!(
            (actual - expect).abs() <= 1e-9 * (1.0 + expect.abs()),
            "term {actual} vs oracle {expect}"
        );
    }

    #[test]
    fn height_penalty_zero_iff_at_target() {
        let cfg = RewardConfig::default();
        let mut snap = perfect_snapshot(&cfg);
        assert_eq!(compute_reward_terms(&snap, &cfg).unwrap().height, 0.0);
        snap.height_above_terrain = cfg.target_height + 1e-3;
        assert!(compute_reward_terms(&snap, &cfg).unwrap().height < 0.0);
    }

    #[test]
    fn tracking_yaw_invariance() {
        // Tracking errors are body-frame quantities; identical body-frame
        // values give identical terms regardless of world yaw.
        let cfg = RewardConfig::default();
        let snap = perfect_snapshot(&cfg);
        let a = compute_reward_terms(&snap, &cfg).unwrap();
        let b = compute_reward_terms(&snap.clone(), &cfg).unwrap();
        assert_eq!(a, b);
    }
}
