//! Debug trace of the standing settle transient.

use quadloco::sim::{Environment, EpisodeParams, HeightField, RandomizationConfig, SimConfig};

fn main() {
    let mut rnd = RandomizationConfig::default();
    rnd.sensor_noise_enabled = false;
    let mut env = Environment::new(SimConfig::default(), rnd, HeightField::flat(), 1);
    env.reset(EpisodeParams::nominal());
    env.termination_enabled = false;
    for k in 0..150 {
        let r = env.step(&[0.0; 12]);
        if k % 5 == 0 || k < 12 {
            let s = env.state();
            let n: f64 = env.contact_forces_world().iter().map(|f| f[2]).sum();
            println!(
                "t={:5.2} h={:6.3} vz={:6.2} q_hip={:6.3} q_knee={:6.3} N={:7.1} contacts={:?} g_b2={:5.2} term={}",
                env.time(),
                s.trunk_pos[2],
                s.trunk_lin_vel[2],
                s.joint_pos[1],
                s.joint_pos[2],
                n,
                s.foot_contact.iter().filter(|&&c| c).count(),
                quadloco::sim::quat::gravity_body(s.trunk_quat)[2],
                r.terminated,
            );
        }
    }
}
