//! Rough throughput probe for the PPO update hot path.

use ndarray::Array2;
use quadloco::nn::Mlp;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn run<F: quadloco::nn::Scalar>(name: &str) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let actor = Mlp::<F>::init(&[72, 512, 256, 128, 12], 0.01, &mut rng);
    let critic = Mlp::<F>::init(&[290, 512, 256, 128, 1], 1.0, &mut rng);
    let enc_t = Mlp::<F>::init(&[187, 256, 128, 16], 1.0, &mut rng);

    let n = 1536usize;
    let xa = Array2::<F>::from_elem((n, 72), F::from_f64(0.1));
    let xc = Array2::<F>::from_elem((n, 290), F::from_f64(0.1));
    let xt = Array2::<F>::from_elem((n, 187), F::from_f64(0.1));
    let ga = Array2::<F>::from_elem((n, 12), F::from_f64(0.01));
    let gc = Array2::<F>::from_elem((n, 1), F::from_f64(0.01));
    let gt = Array2::<F>::from_elem((n, 16), F::from_f64(0.01));

    // one minibatch worth of fwd+bwd on actor+critic+terrain encoder
    let iters = 20;
    let t0 = Instant::now();
    for _ in 0..iters {
        let (_, ca) = actor.forward_batch_cached(&xa).unwrap();
        let _ = actor.backward(&ca, &ga).unwrap();
        let (_, cc) = critic.forward_batch_cached(&xc).unwrap();
        let _ = critic.backward(&cc, &gc).unwrap();
        let (_, ct) = enc_t.forward_batch_cached(&xt).unwrap();
        let _ = enc_t.backward(&ct, &gt).unwrap();
    }
    let dt = t0.elapsed().as_secs_f64() / iters as f64;
    // flops: fwd+bwd ~ 3x fwd, fwd = 2 * n * sum(in*out)
    let macs_actor: f64 = (72 * 512 + 512 * 256 + 256 * 128 + 128 * 12) as f64;
    let macs_critic: f64 = (290 * 512 + 512 * 256 + 256 * 128 + 128) as f64;
    let macs_t: f64 = (187 * 256 + 256 * 128 + 128 * 16) as f64;
    let flops = 3.0 * 2.0 * n as f64 * (macs_actor + macs_critic + macs_t);
    println!(
        "{name}: {:.1} ms per minibatch pass, ~{:.1} GFLOP/s (single thread)",
        dt * 1e3,
        flops / dt / 1e9
    );
}

fn main() {
    run::<f32>("f32");
    run::<f64>("f64");
}
