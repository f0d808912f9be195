//! The data re-uploading Q-policy at the default shape: encoding plan, gate
//! list, observables, Q-values and the softmax over them.

use qmdrl::env::{reset, EnvConfig, ACTION_NAMES};
use qmdrl::harness::ConfigBundle;
use qmdrl::qpolicy::{action_distribution, argmax, QPolicy, QPolicyParams, Slot};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qmdrl::Result<()> {
    let bundle = ConfigBundle::default();
    let policy = QPolicy::new(bundle.quantum_config())?;
    let cfg = policy.config();
    println!(
        "q = {}, d = {}, repetitions = {}, params = {}",
        cfg.num_qubits,
        cfg.obs_dim,
        cfg.repetitions(),
        policy.param_count()
    );
    for (j, chunk) in policy.plan().chunks.iter().enumerate() {
        let slots: Vec<String> = chunk
            .iter()
            .map(|s| match s {
                Slot::Feature(i) => format!("x{i}"),
                Slot::Pad => "pad".into(),
            })
            .collect();
        println!("  upload {j}: [{}]", slots.join(", "));
    }

    let (_, obs) = reset(&EnvConfig::default(), 7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = QPolicyParams::random(cfg, 1.0, &mut rng);
    let circuit = policy.circuit(&params, &obs[0])?;
    println!("circuit has {} gates; first five:", circuit.len());
    for g in circuit.iter().take(5) {
        println!("  {g}");
    }

    let z = policy.forward(&params, &obs[0])?;
    let q = policy.q_values(&params, &obs[0])?;
    let dist = action_distribution(&q, 1.0)?;
    for a in 0..z.len() {
        println!(
            "  {:<6} <Z> = {:+.4}  Q = {:+.4}  p(T=1) = {:.4}",
            ACTION_NAMES[a], z[a], q[a], dist[a]
        );
    }
    println!("greedy action: {}", ACTION_NAMES[argmax(&q)]);
    Ok(())
}
