//! Trains the quantum policy in memory for a few episodes and prints the
//! per-episode metrics. Pass an episode count as the first argument.

use qmdrl::harness::ConfigBundle;
use qmdrl::training::{train_run, PolicyKind};

fn main() -> qmdrl::Result<()> {
    let episodes = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let mut bundle = ConfigBundle::default();
    bundle.train.episodes = episodes;
    let model = bundle.model(PolicyKind::Quantum)?;
    println!("training {} parameters per drone for {episodes} episodes", model.num_params());
    let outcome = train_run(&bundle.env, model.as_ref(), &bundle.train, 0, &mut ())?;
    for m in &outcome.metrics {
        println!(
            "episode {:>3}  reward {:7.3}  loss {:8.4}  support {:.3}  qos {:.3}  T {:.3}",
            m.episode, m.total_reward, m.mean_loss, m.support_rate, m.qos, m.temperature
        );
    }
    println!("{} trajectory frames recorded", outcome.frames.len());
    Ok(())
}
