//! Runs quantum, classical and random policies through the harness, prints
//! the comparison table and writes a reward plot. Artifacts go under
//! `runs/example/` unless a directory is given as the first argument.

use std::path::PathBuf;

use qmdrl::harness::{compare, plot, run, ConfigBundle, Metric, RunPolicy};

fn main() -> qmdrl::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs/example"));
    let mut bundle = ConfigBundle::default();
    bundle.train.episodes = 30;
    bundle.train.summary_window = 10;

    for (id, policy) in [
        ("quantum", RunPolicy::Quantum),
        ("classical", RunPolicy::Classical),
        ("random", RunPolicy::Random),
    ] {
        let s = run(&bundle, policy, 1, id, &root)?;
        println!("{id:<10} done, final-window reward {:.3}", s.total_reward.mean);
    }
    print!("{}", compare(&root, &["quantum", "classical", "random"])?);
    let out = root.join("reward.svg");
    plot(&root, &["quantum", "classical", "random"], Metric::Reward, 5, &out)?;
    println!("plot written to {}", out.display());
    Ok(())
}
