//! Trains a short quantum run, then evaluates it greedily with drone 1
//! failing halfway through each episode and reports how the survivor moved
//! relative to the users drone 1 had been serving.

use std::path::PathBuf;

use qmdrl::harness::{eval, run, ConfigBundle, RunPolicy};

fn main() -> qmdrl::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs/example"));
    let mut bundle = ConfigBundle::default();
    bundle.train.episodes = 20;
    run(&bundle, RunPolicy::Quantum, 3, "malfunction", &root)?;
    let report = eval(&root, "malfunction", 10)?;
    print!("{report}");
    for m in &report.malfunctions {
        println!(
            "survivor {} the failed drone's users",
            if m.approached() { "moved toward" } else { "did not close in on" }
        );
    }
    Ok(())
}
