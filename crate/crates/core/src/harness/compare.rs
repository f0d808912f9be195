use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::artifacts::{MeanStd, WindowStats};
use super::run::load_run;
use crate::error::{invalid, Result};

/// One column of a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunColumn {
    pub run_id: String,
    pub policy: String,
    pub seed: u64,
    pub param_count: usize,
    pub total_reward: MeanStd,
    pub support_rate: MeanStd,
    pub qos: MeanStd,
}

/// Final-window statistics of several runs side by side, in the order given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub episodes: usize,
    pub window: usize,
    pub runs: Vec<RunColumn>,
}

impl ComparisonReport {
    /// Smallest quantum parameter count over the largest classical one, when
    /// both kinds are present.
    pub fn param_ratio(&self) -> Option<f64> {
        let counts = |policy: &'static str| {
            self.runs
                .iter()
                .filter(move |r| r.policy == policy)
                .map(|r| r.param_count)
        };
        let q = counts("quantum").min()?;
        let c = counts("classical").max()?;
        Some(q as f64 / c as f64)
    }
}

pub fn compare(root: &Path, run_ids: &[&str]) -> Result<ComparisonReport> {
    if run_ids.len() < 2 {
        return Err(invalid("compare needs at least two runs"));
    }
    let mut episodes = None;
    let mut window = 0;
    let mut runs = Vec::with_capacity(run_ids.len());
    for id in run_ids {
        let run = load_run(root, id)?;
        let n = run.metrics.len();
        match episodes {
            None => episodes = Some(n),
            Some(e) if e != n => {
                return Err(invalid(format!(
                    "run `{id}` has {n} episodes, `{}` has {e}",
                    run_ids[0]
                )))
            }
            _ => {}
        }
        window = run.summary.window;
        let stats = WindowStats::of(&run.metrics, run.summary.window);
        runs.push(RunColumn {
            run_id: run.summary.run_id,
            policy: run.summary.policy,
            seed: run.summary.seed,
            param_count: run.summary.param_count,
            total_reward: stats.total_reward,
            support_rate: stats.support_rate,
            qos: stats.qos,
        });
    }
    Ok(ComparisonReport {
        episodes: episodes.unwrap_or(0),
        window,
        runs,
    })
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .runs
            .iter()
            .map(|r| r.run_id.len())
            .max()
            .unwrap_or(0)
            .max(17);
        let row = |f: &mut fmt::Formatter<'_>, label: &str, cells: Vec<String>| {
            write!(f, "{label:<14}")?;
            for c in cells {
                write!(f, " {c:>width$}")?;
            }
            writeln!(f)
        };
        let pm = |m: &MeanStd| format!("{:.4} ± {:.4}", m.mean, m.std);
        writeln!(f, "final {} of {} episodes", self.window.min(self.episodes), self.episodes)?;
        row(f, "run", self.runs.iter().map(|r| r.run_id.clone()).collect())?;
        row(f, "policy", self.runs.iter().map(|r| r.policy.clone()).collect())?;
        row(f, "seed", self.runs.iter().map(|r| r.seed.to_string()).collect())?;
        row(f, "params", self.runs.iter().map(|r| r.param_count.to_string()).collect())?;
        row(f, "total_reward", self.runs.iter().map(|r| pm(&r.total_reward)).collect())?;
        row(f, "support_rate", self.runs.iter().map(|r| pm(&r.support_rate)).collect())?;
        row(f, "qos", self.runs.iter().map(|r| pm(&r.qos)).collect())?;
        if let Some(ratio) = self.param_ratio() {
            writeln!(f, "quantum/classical params: {ratio:.4}")?;
        }
        Ok(())
    }
}
