use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::artifacts::*;
use super::config::ConfigBundle;
use crate::env::{distance, Frame, Position};
use crate::error::{invalid, io_err, Error, Result};
use crate::training::{evaluate_greedy, train_run, EpisodeMetrics, PolicyKind};

pub const EVAL_SUMMARY_FILE: &str = "eval.json";
pub const EVAL_TRAJECTORY_FILE: &str = "eval_trajectories.jsonl";

/// Mixed into the training seed so evaluation episodes never replay
/// training episodes.
pub const EVAL_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// What a run trains. `Random` keeps the quantum model but samples uniformly
/// and never updates it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunPolicy {
    Quantum,
    Classical,
    Random,
}

impl RunPolicy {
    fn model_kind(self) -> PolicyKind {
        match self {
            RunPolicy::Classical => PolicyKind::Classical,
            RunPolicy::Quantum | RunPolicy::Random => PolicyKind::Quantum,
        }
    }
}

impl fmt::Display for RunPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunPolicy::Quantum => "quantum",
            RunPolicy::Classical => "classical",
            RunPolicy::Random => "random",
        })
    }
}

impl FromStr for RunPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(RunPolicy::Quantum),
            "classical" => Ok(RunPolicy::Classical),
            "random" => Ok(RunPolicy::Random),
            other => Err(invalid(format!(
                "unknown policy `{other}` (expected quantum, classical or random)"
            ))),
        }
    }
}

pub fn run_dir(root: &Path, run_id: &str) -> Result<PathBuf> {
    let ok = !run_id.is_empty()
        && run_id != "."
        && run_id != ".."
        && run_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if !ok {
        return Err(invalid(format!("bad run id `{run_id}`")));
    }
    Ok(root.join(run_id))
}

/// Trains one run and writes its directory under `root`.
///
/// A training failure still leaves a summary with `status = failed` and the
/// metrics prefix on disk before the error is returned.
pub fn run(
    bundle: &ConfigBundle,
    policy: RunPolicy,
    seed: u64,
    run_id: &str,
    root: &Path,
) -> Result<Summary> {
    bundle.validate()?;
    let dir = run_dir(root, run_id)?;
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let cpath = dir.join(CONFIG_FILE);
    fs::write(&cpath, bundle.to_toml_string()).map_err(io_err(&cpath))?;

    let model = bundle.model(policy.model_kind())?;
    let train = match policy {
        RunPolicy::Random => bundle.train.random_policy(),
        _ => bundle.train.clone(),
    };
    let param_count = match policy {
        RunPolicy::Random => 0,
        _ => model.num_params(),
    };
    let mut writer = RunWriter::create(&dir, bundle.env.num_drones)?;
    let result = train_run(&bundle.env, model.as_ref(), &train, seed, &mut writer);
    drop(writer);

    let (metrics, status, error) = match &result {
        Ok(outcome) => (outcome.metrics.clone(), RunStatus::Completed, None),
        Err(e) => (
            read_metrics(&dir.join(METRICS_FILE))?,
            RunStatus::Failed,
            Some(e.to_string()),
        ),
    };
    let summary = summarize(run_id, policy, seed, status, error, param_count, &metrics, train.summary_window);
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    let outcome = result?;
    let params: Vec<&Vec<f64>> = outcome.learners.iter().map(|l| &l.actor_params).collect();
    write_json(&dir.join(PARAMS_FILE), &params)?;
    Ok(summary)
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    run_id: &str,
    policy: RunPolicy,
    seed: u64,
    status: RunStatus,
    error: Option<String>,
    param_count: usize,
    metrics: &[EpisodeMetrics],
    window: usize,
) -> Summary {
    let stats = WindowStats::of(metrics, window);
    Summary {
        run_id: run_id.to_string(),
        policy: policy.to_string(),
        seed,
        status,
        error,
        param_count,
        episodes: metrics.len(),
        window,
        total_reward: stats.total_reward,
        support_rate: stats.support_rate,
        qos: stats.qos,
    }
}

/// A run directory loaded back from disk.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub config: ConfigBundle,
    pub summary: Summary,
    pub metrics: Vec<EpisodeMetrics>,
}

pub fn load_run(root: &Path, run_id: &str) -> Result<LoadedRun> {
    let dir = run_dir(root, run_id)?;
    if !dir.is_dir() {
        return Err(invalid(format!("no run `{run_id}` under {}", root.display())));
    }
    let config = super::config::load_config(dir.join(CONFIG_FILE))?;
    let summary: Summary = read_json(&dir.join(SUMMARY_FILE))?;
    let metrics = read_metrics(&dir.join(METRICS_FILE))?;
    Ok(LoadedRun {
        dir,
        config,
        summary,
        metrics,
    })
}

/// How the surviving drones reacted to a malfunction.
///
/// For each evaluation episode, the centroid of the users the failing drone
/// served just before it failed is the target; the recorded distances are
/// from the nearest surviving drone to that centroid at the failure step and
/// at the end of the episode, averaged over episodes where the failing drone
/// served anyone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MalfunctionResponse {
    pub drone: usize,
    pub timestep: usize,
    pub episodes_used: usize,
    pub distance_at_failure: f64,
    pub distance_at_end: f64,
}

impl MalfunctionResponse {
    pub fn approached(&self) -> bool {
        self.episodes_used > 0 && self.distance_at_end < self.distance_at_failure
    }
}

fn centroid(points: &[Position]) -> Option<Position> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
    Some([sx / n, sy / n])
}

fn nearest_survivor(frame: &Frame, target: &Position) -> Option<f64> {
    frame
        .drone_positions
        .iter()
        .zip(&frame.malfunctioned)
        .filter(|(_, down)| !**down)
        .map(|(p, _)| distance(p, target))
        .min_by(f64::total_cmp)
}

/// Measures the response to drone `drone` failing at `timestep` over
/// frames grouped by episode (as written by evaluation).
pub fn malfunction_response(frames: &[Frame], drone: usize, timestep: usize) -> Result<MalfunctionResponse> {
    if timestep == 0 {
        return Err(invalid("malfunction timestep must be positive"));
    }
    let mut episodes: Vec<usize> = frames.iter().map(|f| f.episode).collect();
    episodes.dedup();
    let (mut start, mut end, mut used) = (0.0, 0.0, 0);
    for ep in episodes {
        let ep_frames: Vec<&Frame> = frames.iter().filter(|f| f.episode == ep).collect();
        let at = |t: usize| ep_frames.iter().copied().find(|f| f.timestep == t);
        let (Some(before), Some(failed), Some(last)) = (
            at(timestep - 1),
            at(timestep),
            ep_frames.iter().copied().max_by_key(|f| f.timestep),
        ) else {
            continue;
        };
        let served: Vec<Position> = before
            .user_positions
            .iter()
            .zip(&before.serving)
            .filter(|(_, s)| **s == Some(drone))
            .map(|(p, _)| *p)
            .collect();
        let Some(target) = centroid(&served) else {
            continue;
        };
        let (Some(d0), Some(d1)) = (nearest_survivor(failed, &target), nearest_survivor(last, &target)) else {
            continue;
        };
        start += d0;
        end += d1;
        used += 1;
    }
    let n = used.max(1) as f64;
    Ok(MalfunctionResponse {
        drone,
        timestep,
        episodes_used: used,
        distance_at_failure: if used > 0 { start / n } else { f64::NAN },
        distance_at_end: if used > 0 { end / n } else { f64::NAN },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub run_id: String,
    pub policy: String,
    pub episodes: usize,
    pub seed: u64,
    pub total_reward: MeanStd,
    pub support_rate: MeanStd,
    pub qos: MeanStd,
    pub malfunctions: Vec<MalfunctionResponse>,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "run {} ({}), {} greedy episodes", self.run_id, self.policy, self.episodes)?;
        writeln!(f, "  total reward  {:.4} ± {:.4}", self.total_reward.mean, self.total_reward.std)?;
        writeln!(f, "  support rate  {:.4} ± {:.4}", self.support_rate.mean, self.support_rate.std)?;
        writeln!(f, "  qos           {:.4} ± {:.4}", self.qos.mean, self.qos.std)?;
        for m in &self.malfunctions {
            writeln!(
                f,
                "  drone {} down at t={}: survivor distance {:.3} -> {:.3} over {} episodes",
                m.drone, m.timestep, m.distance_at_failure, m.distance_at_end, m.episodes_used
            )?;
        }
        Ok(())
    }
}

/// Greedy evaluation of a trained run with the evaluation malfunction
/// schedule enabled. Writes `eval.json` and `eval_trajectories.jsonl`.
pub fn eval(root: &Path, run_id: &str, episodes: usize) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(invalid("episodes must be positive"));
    }
    let loaded = load_run(root, run_id)?;
    let summary = &loaded.summary;
    if summary.status != RunStatus::Completed {
        return Err(invalid(format!("run `{run_id}` did not complete")));
    }
    let kind: PolicyKind = match summary.policy.parse::<RunPolicy>()? {
        RunPolicy::Random => return Err(invalid("random-policy runs have nothing to evaluate")),
        p => p.model_kind(),
    };
    let params: Vec<Vec<f64>> = read_json(&loaded.dir.join(PARAMS_FILE))?;
    let model = loaded.config.model(kind)?;
    let env = loaded.config.env.for_evaluation();
    let seed = summary.seed ^ EVAL_SEED_SALT;
    let outcome = evaluate_greedy(&env, model.as_ref(), &params, episodes, seed)?;

    let stats = WindowStats::of(&outcome.metrics, episodes);
    let malfunctions = env
        .malfunction_schedule
        .iter()
        .map(|&(t, drone)| malfunction_response(&outcome.frames, drone, t))
        .collect::<Result<_>>()?;
    let report = EvalReport {
        run_id: run_id.to_string(),
        policy: summary.policy.clone(),
        episodes,
        seed,
        total_reward: stats.total_reward,
        support_rate: stats.support_rate,
        qos: stats.qos,
        malfunctions,
    };
    write_frames(&loaded.dir.join(EVAL_TRAJECTORY_FILE), &outcome.frames)?;
    write_json(&loaded.dir.join(EVAL_SUMMARY_FILE), &report)?;
    Ok(report)
}
