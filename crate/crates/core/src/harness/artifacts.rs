//! On-disk layout of a run directory.
//!
//! ```text
//! <root>/<run_id>/
//!   config.toml        config snapshot
//!   metrics.csv        one row per episode
//!   trajectories.jsonl one frame object per line
//!   summary.json       final-window aggregates and status
//!   params.json        trained parameters per agent
//! ```

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::Frame;
use crate::error::{io_err, Error, Result};
use crate::training::{EpisodeMetrics, EpisodeSink};

pub const CONFIG_FILE: &str = "config.toml";
pub const METRICS_FILE: &str = "metrics.csv";
pub const TRAJECTORY_FILE: &str = "trajectories.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PARAMS_FILE: &str = "params.json";

/// Column list of `metrics.csv` for `num_agents` drones.
pub fn metrics_header(num_agents: usize) -> Vec<String> {
    let mut cols = vec!["episode".to_string(), "total_reward".to_string()];
    cols.extend((0..num_agents).map(|i| format!("reward_agent_{i}")));
    cols.extend(["mean_loss", "support_rate", "qos", "temperature"].map(String::from));
    cols
}

/// Floats are written in shortest round-trip form so the table reloads exactly.
pub fn metrics_row(m: &EpisodeMetrics) -> String {
    let mut fields = vec![m.episode.to_string(), m.total_reward.to_string()];
    fields.extend(m.agent_rewards.iter().map(f64::to_string));
    fields.extend([m.mean_loss, m.support_rate, m.qos, m.temperature].map(|v| v.to_string()));
    fields.join(",")
}

pub fn parse_metrics(text: &str, path: &Path) -> Result<Vec<EpisodeMetrics>> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        reason: format!("line {line}: {reason}"),
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?
        .split(',')
        .collect();
    if header.len() < 6 {
        return Err(parse_err(1, "header too short".into()));
    }
    let agents = header.len() - 6;
    let expected = metrics_header(agents);
    if header != expected {
        return Err(parse_err(1, format!("unexpected header {header:?}")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(parse_err(i + 2, format!("{} fields", fields.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| parse_err(i + 2, format!("`{s}`: {e}")))
            };
            let tail = &fields[2 + agents..];
            Ok(EpisodeMetrics {
                episode: fields[0]
                    .parse()
                    .map_err(|e| parse_err(i + 2, format!("episode: {e}")))?,
                total_reward: num(fields[1])?,
                agent_rewards: fields[2..2 + agents]
                    .iter()
                    .map(|s| num(s))
                    .collect::<Result<_>>()?,
                mean_loss: num(tail[0])?,
                support_rate: num(tail[1])?,
                qos: num(tail[2])?,
                temperature: num(tail[3])?,
            })
        })
        .collect()
}

pub fn read_metrics(path: &Path) -> Result<Vec<EpisodeMetrics>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_metrics(&text, path)
}

pub fn read_frames(path: &Path) -> Result<Vec<Frame>> {
    let file = File::open(path).map_err(io_err(path))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let line = line.map_err(io_err(path))?;
            serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                reason: format!("line {}: {e}", i + 1),
            })
        })
        .collect()
}

pub fn write_frames(path: &Path, frames: &[Frame]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for f in frames {
        let line = serde_json::to_string(f).expect("frames serialize");
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Mean and population standard deviation. NaN (no data) is stored as `null`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    #[serde(deserialize_with = "nan_from_null")]
    pub mean: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub std: f64,
}

fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed,
}

/// Final-window aggregates of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub run_id: String,
    pub policy: String,
    pub seed: u64,
    pub status: RunStatus,
    pub error: Option<String>,
    pub param_count: usize,
    pub episodes: usize,
    pub window: usize,
    pub total_reward: MeanStd,
    pub support_rate: MeanStd,
    pub qos: MeanStd,
}

/// Aggregates over the last `window` episodes (all of them if fewer).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowStats {
    pub total_reward: MeanStd,
    pub support_rate: MeanStd,
    pub qos: MeanStd,
}

impl WindowStats {
    pub fn of(metrics: &[EpisodeMetrics], window: usize) -> Self {
        let tail = &metrics[metrics.len().saturating_sub(window)..];
        let col = |f: fn(&EpisodeMetrics) -> f64| tail.iter().map(f).collect::<Vec<_>>();
        Self {
            total_reward: MeanStd::of(&col(|m| m.total_reward)),
            support_rate: MeanStd::of(&col(|m| m.support_rate)),
            qos: MeanStd::of(&col(|m| m.qos)),
        }
    }
}

/// Streams metrics rows and trajectory frames into a run directory,
/// flushing after every episode.
pub struct RunWriter {
    dir: PathBuf,
    metrics: BufWriter<File>,
    frames: BufWriter<File>,
}

impl RunWriter {
    pub fn create(dir: &Path, num_agents: usize) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mpath = dir.join(METRICS_FILE);
        let mut metrics = BufWriter::new(File::create(&mpath).map_err(io_err(&mpath))?);
        writeln!(metrics, "{}", metrics_header(num_agents).join(",")).map_err(io_err(&mpath))?;
        metrics.flush().map_err(io_err(&mpath))?;
        let fpath = dir.join(TRAJECTORY_FILE);
        let frames = BufWriter::new(File::create(&fpath).map_err(io_err(&fpath))?);
        Ok(Self {
            dir: dir.to_path_buf(),
            metrics,
            frames,
        })
    }
}

impl EpisodeSink for RunWriter {
    fn episode(&mut self, metrics: &EpisodeMetrics, frames: &[Frame]) -> Result<()> {
        let mpath = self.dir.join(METRICS_FILE);
        writeln!(self.metrics, "{}", metrics_row(metrics)).map_err(io_err(&mpath))?;
        self.metrics.flush().map_err(io_err(&mpath))?;
        let fpath = self.dir.join(TRAJECTORY_FILE);
        for f in frames {
            let line = serde_json::to_string(f).expect("frames serialize");
            writeln!(self.frames, "{line}").map_err(io_err(&fpath))?;
        }
        self.frames.flush().map_err(io_err(&fpath))
    }
}
