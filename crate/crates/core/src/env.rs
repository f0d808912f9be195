//! Multi-drone coverage world.
//!
//! Drones move one cell per step on a bounded `width × height` plane and
//! serve every static user within `coverage_radius`. Each covered user is
//! credited to its nearest active drone (lowest id on ties). Scheduled
//! malfunctions freeze a drone in place and remove it from service.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `+y`, `−y`, `+x`, `−x`, hover.
pub const NUM_ACTIONS: usize = 5;
pub const ACTION_NAMES: [&str; NUM_ACTIONS] = ["north", "south", "east", "west", "hover"];
pub const NUM_SECTORS: usize = 8;

/// How users are placed at each reset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserPlacement {
    /// Fresh uniform draw every episode.
    PerEpisode,
    /// One draw on the first reset, reused afterwards.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub grid_width: usize,
    pub grid_height: usize,
    pub num_drones: usize,
    pub num_users: usize,
    pub coverage_radius: f64,
    pub steps_per_episode: usize,
    pub w_support: f64,
    pub w_qos: f64,
    /// `(timestep, drone_id)` pairs applied during training episodes.
    pub malfunction_schedule: Vec<(usize, usize)>,
    /// Schedule used instead of `malfunction_schedule` by greedy evaluation.
    pub eval_malfunction_schedule: Vec<(usize, usize)>,
    pub user_placement: UserPlacement,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            grid_width: 8,
            grid_height: 8,
            num_drones: 2,
            num_users: 12,
            coverage_radius: 2.5,
            steps_per_episode: 40,
            w_support: 0.7,
            w_qos: 0.3,
            malfunction_schedule: Vec::new(),
            eval_malfunction_schedule: vec![(20, 1)],
            user_placement: UserPlacement::PerEpisode,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| {
            Err(Error::InvalidConfig {
                key: format!("env.{key}"),
                reason,
            })
        };
        if self.grid_width == 0 || self.grid_height == 0 {
            return bad("grid_width", "grid dimensions must be positive".into());
        }
        if self.num_drones == 0 {
            return bad("num_drones", "need at least one drone".into());
        }
        if self.num_users == 0 {
            return bad("num_users", "need at least one user".into());
        }
        if !(self.coverage_radius > 0.0 && self.coverage_radius.is_finite()) {
            return bad("coverage_radius", format!("{} must be positive", self.coverage_radius));
        }
        if self.steps_per_episode == 0 {
            return bad("steps_per_episode", "must be positive".into());
        }
        if !(self.w_support >= 0.0 && self.w_qos >= 0.0) || self.w_support + self.w_qos == 0.0 {
            return bad(
                "w_support",
                "reward weights must be non-negative and not both zero".into(),
            );
        }
        for (key, schedule) in [
            ("malfunction_schedule", &self.malfunction_schedule),
            ("eval_malfunction_schedule", &self.eval_malfunction_schedule),
        ] {
            if let Some((t, id)) = schedule.iter().find(|(_, id)| *id >= self.num_drones) {
                return bad(key, format!("drone {id} at t = {t} does not exist"));
            }
        }
        Ok(())
    }

    /// Copy of this config with the evaluation malfunction schedule active.
    pub fn for_evaluation(&self) -> Self {
        Self {
            malfunction_schedule: self.eval_malfunction_schedule.clone(),
            ..self.clone()
        }
    }

    /// Observation length `2 + 2(M−1) + 8`.
    pub fn obs_dim(&self) -> usize {
        2 * self.num_drones + NUM_SECTORS
    }

    /// `(min, max)` of every observation entry.
    pub fn feature_bounds(&self) -> Vec<(f64, f64)> {
        let (w, h) = (self.grid_width as f64, self.grid_height as f64);
        let mut bounds = Vec::with_capacity(self.obs_dim());
        for _ in 0..self.num_drones {
            bounds.push((0.0, w));
            bounds.push((0.0, h));
        }
        bounds.extend(std::iter::repeat((0.0, self.num_users as f64)).take(NUM_SECTORS));
        bounds
    }
}

pub type Position = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub drone_positions: Vec<Position>,
    pub user_positions: Vec<Position>,
    pub malfunctioned: Vec<bool>,
    pub timestep: usize,
}

impl EnvState {
    pub fn active_drones(&self) -> impl Iterator<Item = (usize, &Position)> {
        self.drone_positions
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.malfunctioned[*i])
    }

    pub fn is_done(&self, config: &EnvConfig) -> bool {
        self.timestep >= config.steps_per_episode
    }
}

pub fn distance(a: &Position, b: &Position) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Drones evenly spaced along the bottom edge.
pub fn initial_drone_positions(config: &EnvConfig) -> Vec<Position> {
    let m = config.num_drones as f64;
    (0..config.num_drones)
        .map(|i| [config.grid_width as f64 * (i as f64 + 1.0) / (m + 1.0), 0.0])
        .collect()
}

/// Serving drone of each user: the nearest active drone within range.
pub fn assignments(state: &EnvState, config: &EnvConfig) -> Vec<Option<usize>> {
    state
        .user_positions
        .iter()
        .map(|u| {
            let mut best: Option<(usize, f64)> = None;
            for (i, p) in state.active_drones() {
                let d = distance(u, p);
                if d <= config.coverage_radius && best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            best.map(|(i, _)| i)
        })
        .collect()
}

fn user_quality(user: &Position, state: &EnvState, config: &EnvConfig) -> f64 {
    state
        .active_drones()
        .map(|(_, p)| (1.0 - distance(user, p) / config.coverage_radius).max(0.0))
        .fold(0.0, f64::max)
}

/// Fraction of users within range of at least one active drone.
pub fn support_rate(state: &EnvState, config: &EnvConfig) -> f64 {
    if state.user_positions.is_empty() {
        return 0.0;
    }
    let covered = assignments(state, config).iter().filter(|a| a.is_some()).count();
    covered as f64 / state.user_positions.len() as f64
}

/// Mean over users of `max(0, 1 − dist/ρ)` to the best active drone.
pub fn qos(state: &EnvState, config: &EnvConfig) -> f64 {
    if state.user_positions.is_empty() {
        return 0.0;
    }
    let total: f64 = state
        .user_positions
        .iter()
        .map(|u| user_quality(u, state, config))
        .sum();
    total / state.user_positions.len() as f64
}

/// Per-drone reward: `w_support · served/U + w_qos · mean quality of served users`.
pub fn reward(state: &EnvState, config: &EnvConfig) -> Vec<f64> {
    let m = state.drone_positions.len();
    let u = state.user_positions.len();
    let mut served = vec![0usize; m];
    let mut quality = vec![0.0; m];
    for (user, a) in state.user_positions.iter().zip(assignments(state, config)) {
        if let Some(i) = a {
            served[i] += 1;
            quality[i] += (1.0 - distance(user, &state.drone_positions[i]) / config.coverage_radius)
                .max(0.0);
        }
    }
    (0..m)
        .map(|i| {
            if state.malfunctioned[i] || served[i] == 0 {
                return 0.0;
            }
            config.w_support * served[i] as f64 / u as f64
                + config.w_qos * quality[i] / served[i] as f64
        })
        .collect()
}

/// Sector of the direction `(dx, dy)`: eight 45° wedges counter-clockwise
/// from `+x`, each closed at its lower edge.
pub fn sector_of(dx: f64, dy: f64) -> usize {
    let mut angle = dy.atan2(dx);
    if angle < 0.0 {
        angle += std::f64::consts::TAU;
    }
    ((angle / std::f64::consts::FRAC_PI_4) as usize).min(NUM_SECTORS - 1)
}

/// Observation of drone `agent_id`: own position, the other drones' positions
/// in id order, then unserved-user counts per sector.
pub fn observe(state: &EnvState, agent_id: usize, config: &EnvConfig) -> Result<Vec<f64>> {
    let m = state.drone_positions.len();
    if agent_id >= m {
        return Err(invalid(format!("agent {agent_id} out of range for {m} drones")));
    }
    let own = state.drone_positions[agent_id];
    let mut obs = Vec::with_capacity(2 * m + NUM_SECTORS);
    obs.extend_from_slice(&own);
    for (i, p) in state.drone_positions.iter().enumerate() {
        if i != agent_id {
            obs.extend_from_slice(p);
        }
    }
    let mut sectors = [0.0; NUM_SECTORS];
    for (user, a) in state.user_positions.iter().zip(assignments(state, config)) {
        if a.is_none() {
            sectors[sector_of(user[0] - own[0], user[1] - own[1])] += 1.0;
        }
    }
    obs.extend_from_slice(&sectors);
    Ok(obs)
}

pub fn observe_all(state: &EnvState, config: &EnvConfig) -> Vec<Vec<f64>> {
    (0..state.drone_positions.len())
        .map(|i| observe(state, i, config).expect("agent id in range"))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub support_rate: f64,
    pub qos: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: EnvState,
    pub observations: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub metrics: StepMetrics,
}

/// Applies one joint action and advances the clock.
pub fn step(state: &EnvState, joint_action: &[usize], config: &EnvConfig) -> Result<StepOutcome> {
    if state.timestep >= config.steps_per_episode {
        return Err(Error::EpisodeFinished(state.timestep));
    }
    let m = state.drone_positions.len();
    if joint_action.len() != m {
        return Err(invalid(format!("{} actions for {m} drones", joint_action.len())));
    }
    if let Some(a) = joint_action.iter().find(|a| **a >= NUM_ACTIONS) {
        return Err(invalid(format!("action {a} outside 0..{NUM_ACTIONS}")));
    }
    let (w, h) = (config.grid_width as f64, config.grid_height as f64);
    let mut next = state.clone();
    for (i, &a) in joint_action.iter().enumerate() {
        if next.malfunctioned[i] {
            continue;
        }
        let p = &mut next.drone_positions[i];
        match a {
            0 => p[1] = (p[1] + 1.0).min(h),
            1 => p[1] = (p[1] - 1.0).max(0.0),
            2 => p[0] = (p[0] + 1.0).min(w),
            3 => p[0] = (p[0] - 1.0).max(0.0),
            _ => {}
        }
    }
    next.timestep += 1;
    for &(t, id) in &config.malfunction_schedule {
        if t == next.timestep {
            next.malfunctioned[id] = true;
        }
    }
    let observations = observe_all(&next, config);
    let rewards = reward(&next, config);
    let metrics = StepMetrics {
        support_rate: support_rate(&next, config),
        qos: qos(&next, config),
    };
    Ok(StepOutcome {
        state: next,
        observations,
        rewards,
        metrics,
    })
}

/// Episode source owning the user-placement random stream.
#[derive(Clone, Debug)]
pub struct DroneEnv {
    config: EnvConfig,
    rng: ChaCha8Rng,
    fixed_users: Option<Vec<Position>>,
}

impl DroneEnv {
    pub fn new(config: EnvConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            fixed_users: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    fn sample_users(&mut self) -> Vec<Position> {
        let (w, h) = (self.config.grid_width as f64, self.config.grid_height as f64);
        (0..self.config.num_users)
            .map(|_| {
                let x: f64 = self.rng.sample(Open01);
                let y: f64 = self.rng.sample(Open01);
                [x * w, y * h]
            })
            .collect()
    }

    /// Starts a new episode.
    pub fn reset(&mut self) -> (EnvState, Vec<Vec<f64>>) {
        let users = match self.config.user_placement {
            UserPlacement::PerEpisode => self.sample_users(),
            UserPlacement::Fixed => {
                if self.fixed_users.is_none() {
                    self.fixed_users = Some(self.sample_users());
                }
                self.fixed_users.clone().unwrap()
            }
        };
        let state = EnvState {
            drone_positions: initial_drone_positions(&self.config),
            user_positions: users,
            malfunctioned: vec![false; self.config.num_drones],
            timestep: 0,
        };
        let obs = observe_all(&state, &self.config);
        (state, obs)
    }

    pub fn step(&self, state: &EnvState, joint_action: &[usize]) -> Result<StepOutcome> {
        step(state, joint_action, &self.config)
    }
}

pub fn reset(config: &EnvConfig, seed: u64) -> Result<(EnvState, Vec<Vec<f64>>)> {
    Ok(DroneEnv::new(config.clone(), seed)?.reset())
}

/// Snapshot of one step for trajectory logs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub episode: usize,
    pub timestep: usize,
    pub drone_positions: Vec<Position>,
    pub malfunctioned: Vec<bool>,
    pub user_positions: Vec<Position>,
    pub covered: Vec<bool>,
    /// Serving drone of each user, if any.
    pub serving: Vec<Option<usize>>,
    pub support_rate: f64,
    pub qos: f64,
    pub rewards: Vec<f64>,
}

impl Frame {
    pub fn capture(episode: usize, state: &EnvState, config: &EnvConfig, rewards: Vec<f64>) -> Self {
        let serving = assignments(state, config);
        Self {
            episode,
            timestep: state.timestep,
            drone_positions: state.drone_positions.clone(),
            malfunctioned: state.malfunctioned.clone(),
            user_positions: state.user_positions.clone(),
            covered: serving.iter().map(Option::is_some).collect(),
            serving,
            support_rate: support_rate(state, config),
            qos: qos(state, config),
            rewards,
        }
    }
}
