//! Independent per-agent Q-learning with hard-copied target networks.
//!
//! Every environment step produces one transition; each agent immediately
//! regresses its actor Q-value for the taken action onto the TD target
//! computed from its own target network, then takes one SGD step.

mod gradient;
mod model;

pub use gradient::{grad_sdq, parameter_shift_grad, sgd_step, sgd_step_in_place};
pub use model::{ClassicalModel, PolicyKind, QuantumModel, ValueModel};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{DroneEnv, EnvConfig, Frame};
use crate::error::{invalid, Error, Result};
use crate::qpolicy::{action_distribution, argmax, select_action, ActionMode};

/// Temperature used to emulate a uniformly random policy.
pub const RANDOM_POLICY_TEMPERATURE: f64 = 1e9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub discount: f64,
    pub learning_rate: f64,
    pub sdq_epsilon: f64,
    pub target_update_interval: usize,
    pub temperature_initial: f64,
    pub temperature_final: f64,
    /// Share of all training steps over which the temperature decays linearly.
    pub temperature_decay_fraction: f64,
    pub episodes: usize,
    /// Half-width of the uniform range quantum angles are initialized from.
    pub init_spread: f64,
    /// Record trajectory frames every this many episodes (the final episode is
    /// always recorded); 0 records only the final episode.
    pub trajectory_every: usize,
    /// Final-window size for run summaries.
    pub summary_window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            discount: 0.95,
            learning_rate: 0.01,
            sdq_epsilon: 0.01,
            target_update_interval: 200,
            temperature_initial: 2.0,
            temperature_final: 0.1,
            temperature_decay_fraction: 0.6,
            episodes: 200,
            init_spread: 0.1,
            trajectory_every: 50,
            summary_window: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| {
            Err(Error::InvalidConfig {
                key: format!("train.{key}"),
                reason,
            })
        };
        if !(0.0..1.0).contains(&self.discount) {
            return bad("discount", format!("{} is outside [0, 1)", self.discount));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", format!("{} must be non-negative", self.learning_rate));
        }
        if !(self.sdq_epsilon > 0.0) {
            return bad("sdq_epsilon", format!("{} must be positive", self.sdq_epsilon));
        }
        if self.target_update_interval == 0 {
            return bad("target_update_interval", "must be at least 1".into());
        }
        if !(self.temperature_initial > 0.0 && self.temperature_final > 0.0) {
            return bad("temperature_initial", "temperatures must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.temperature_decay_fraction) {
            return bad(
                "temperature_decay_fraction",
                format!("{} is outside [0, 1]", self.temperature_decay_fraction),
            );
        }
        if !(self.init_spread >= 0.0) {
            return bad("init_spread", "must be non-negative".into());
        }
        if self.summary_window == 0 {
            return bad("summary_window", "must be at least 1".into());
        }
        Ok(())
    }

    /// Same schedule with learning switched off and uniform exploration.
    pub fn random_policy(&self) -> Self {
        Self {
            learning_rate: 0.0,
            temperature_initial: RANDOM_POLICY_TEMPERATURE,
            temperature_final: RANDOM_POLICY_TEMPERATURE,
            ..self.clone()
        }
    }

    /// Exploration temperature at global step `step` of `total_steps`.
    pub fn temperature_at(&self, step: usize, total_steps: usize) -> f64 {
        let decay = (self.temperature_decay_fraction * total_steps as f64).round();
        if decay < 1.0 || step as f64 >= decay {
            return self.temperature_final;
        }
        let t = step as f64 / decay;
        self.temperature_initial + (self.temperature_final - self.temperature_initial) * t
    }
}

/// One environment step for all agents.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_observations: Vec<Vec<f64>>,
    pub terminal: bool,
}

impl Transition {
    pub fn validate(&self, num_actions: usize) -> Result<()> {
        let m = self.observations.len();
        if self.actions.len() != m || self.rewards.len() != m || self.next_observations.len() != m {
            return Err(invalid("transition lists differ in length"));
        }
        if let Some(a) = self.actions.iter().find(|a| **a >= num_actions) {
            return Err(invalid(format!("action {a} outside 0..{num_actions}")));
        }
        Ok(())
    }
}

/// Actor and target parameters of one agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentLearner {
    pub agent_id: usize,
    pub actor_params: Vec<f64>,
    pub target_params: Vec<f64>,
    pub steps_since_target_update: usize,
}

impl AgentLearner {
    pub fn new(agent_id: usize, params: Vec<f64>) -> Self {
        Self {
            agent_id,
            target_params: params.clone(),
            actor_params: params,
            steps_since_target_update: 0,
        }
    }
}

/// Counts one update and hard-copies the actor into the target every
/// `interval` calls.
pub fn maybe_update_target(learner: &mut AgentLearner, interval: usize) {
    learner.steps_since_target_update += 1;
    if learner.steps_since_target_update >= interval.max(1) {
        learner.target_params.clone_from(&learner.actor_params);
        learner.steps_since_target_update = 0;
    }
}

/// `reward` on terminal steps, otherwise `reward + γ · max_a Q_target(next_obs, a)`.
pub fn td_target(
    reward: f64,
    next_obs: &[f64],
    model: &dyn ValueModel,
    target_params: &[f64],
    discount: f64,
    terminal: bool,
) -> Result<f64> {
    if terminal {
        return Ok(reward);
    }
    let q = model.q_values(target_params, next_obs)?;
    let best = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(reward + discount * best)
}

/// One regression example: observation, taken action, TD target.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub obs: Vec<f64>,
    pub action: usize,
    pub target: f64,
}

/// Mean squared error between actor Q-values of the taken actions and their targets.
pub fn loss(model: &dyn ValueModel, actor_params: &[f64], batch: &[Sample]) -> Result<f64> {
    if batch.is_empty() {
        return Err(invalid("loss over an empty batch"));
    }
    let mut total = 0.0;
    for s in batch {
        let q = model.q_values(actor_params, &s.obs)?;
        let pred = *q
            .get(s.action)
            .ok_or_else(|| invalid(format!("action {} outside 0..{}", s.action, q.len())))?;
        total += (pred - s.target).powi(2);
    }
    Ok(total / batch.len() as f64)
}

/// Aggregates of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub total_reward: f64,
    pub agent_rewards: Vec<f64>,
    /// Mean single-transition loss over all agent updates in the episode.
    pub mean_loss: f64,
    /// Mean over the episode's steps.
    pub support_rate: f64,
    /// Mean over the episode's steps.
    pub qos: f64,
    /// Exploration temperature at the episode's first step.
    pub temperature: f64,
}

/// Receives results as soon as each episode ends.
pub trait EpisodeSink {
    fn episode(&mut self, metrics: &EpisodeMetrics, frames: &[Frame]) -> Result<()>;
}

impl EpisodeSink for () {
    fn episode(&mut self, _: &EpisodeMetrics, _: &[Frame]) -> Result<()> {
        Ok(())
    }
}

/// Everything a finished run produced.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub metrics: Vec<EpisodeMetrics>,
    pub frames: Vec<Frame>,
    pub learners: Vec<AgentLearner>,
}

/// Seeds for the independent random streams of a run.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn records_trajectory(config: &TrainConfig, episode: usize) -> bool {
    episode + 1 == config.episodes
        || (config.trajectory_every > 0 && episode % config.trajectory_every == 0)
}

/// Runs `train.episodes` training episodes. Deterministic in `seed`.
pub fn train_run(
    env_config: &EnvConfig,
    model: &dyn ValueModel,
    train: &TrainConfig,
    seed: u64,
    sink: &mut dyn EpisodeSink,
) -> Result<TrainOutcome> {
    train.validate()?;
    let mut env = DroneEnv::new(env_config.clone(), seed)?;
    let mut action_rng = stream(seed, 1);
    let mut init_rng = stream(seed, 2);
    let m = env_config.num_drones;
    let mut learners: Vec<AgentLearner> = (0..m)
        .map(|id| AgentLearner::new(id, model.init_params(&mut init_rng)))
        .collect();

    let horizon = env_config.steps_per_episode;
    let total_steps = train.episodes * horizon;
    let mut metrics = Vec::with_capacity(train.episodes);
    let mut frames = Vec::new();

    for episode in 0..train.episodes {
        let record = records_trajectory(train, episode);
        let (mut state, mut observations) = env.reset();
        let mut episode_frames = Vec::new();
        if record {
            episode_frames.push(Frame::capture(episode, &state, env_config, vec![0.0; m]));
        }
        let mut agent_rewards = vec![0.0; m];
        let (mut loss_sum, mut support_sum, mut qos_sum) = (0.0, 0.0, 0.0);
        let first_temperature = train.temperature_at(episode * horizon, total_steps);

        for t in 0..horizon {
            let temperature = train.temperature_at(episode * horizon + t, total_steps);
            let mut actions = Vec::with_capacity(m);
            for (learner, obs) in learners.iter().zip(&observations) {
                let q = model.q_values(&learner.actor_params, obs)?;
                let dist = action_distribution(&q, temperature)?;
                actions.push(select_action(&dist, ActionMode::Sample, &mut action_rng)?);
            }
            let outcome = env.step(&state, &actions)?;
            let transition = Transition {
                observations,
                actions,
                rewards: outcome.rewards.clone(),
                next_observations: outcome.observations.clone(),
                terminal: outcome.state.is_done(env_config),
            };

            for (agent, learner) in learners.iter_mut().enumerate() {
                let diverged = |source: Error| Error::Diverged {
                    episode,
                    step: t,
                    agent,
                    source: Box::new(source),
                };
                let target = td_target(
                    transition.rewards[agent],
                    &transition.next_observations[agent],
                    model,
                    &learner.target_params,
                    train.discount,
                    transition.terminal,
                )
                .map_err(diverged)?;
                let sample = Sample {
                    obs: transition.observations[agent].clone(),
                    action: transition.actions[agent],
                    target,
                };
                let value = loss(model, &learner.actor_params, std::slice::from_ref(&sample))
                    .map_err(diverged)?;
                if !value.is_finite() {
                    return Err(diverged(Error::NonFinite { index: 0, value }));
                }
                loss_sum += value;
                if train.learning_rate > 0.0 {
                    let grad = model
                        .loss_gradient(
                            &learner.actor_params,
                            &sample.obs,
                            sample.action,
                            sample.target,
                            train.sdq_epsilon,
                        )
                        .map_err(diverged)?;
                    sgd_step_in_place(&mut learner.actor_params, &grad, train.learning_rate)?;
                    if let Some(i) = learner.actor_params.iter().position(|p| !p.is_finite()) {
                        return Err(diverged(Error::NonFinite {
                            index: i,
                            value: learner.actor_params[i],
                        }));
                    }
                }
                maybe_update_target(learner, train.target_update_interval);
                agent_rewards[agent] += transition.rewards[agent];
            }

            support_sum += outcome.metrics.support_rate;
            qos_sum += outcome.metrics.qos;
            if record {
                episode_frames.push(Frame::capture(
                    episode,
                    &outcome.state,
                    env_config,
                    outcome.rewards.clone(),
                ));
            }
            state = outcome.state;
            observations = transition.next_observations;
        }

        let steps = horizon as f64;
        let row = EpisodeMetrics {
            episode,
            total_reward: agent_rewards.iter().sum(),
            agent_rewards,
            mean_loss: loss_sum / (steps * m as f64),
            support_rate: support_sum / steps,
            qos: qos_sum / steps,
            temperature: first_temperature,
        };
        sink.episode(&row, &episode_frames)?;
        metrics.push(row);
        frames.extend(episode_frames);
    }

    Ok(TrainOutcome {
        metrics,
        frames,
        learners,
    })
}

/// Result of greedy evaluation episodes.
#[derive(Clone, Debug)]
pub struct EvalOutcome {
    pub metrics: Vec<EpisodeMetrics>,
    pub frames: Vec<Frame>,
}

/// Plays `episodes` episodes with greedy actions and fixed parameters,
/// recording every frame.
pub fn evaluate_greedy(
    env_config: &EnvConfig,
    model: &dyn ValueModel,
    params: &[Vec<f64>],
    episodes: usize,
    seed: u64,
) -> Result<EvalOutcome> {
    let m = env_config.num_drones;
    if params.len() != m {
        return Err(invalid(format!("{} parameter sets for {m} drones", params.len())));
    }
    let mut env = DroneEnv::new(env_config.clone(), seed)?;
    let mut metrics = Vec::with_capacity(episodes);
    let mut frames = Vec::new();
    for episode in 0..episodes {
        let (mut state, mut observations) = env.reset();
        frames.push(Frame::capture(episode, &state, env_config, vec![0.0; m]));
        let mut agent_rewards = vec![0.0; m];
        let (mut support_sum, mut qos_sum) = (0.0, 0.0);
        while !state.is_done(env_config) {
            let actions = params
                .iter()
                .zip(&observations)
                .map(|(p, obs)| Ok(argmax(&model.q_values(p, obs)?)))
                .collect::<Result<Vec<_>>>()?;
            let outcome = env.step(&state, &actions)?;
            for (acc, r) in agent_rewards.iter_mut().zip(&outcome.rewards) {
                *acc += r;
            }
            support_sum += outcome.metrics.support_rate;
            qos_sum += outcome.metrics.qos;
            frames.push(Frame::capture(episode, &outcome.state, env_config, outcome.rewards.clone()));
            state = outcome.state;
            observations = outcome.observations;
        }
        let steps = env_config.steps_per_episode as f64;
        metrics.push(EpisodeMetrics {
            episode,
            total_reward: agent_rewards.iter().sum(),
            agent_rewards,
            mean_loss: 0.0,
            support_rate: support_sum / steps,
            qos: qos_sum / steps,
            temperature: 0.0,
        });
    }
    Ok(EvalOutcome { metrics, frames })
}
