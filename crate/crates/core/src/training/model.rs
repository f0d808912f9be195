//! Value models the trainer can drive: the quantum policy and the MLP.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gradient::grad_sdq;
use crate::baseline::{mlp_forward, mlp_grad, mlp_param_count, MlpParams};
use crate::error::{invalid, Result};
use crate::qpolicy::QPolicy;

/// Which policy class a run trains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Quantum,
    Classical,
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PolicyKind::Quantum => "quantum",
            PolicyKind::Classical => "classical",
        })
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(PolicyKind::Quantum),
            "classical" => Ok(PolicyKind::Classical),
            other => Err(invalid(format!("unknown policy kind `{other}`"))),
        }
    }
}

/// A parametric Q-function over flat parameter vectors.
pub trait ValueModel: Send + Sync {
    fn kind(&self) -> PolicyKind;

    fn num_params(&self) -> usize;

    fn num_actions(&self) -> usize;

    fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;

    fn q_values(&self, params: &[f64], obs: &[f64]) -> Result<Vec<f64>>;

    /// Gradient of `(q[action] − target)²` with respect to `params`.
    fn loss_gradient(
        &self,
        params: &[f64],
        obs: &[f64],
        action: usize,
        target: f64,
        sdq_epsilon: f64,
    ) -> Result<Vec<f64>>;
}

/// Quantum policy trained with difference-quotient gradients.
#[derive(Clone, Debug)]
pub struct QuantumModel {
    policy: QPolicy,
    init_spread: f64,
}

impl QuantumModel {
    pub fn new(policy: QPolicy, init_spread: f64) -> Self {
        Self {
            policy,
            init_spread,
        }
    }

    pub fn policy(&self) -> &QPolicy {
        &self.policy
    }
}

impl ValueModel for QuantumModel {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Quantum
    }

    fn num_params(&self) -> usize {
        self.policy.param_count()
    }

    fn num_actions(&self) -> usize {
        self.policy.config().num_qubits
    }

    fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let s = self.init_spread;
        (0..self.num_params()).map(|_| rng.gen_range(-s..=s)).collect()
    }

    fn q_values(&self, params: &[f64], obs: &[f64]) -> Result<Vec<f64>> {
        self.policy.q_values_flat(params, obs)
    }

    fn loss_gradient(
        &self,
        params: &[f64],
        obs: &[f64],
        action: usize,
        target: f64,
        sdq_epsilon: f64,
    ) -> Result<Vec<f64>> {
        if action >= self.num_actions() {
            return Err(invalid(format!("action {action} outside 0..{}", self.num_actions())));
        }
        grad_sdq(
            |p| {
                let q = self.policy.q_values_flat(p, obs)?;
                Ok((q[action] - target).powi(2))
            },
            params,
            sdq_epsilon,
        )
    }
}

/// MLP baseline; observations are rescaled to `[-1, 1]` by the feature bounds
/// before entering the network.
#[derive(Clone, Debug)]
pub struct ClassicalModel {
    obs_dim: usize,
    hidden: usize,
    actions: usize,
    feature_bounds: Vec<(f64, f64)>,
}

impl ClassicalModel {
    pub fn new(hidden: usize, actions: usize, feature_bounds: Vec<(f64, f64)>) -> Result<Self> {
        let obs_dim = feature_bounds.len();
        mlp_param_count(obs_dim, hidden, actions)?;
        if let Some((i, _)) = feature_bounds.iter().enumerate().find(|(_, (lo, hi))| !(lo < hi)) {
            return Err(invalid(format!("feature bound {i} is empty")));
        }
        Ok(Self {
            obs_dim,
            hidden,
            actions,
            feature_bounds,
        })
    }

    fn normalize(&self, obs: &[f64]) -> Vec<f64> {
        obs.iter()
            .zip(&self.feature_bounds)
            .map(|(x, (lo, hi))| 2.0 * (x.clamp(*lo, *hi) - lo) / (hi - lo) - 1.0)
            .collect()
    }

    fn wrap(&self, params: &[f64]) -> Result<MlpParams> {
        MlpParams::from_flat(self.obs_dim, self.hidden, self.actions, params.to_vec())
    }
}

impl ValueModel for ClassicalModel {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Classical
    }

    fn num_params(&self) -> usize {
        (self.obs_dim + 1) * self.hidden + (self.hidden + 1) * self.actions
    }

    fn num_actions(&self) -> usize {
        self.actions
    }

    fn init_params(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        MlpParams::glorot(self.obs_dim, self.hidden, self.actions, rng)
            .expect("dimensions validated at construction")
            .flatten()
            .to_vec()
    }

    fn q_values(&self, params: &[f64], obs: &[f64]) -> Result<Vec<f64>> {
        if obs.len() != self.obs_dim {
            return Err(invalid(format!(
                "observation length {} does not match {}",
                obs.len(),
                self.obs_dim
            )));
        }
        mlp_forward(&self.wrap(params)?, &self.normalize(obs))
    }

    fn loss_gradient(
        &self,
        params: &[f64],
        obs: &[f64],
        action: usize,
        target: f64,
        _sdq_epsilon: f64,
    ) -> Result<Vec<f64>> {
        if obs.len() != self.obs_dim {
            return Err(invalid(format!(
                "observation length {} does not match {}",
                obs.len(),
                self.obs_dim
            )));
        }
        mlp_grad(&self.wrap(params)?, &self.normalize(obs), action, target)
    }
}
