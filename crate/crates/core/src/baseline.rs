//! Classical comparator: a one-hidden-layer tanh MLP Q-network with exact
//! gradients.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default hidden width of the classical baseline.
pub const DEFAULT_HIDDEN: usize = 64;

pub fn mlp_param_count(obs_dim: usize, hidden: usize, actions: usize) -> Result<usize> {
    if obs_dim == 0 || hidden == 0 || actions == 0 {
        return Err(invalid(format!(
            "MLP dimensions must be positive (d = {obs_dim}, H = {hidden}, C = {actions})"
        )));
    }
    Ok((obs_dim + 1) * hidden + (hidden + 1) * actions)
}

/// Weights of a `d → H → C` network, flattened as
/// `W1[H][d] | b1[H] | W2[C][H] | b2[C]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub obs_dim: usize,
    pub hidden: usize,
    pub actions: usize,
    values: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(obs_dim: usize, hidden: usize, actions: usize) -> Result<Self> {
        let n = mlp_param_count(obs_dim, hidden, actions)?;
        Ok(Self {
            obs_dim,
            hidden,
            actions,
            values: vec![0.0; n],
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng + ?Sized>(
        obs_dim: usize,
        hidden: usize,
        actions: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut p = Self::zeros(obs_dim, hidden, actions)?;
        let l1 = (6.0 / (obs_dim + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + actions) as f64).sqrt();
        let (w1, _, w2, _) = p.offsets();
        for v in &mut p.values[w1..w1 + hidden * obs_dim] {
            *v = rng.gen_range(-l1..=l1);
        }
        for v in &mut p.values[w2..w2 + actions * hidden] {
            *v = rng.gen_range(-l2..=l2);
        }
        Ok(p)
    }

    pub fn from_flat(obs_dim: usize, hidden: usize, actions: usize, values: Vec<f64>) -> Result<Self> {
        let n = mlp_param_count(obs_dim, hidden, actions)?;
        if values.len() != n {
            return Err(invalid(format!("expected {n} MLP parameters, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: i,
                value: values[i],
            });
        }
        Ok(Self {
            obs_dim,
            hidden,
            actions,
            values,
        })
    }

    pub fn flatten(&self) -> &[f64] {
        &self.values
    }

    pub fn flatten_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Start offsets of `W1`, `b1`, `W2`, `b2`.
    fn offsets(&self) -> (usize, usize, usize, usize) {
        let b1 = self.hidden * self.obs_dim;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.actions * self.hidden;
        (0, b1, w2, b2)
    }

    fn hidden_activations(&self, obs: &[f64]) -> Vec<f64> {
        let (w1, b1, _, _) = self.offsets();
        let d = self.obs_dim;
        (0..self.hidden)
            .map(|j| {
                let row = &self.values[w1 + j * d..w1 + (j + 1) * d];
                let z = self.values[b1 + j] + row.iter().zip(obs).map(|(w, x)| w * x).sum::<f64>();
                z.tanh()
            })
            .collect()
    }

    fn output(&self, hidden: &[f64]) -> Vec<f64> {
        let (_, _, w2, b2) = self.offsets();
        let h = self.hidden;
        (0..self.actions)
            .map(|k| {
                let row = &self.values[w2 + k * h..w2 + (k + 1) * h];
                self.values[b2 + k] + row.iter().zip(hidden).map(|(w, a)| w * a).sum::<f64>()
            })
            .collect()
    }

    fn check_obs(&self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.obs_dim {
            return Err(invalid(format!(
                "observation length {} does not match MLP input {}",
                obs.len(),
                self.obs_dim
            )));
        }
        Ok(())
    }
}

/// `W2 · tanh(W1 · obs + b1) + b2`.
pub fn mlp_forward(params: &MlpParams, obs: &[f64]) -> Result<Vec<f64>> {
    params.check_obs(obs)?;
    Ok(params.output(&params.hidden_activations(obs)))
}

/// Exact gradient of `(q[action] − target)²` with respect to every weight.
pub fn mlp_grad(params: &MlpParams, obs: &[f64], action: usize, target: f64) -> Result<Vec<f64>> {
    params.check_obs(obs)?;
    if action >= params.actions {
        return Err(invalid(format!("action {action} outside 0..{}", params.actions)));
    }
    let hidden = params.hidden_activations(obs);
    let q = params.output(&hidden);
    let delta = 2.0 * (q[action] - target);

    let (w1, b1, w2, b2) = params.offsets();
    let (d, h) = (params.obs_dim, params.hidden);
    let mut grad = vec![0.0; params.len()];
    grad[b2 + action] = delta;
    for j in 0..h {
        grad[w2 + action * h + j] = delta * hidden[j];
        let dz = delta * params.values[w2 + action * h + j] * (1.0 - hidden[j] * hidden[j]);
        grad[b1 + j] = dz;
        for i in 0..d {
            grad[w1 + j * d + i] = dz * obs[i];
        }
    }
    Ok(grad)
}
