//! Data re-uploading Q-policy.
//!
//! An observation of dimension `d` is split into `⌈d/q⌉` chunks of `q`
//! features. Each chunk is uploaded as one `RY` per wire, followed by a
//! trainable `RZ` per wire. After the last upload, `B` blocks of `L` ring
//! layers of `CU3(w → w+1 mod q)` entangle the register, and the Pauli-Z
//! expectation of each wire is read out as that action's value.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qsim::{Circuit, Gate, StateVector};

/// Default multiplier from observables in `[-1, 1]` to Q-values.
pub const DEFAULT_VALUE_SCALE: f64 = 10.0;

/// One angle slot of an encoding chunk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Feature(usize),
    Pad,
}

/// Which observation feature feeds which wire on each upload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingPlan {
    pub repetitions: usize,
    pub chunks: Vec<Vec<Slot>>,
}

pub fn build_encoding_plan(obs_dim: usize, num_qubits: usize) -> Result<EncodingPlan> {
    if obs_dim == 0 || num_qubits == 0 {
        return Err(invalid(format!(
            "encoding plan needs positive sizes (obs_dim = {obs_dim}, num_qubits = {num_qubits})"
        )));
    }
    let repetitions = obs_dim.div_ceil(num_qubits);
    let chunks = (0..repetitions)
        .map(|j| {
            (0..num_qubits)
                .map(|w| {
                    let feature = j * num_qubits + w;
                    if feature < obs_dim {
                        Slot::Feature(feature)
                    } else {
                        Slot::Pad
                    }
                })
                .collect()
        })
        .collect();
    Ok(EncodingPlan {
        repetitions,
        chunks,
    })
}

/// Maps each feature affinely from its `(min, max)` bounds onto `[-π, π]`,
/// clamping out-of-range values to the nearest edge first.
pub fn scale_features(obs: &[f64], bounds: &[(f64, f64)]) -> Result<Vec<f64>> {
    if obs.len() != bounds.len() {
        return Err(invalid(format!(
            "observation has {} features but {} bounds were given",
            obs.len(),
            bounds.len()
        )));
    }
    obs.iter()
        .zip(bounds)
        .enumerate()
        .map(|(i, (&x, &(lo, hi)))| {
            if !(lo < hi) {
                return Err(Error::InvalidConfig {
                    key: format!("feature_bounds[{i}]"),
                    reason: format!("min {lo} must be below max {hi}"),
                });
            }
            let t = (x.clamp(lo, hi) - lo) / (hi - lo);
            Ok(-PI + 2.0 * PI * t)
        })
        .collect()
}

/// Shape and scaling of one agent's quantum policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QPolicyConfig {
    /// Equals the number of actions.
    pub num_qubits: usize,
    pub obs_dim: usize,
    pub num_blocks: usize,
    pub layers_per_block: usize,
    pub feature_bounds: Vec<(f64, f64)>,
    pub value_scale: f64,
}

impl QPolicyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Error::InvalidConfig {
            key: key.to_string(),
            reason,
        };
        if self.num_qubits == 0 || self.num_qubits > crate::qsim::MAX_QUBITS {
            return Err(bad("num_qubits", format!("{} is not a usable register size", self.num_qubits)));
        }
        if self.obs_dim == 0 {
            return Err(bad("obs_dim", "must be positive".into()));
        }
        if self.num_blocks == 0 {
            return Err(bad("num_blocks", "must be at least 1".into()));
        }
        if self.layers_per_block == 0 {
            return Err(bad("layers_per_block", "must be at least 1".into()));
        }
        if !(self.value_scale > 0.0 && self.value_scale.is_finite()) {
            return Err(bad("value_scale", format!("{} must be positive", self.value_scale)));
        }
        if self.feature_bounds.len() != self.obs_dim {
            return Err(bad(
                "feature_bounds",
                format!("{} bounds for {} features", self.feature_bounds.len(), self.obs_dim),
            ));
        }
        for (i, &(lo, hi)) in self.feature_bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(bad(
                    &format!("feature_bounds[{i}]"),
                    format!("min {lo} must be below max {hi}"),
                ));
            }
        }
        Ok(())
    }

    /// Checks the one-qubit-per-action rule.
    pub fn validate_for_actions(&self, num_actions: usize) -> Result<()> {
        if self.num_qubits != num_actions {
            return Err(Error::InvalidConfig {
                key: "policy.num_qubits".into(),
                reason: format!(
                    "{} qubits cannot read out {num_actions} actions; one qubit per action is required",
                    self.num_qubits
                ),
            });
        }
        self.validate()
    }

    pub fn repetitions(&self) -> usize {
        self.obs_dim.div_ceil(self.num_qubits)
    }

    pub fn num_encoder_params(&self) -> usize {
        self.repetitions() * self.num_qubits
    }

    pub fn num_block_params(&self) -> usize {
        3 * self.num_blocks * self.layers_per_block * self.num_qubits
    }

    /// Kind of each entry of the flattened parameter vector.
    pub fn param_kinds(&self) -> Vec<ParamKind> {
        let mut kinds = vec![ParamKind::Rotation; self.num_encoder_params()];
        kinds.resize(param_count(self), ParamKind::ControlledU3);
        kinds
    }
}

pub fn param_count(config: &QPolicyConfig) -> usize {
    config.num_encoder_params() + config.num_block_params()
}

/// What kind of gate a trainable parameter feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    /// A single-qubit Pauli rotation angle (generator eigenvalues ±1/2).
    Rotation,
    /// One of the three angles of a controlled U3.
    ControlledU3,
}

/// Trainable angles, stored flat: `encoder[N_rep][q]` followed by
/// `blocks[B][L][q][θ, φ, λ]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QPolicyParams {
    values: Vec<f64>,
}

impl QPolicyParams {
    pub fn zeros(config: &QPolicyConfig) -> Self {
        Self {
            values: vec![0.0; param_count(config)],
        }
    }

    /// Angles drawn uniformly from `[-spread, spread]`.
    pub fn random<R: Rng + ?Sized>(config: &QPolicyConfig, spread: f64, rng: &mut R) -> Self {
        let values = (0..param_count(config))
            .map(|_| rng.gen_range(-spread..=spread))
            .collect();
        Self { values }
    }

    pub fn from_flat(config: &QPolicyConfig, values: Vec<f64>) -> Result<Self> {
        let expected = param_count(config);
        if values.len() != expected {
            return Err(invalid(format!(
                "expected {expected} policy parameters, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: i,
                value: values[i],
            });
        }
        Ok(Self { values })
    }

    pub fn flatten(&self) -> &[f64] {
        &self.values
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn encoder_angle(&self, config: &QPolicyConfig, repetition: usize, wire: usize) -> f64 {
        self.values[repetition * config.num_qubits + wire]
    }

    pub fn block_angles(
        &self,
        config: &QPolicyConfig,
        block: usize,
        layer: usize,
        wire: usize,
    ) -> [f64; 3] {
        let q = config.num_qubits;
        let base = config.num_encoder_params()
            + ((block * config.layers_per_block + layer) * q + wire) * 3;
        [self.values[base], self.values[base + 1], self.values[base + 2]]
    }
}

/// A validated policy shape with its encoding plan precomputed.
#[derive(Clone, Debug)]
pub struct QPolicy {
    config: QPolicyConfig,
    plan: EncodingPlan,
}

impl QPolicy {
    pub fn new(config: QPolicyConfig) -> Result<Self> {
        config.validate()?;
        let plan = build_encoding_plan(config.obs_dim, config.num_qubits)?;
        Ok(Self { config, plan })
    }

    pub fn config(&self) -> &QPolicyConfig {
        &self.config
    }

    pub fn plan(&self) -> &EncodingPlan {
        &self.plan
    }

    pub fn param_count(&self) -> usize {
        param_count(&self.config)
    }

    /// Builds the circuit for a flat parameter slice.
    pub fn circuit_from_flat(&self, params: &[f64], obs: &[f64]) -> Result<Circuit> {
        let cfg = &self.config;
        if params.len() != self.param_count() {
            return Err(invalid(format!(
                "expected {} policy parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        if obs.len() != cfg.obs_dim {
            return Err(invalid(format!(
                "observation length {} does not match obs_dim {}",
                obs.len(),
                cfg.obs_dim
            )));
        }
        let angles = scale_features(obs, &cfg.feature_bounds)?;
        let q = cfg.num_qubits;
        let ring = if q > 1 { q } else { 0 };
        let mut circuit = Circuit::with_capacity(
            self.plan.repetitions * 2 * q + cfg.num_blocks * cfg.layers_per_block * ring,
        );
        for (j, chunk) in self.plan.chunks.iter().enumerate() {
            for (w, slot) in chunk.iter().enumerate() {
                let theta = match *slot {
                    Slot::Feature(i) => angles[i],
                    Slot::Pad => 0.0,
                };
                circuit.push(Gate::ry(w, theta));
            }
            for w in 0..q {
                circuit.push(Gate::rz(w, params[j * q + w]));
            }
        }
        // A single wire has no ring partner; its block angles stay inert.
        let mut base = cfg.num_encoder_params();
        for _ in 0..cfg.num_blocks * cfg.layers_per_block {
            for w in 0..ring {
                let a = &params[base + 3 * w..base + 3 * w + 3];
                circuit.push(Gate::cu3(w, (w + 1) % q, a[0], a[1], a[2]));
            }
            base += 3 * q;
        }
        Ok(circuit)
    }

    pub fn circuit(&self, params: &QPolicyParams, obs: &[f64]) -> Result<Circuit> {
        self.circuit_from_flat(params.flatten(), obs)
    }

    /// Pauli-Z readout of every wire after running the policy circuit on `|0…0⟩`.
    pub fn forward_flat(&self, params: &[f64], obs: &[f64]) -> Result<Vec<f64>> {
        let circuit = self.circuit_from_flat(params, obs)?;
        let mut state = StateVector::zero(self.config.num_qubits)?;
        state.apply_circuit(&circuit)?;
        Ok(state.expectation_z_all())
    }

    pub fn forward(&self, params: &QPolicyParams, obs: &[f64]) -> Result<Vec<f64>> {
        self.forward_flat(params.flatten(), obs)
    }

    pub fn q_values_flat(&self, params: &[f64], obs: &[f64]) -> Result<Vec<f64>> {
        let beta = self.config.value_scale;
        Ok(self
            .forward_flat(params, obs)?
            .into_iter()
            .map(|v| beta * v)
            .collect())
    }

    pub fn q_values(&self, params: &QPolicyParams, obs: &[f64]) -> Result<Vec<f64>> {
        self.q_values_flat(params.flatten(), obs)
    }
}

pub fn build_policy_circuit(
    config: &QPolicyConfig,
    params: &QPolicyParams,
    obs: &[f64],
) -> Result<Circuit> {
    QPolicy::new(config.clone())?.circuit(params, obs)
}

pub fn forward(config: &QPolicyConfig, params: &QPolicyParams, obs: &[f64]) -> Result<Vec<f64>> {
    QPolicy::new(config.clone())?.forward(params, obs)
}

pub fn q_values(config: &QPolicyConfig, params: &QPolicyParams, obs: &[f64]) -> Result<Vec<f64>> {
    QPolicy::new(config.clone())?.q_values(params, obs)
}

/// Softmax of `values / temperature`, shifted by the maximum for stability.
pub fn action_distribution(values: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0) {
        return Err(invalid(format!("temperature {temperature} must be positive")));
    }
    if values.is_empty() {
        return Err(invalid("cannot form a distribution over zero actions"));
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values
        .iter()
        .map(|v| ((v - max) / temperature).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// How an action is picked from a distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    /// Most probable action; ties go to the lowest index.
    Greedy,
    /// Draw from the distribution.
    Sample,
}

pub fn select_action<R: Rng + ?Sized>(
    distribution: &[f64],
    mode: ActionMode,
    rng: &mut R,
) -> Result<usize> {
    if distribution.is_empty() {
        return Err(invalid("empty action distribution"));
    }
    let total: f64 = distribution.iter().sum();
    if (total - 1.0).abs() > 1e-6 || distribution.iter().any(|p| !(*p >= 0.0)) {
        return Err(invalid(format!(
            "action distribution is not normalized (sum = {total})"
        )));
    }
    match mode {
        ActionMode::Greedy => Ok(argmax(distribution)),
        ActionMode::Sample => {
            let u: f64 = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            for (i, p) in distribution.iter().enumerate() {
                acc += p;
                if u < acc {
                    return Ok(i);
                }
            }
            // u landed in the rounding gap above the last partial sum
            Ok(distribution.iter().rposition(|p| *p > 0.0).unwrap_or(0))
        }
    }
}

/// Index of the first maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
