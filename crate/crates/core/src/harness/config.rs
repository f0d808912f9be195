//! Experiment configuration file.
//!
//! The file is TOML with three optional tables. Every key is optional and
//! falls back to the desk-scale default; unknown keys are rejected.
//!
//! ```toml
//! [env]
//! grid_width = 8
//! grid_height = 8
//! num_drones = 2
//! num_users = 12
//! coverage_radius = 2.5
//! steps_per_episode = 40
//! w_support = 0.7
//! w_qos = 0.3
//! malfunction_schedule = []            # [[timestep, drone_id], ...]
//! eval_malfunction_schedule = [[20, 1]]
//! user_placement = "per_episode"       # or "fixed"
//!
//! [policy]
//! num_qubits = 5                       # must equal the action count
//! num_blocks = 2
//! layers_per_block = 1
//! value_scale = 10.0
//! hidden_size = 64                     # classical baseline only
//!
//! [train]
//! discount = 0.95
//! learning_rate = 0.01
//! sdq_epsilon = 0.01
//! target_update_interval = 200
//! temperature_initial = 2.0
//! temperature_final = 0.1
//! temperature_decay_fraction = 0.6
//! episodes = 200
//! init_spread = 0.1
//! trajectory_every = 50
//! summary_window = 20
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::{mlp_param_count, DEFAULT_HIDDEN};
use crate::env::{EnvConfig, NUM_ACTIONS};
use crate::error::{Error, Result};
use crate::qpolicy::{param_count, QPolicy, QPolicyConfig, DEFAULT_VALUE_SCALE};
use crate::training::{ClassicalModel, PolicyKind, QuantumModel, TrainConfig, ValueModel};

/// The `[policy]` table: quantum circuit shape plus the MLP width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub num_qubits: usize,
    pub num_blocks: usize,
    pub layers_per_block: usize,
    pub value_scale: f64,
    pub hidden_size: usize,
}

impl Default for PolicySection {
    fn default() -> Self {
        Self {
            num_qubits: NUM_ACTIONS,
            num_blocks: 2,
            layers_per_block: 1,
            value_scale: DEFAULT_VALUE_SCALE,
            hidden_size: DEFAULT_HIDDEN,
        }
    }
}

/// Shape of the classical baseline network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MlpConfig {
    pub obs_dim: usize,
    pub hidden: usize,
    pub actions: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigBundle {
    pub env: EnvConfig,
    pub policy: PolicySection,
    pub train: TrainConfig,
}

impl ConfigBundle {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config bundle serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.train.validate()?;
        self.quantum_config().validate_for_actions(NUM_ACTIONS)?;
        if self.policy.hidden_size == 0 {
            return Err(Error::InvalidConfig {
                key: "policy.hidden_size".into(),
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn quantum_config(&self) -> QPolicyConfig {
        QPolicyConfig {
            num_qubits: self.policy.num_qubits,
            obs_dim: self.env.obs_dim(),
            num_blocks: self.policy.num_blocks,
            layers_per_block: self.policy.layers_per_block,
            feature_bounds: self.env.feature_bounds(),
            value_scale: self.policy.value_scale,
        }
    }

    pub fn mlp_config(&self) -> MlpConfig {
        MlpConfig {
            obs_dim: self.env.obs_dim(),
            hidden: self.policy.hidden_size,
            actions: NUM_ACTIONS,
        }
    }

    pub fn param_count(&self, kind: PolicyKind) -> Result<usize> {
        match kind {
            PolicyKind::Quantum => Ok(param_count(&self.quantum_config())),
            PolicyKind::Classical => {
                let m = self.mlp_config();
                mlp_param_count(m.obs_dim, m.hidden, m.actions)
            }
        }
    }

    pub fn model(&self, kind: PolicyKind) -> Result<Box<dyn ValueModel>> {
        Ok(match kind {
            PolicyKind::Quantum => Box::new(QuantumModel::new(
                QPolicy::new(self.quantum_config())?,
                self.train.init_spread,
            )),
            PolicyKind::Classical => Box::new(ClassicalModel::new(
                self.policy.hidden_size,
                NUM_ACTIONS,
                self.env.feature_bounds(),
            )?),
        })
    }
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigBundle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(crate::error::io_err(path))?;
    let bundle = ConfigBundle::from_toml_str(&text).map_err(|reason| Error::Parse {
        path: path.to_path_buf(),
        reason,
    })?;
    bundle.validate()?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let b = ConfigBundle::from_toml_str("").unwrap();
        assert_eq!(b, ConfigBundle::default());
        assert!(b.validate().is_ok());
        assert_eq!(b.env.obs_dim(), 12);
        assert_eq!(b.quantum_config().repetitions(), 3);
    }

    #[test]
    fn round_trip() {
        let b = ConfigBundle::default();
        assert_eq!(ConfigBundle::from_toml_str(&b.to_toml_string()).unwrap(), b);
    }

    #[test]
    fn qubit_rule_enforced() {
        let b = ConfigBundle::from_toml_str("[policy]\nnum_qubits = 4\n").unwrap();
        match b.validate() {
            Err(Error::InvalidConfig { key, .. }) => assert_eq!(key, "policy.num_qubits"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ConfigBundle::from_toml_str("[train]\nlearning_rat = 0.1\n").is_err());
        assert!(ConfigBundle::from_toml_str("[extra]\n").is_err());
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let b = ConfigBundle::from_toml_str(
            "[env]\nmalfunction_schedule = [[5, 0]]\n[train]\nepisodes = 3\n",
        )
        .unwrap();
        assert_eq!(b.env.malfunction_schedule, vec![(5, 0)]);
        assert_eq!(b.train.episodes, 3);
        assert_eq!(b.train.discount, 0.95);
    }

    #[test]
    fn param_budget_ratio() {
        let b = ConfigBundle::default();
        let q = b.param_count(PolicyKind::Quantum).unwrap();
        let c = b.param_count(PolicyKind::Classical).unwrap();
        assert_eq!((q, c), (45, 1157));
        assert!((q as f64) / (c as f64) < 0.10);
    }
}
