//! Training manifests: the adapter hyperparameter block and dataset
//! pointers exported alongside chat-format fine-tuning files. Training
//! itself is external to this toolkit; the manifest records what a run
//! should use.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default system prompt for capture and fine-tuning exports.
pub const DEFAULT_SYSTEM_PROMPT: &str = include_str!("../assets/system_prompt.txt");

/// Default model identifier; treated as an opaque string.
pub const DEFAULT_MODEL_NAME: &str = "Mistral-7B-Instruct-v0.2";

/// Low-rank adapter hyperparameters, mirroring the defaults of the
/// framework the experiments assume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdapterHyperparameters {
    pub layer_keys: Vec<String>,
    pub rank: u32,
    pub alpha: f64,
    pub scale: f64,
    pub optimizer: String,
    pub learning_rate: f64,
    pub num_layers: u32,
    pub minibatch_size: u32,
}

impl Default for AdapterHyperparameters {
    fn default() -> Self {
        AdapterHyperparameters {
            layer_keys: vec!["self_attn.q_proj".into(), "self_attn.v_proj".into()],
            rank: 8,
            alpha: 16.0,
            scale: 10.0,
            optimizer: "adam".into(),
            learning_rate: 1e-5,
            num_layers: 16,
            minibatch_size: 4,
        }
    }
}

/// Everything an external fine-tuning run needs: sampling plan, epochs,
/// adapter block, dataset file paths, and the system prompt baked into the
/// exported chat records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingManifest {
    pub samples_per_concept: u32,
    pub epochs: u32,
    pub adapter: AdapterHyperparameters,
    pub train_path: Option<String>,
    pub validation_path: Option<String>,
    pub system_prompt: String,
}

impl Default for TrainingManifest {
    fn default() -> Self {
        TrainingManifest {
            samples_per_concept: 8,
            epochs: 18,
            adapter: AdapterHyperparameters::default(),
            train_path: None,
            validation_path: None,
            system_prompt: DEFAULT_SYSTEM_PROMPT.to_string(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("hyperparameter {0} must be positive")]
    NonPositive(&'static str),
    #[error("layer_keys must not be empty")]
    NoLayerKeys,
}

impl TrainingManifest {
    /// Checks the positivity invariants on every hyperparameter.
    pub fn check(&self) -> Result<(), ManifestError> {
        let a = &self.adapter;
        for (name, ok) in [
            ("samples_per_concept", self.samples_per_concept > 0),
            ("epochs", self.epochs > 0),
            ("rank", a.rank > 0),
            ("alpha", a.alpha > 0.0),
            ("scale", a.scale > 0.0),
            ("learning_rate", a.learning_rate > 0.0),
            ("num_layers", a.num_layers > 0),
            ("minibatch_size", a.minibatch_size > 0),
        ] {
            if !ok {
                return Err(ManifestError::NonPositive(name));
            }
        }
        if a.layer_keys.is_empty() {
            return Err(ManifestError::NoLayerKeys);
        }
        Ok(())
    }
}
