//! Optional JSON configuration file (`kc.json`), merged beneath
//! command-line flags: a flag always wins over the file, the file wins
//! over built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

/// Everything `kc.json` may set. All fields are optional; unknown keys
/// are rejected so typos fail loudly instead of being ignored.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    /// Ontology schema Turtle file.
    pub schema: Option<PathBuf>,
    /// Default corpus file.
    pub corpus: Option<PathBuf>,
    /// Chat-completions endpoint base URL.
    pub endpoint_url: Option<String>,
    pub model_name: Option<String>,
    pub temperature: Option<f64>,
    pub max_parallel: Option<usize>,
    pub timeout_secs: Option<u64>,
    /// File whose contents replace the default system prompt.
    pub system_prompt_file: Option<PathBuf>,
    /// Default comparison mode for `eval` (`name-keyed` or `isomorphism`).
    pub mode: Option<String>,
    /// Default seed for splits and selections.
    pub seed: Option<u64>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path} is not valid JSON: {message}")]
    Parse { path: String, message: String },
}

/// Loads configuration. An explicitly given path must exist and parse; a
/// missing implicit `<workdir>/kc.json` simply yields the defaults.
pub fn load_config(explicit: Option<&Path>, workdir: &Path) -> Result<FileConfig, ConfigError> {
    let (path, required) = match explicit {
        Some(path) => (path.to_path_buf(), true),
        None => (workdir.join("kc.json"), false),
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if !required && e.kind() == std::io::ErrorKind::NotFound => {
            return Ok(FileConfig::default());
        }
        Err(e) => {
            return Err(ConfigError::Io { path: path.display().to_string(), source: e });
        }
    };
    serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
