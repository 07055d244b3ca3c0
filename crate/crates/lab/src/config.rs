use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cbi_core::ModelParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One config document: the model block plus an `experiment` table holding
/// one optional sub-block per experiment name, decoded by that experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams<f64>,
    #[serde(default)]
    pub experiment: serde_json::Value,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Toml,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Format::Toml,
            Some("json") => Format::Json,
            _ if text.trim_start().starts_with('{') => Format::Json,
            _ => Format::Toml,
        };
        Self::parse(&text, format).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str, format: Format) -> anyhow::Result<Self> {
        let value: serde_json::Value = match format {
            Format::Json => serde_json::from_str(text)?,
            Format::Toml => {
                let v: toml::Value = toml::from_str(text)?;
                serde_json::to_value(v)?
            }
        };
        if !value.is_object() {
            bail!("config must be a table with a `model` block");
        }
        Ok(serde_json::from_value(value)?)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}
