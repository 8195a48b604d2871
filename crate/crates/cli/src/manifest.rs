use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Sample,
    Fit,
    Experiment,
    Tables,
}

/// Everything needed to rerun a command. Written next to (or inside) every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: CommandName,
    pub config: Value,
    pub seed: u64,
    pub version: String,
    /// The `--out` target as given, if any.
    pub out: Option<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: CommandName, config: &C, seed: u64, out: Option<&Path>) -> Self {
        Self {
            command,
            config: serde_json::to_value(config).expect("configs are plain data"),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            out: out.map(|p| p.display().to_string()),
            outputs: Vec::new(),
        }
    }
}

/// Contents of a `--config` file: a bare `{command, config, seed?, out?}`
/// object or a full manifest.
#[derive(Debug, Clone, Deserialize)]
pub struct ConfigFile {
    pub command: CommandName,
    #[serde(default)]
    pub config: Value,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
}

impl ConfigFile {
    /// Reads JSON, or the manifest line of a sample file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let json = match text.strip_prefix("# ") {
            Some(rest) => rest.lines().next().unwrap_or_default(),
            None => text.as_str(),
        };
        serde_json::from_str(json).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn config_as<T: for<'de> Deserialize<'de>>(&self) -> Result<T, CliError> {
        let value = match &self.config {
            Value::Null => Value::Object(Default::default()),
            v => v.clone(),
        };
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }
}
