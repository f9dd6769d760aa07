//! Bridge configuration files (TOML). Missing keys take their defaults.
//!
//! ```toml
//! theta = 2
//! tick_ms = 500
//! sdc_abstract_start = "before-bridge"
//! ```

use std::path::Path;

use stackel_core::bridge::{BridgeConfig, ConfigError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config: {0}")]
    Syntax(String),
    #[error("config: {0}")]
    Invalid(ConfigError),
}

pub fn parse_config(text: &str) -> Result<BridgeConfig, ConfigFileError> {
    let cfg: BridgeConfig = toml::from_str(text).map_err(|e| ConfigFileError::Syntax(e.to_string()))?;
    cfg.validate().map_err(ConfigFileError::Invalid)?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<BridgeConfig, ConfigFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// The default configuration, or the file's if one is given.
pub fn load_config(path: Option<&Path>) -> Result<BridgeConfig, ConfigFileError> {
    match path {
        Some(p) => read_config(p),
        None => Ok(BridgeConfig::default()),
    }
}

pub fn config_to_toml(cfg: &BridgeConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}
