use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

/// Service settings: a TOML file, then `YOGYATA_*` environment overrides.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub data_dir: PathBuf,
    /// Defaults to `accounts.toml` inside the data directory.
    pub accounts_file: Option<PathBuf>,
    pub session_ttl_secs: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1:8080".into(),
            data_dir: PathBuf::from("data"),
            accounts_file: None,
            session_ttl_secs: 24 * 60 * 60,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{var}: {message}")]
    Env { var: &'static str, message: String },
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads `path` if given, then applies the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.into(), source })?;
                Self::from_toml(&text).map_err(|source| ConfigError::Toml { path: p.into(), source })?
            }
            None => ServiceConfig::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        Ok(config)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = var("YOGYATA_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("YOGYATA_DATA_DIR") {
            self.data_dir = v.into();
        }
        if let Some(v) = var("YOGYATA_ACCOUNTS") {
            self.accounts_file = Some(v.into());
        }
        if let Some(v) = var("YOGYATA_SESSION_TTL") {
            self.session_ttl_secs = v.trim().parse().map_err(|_| ConfigError::Env {
                var: "YOGYATA_SESSION_TTL",
                message: format!("expected whole seconds, got `{v}`"),
            })?;
        }
        Ok(())
    }

    pub fn accounts_path(&self) -> PathBuf {
        self.accounts_file.clone().unwrap_or_else(|| self.data_dir.join("accounts.toml"))
    }

    pub fn session_ttl(&self) -> Duration {
        Duration::from_secs(self.session_ttl_secs)
    }
}
