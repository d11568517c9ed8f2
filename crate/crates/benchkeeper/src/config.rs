//! `--config` file: providers, role assignments, backend and thresholds.

use std::fs;
use std::path::{Path, PathBuf};

use benchkeeper_core::leakage::DEFAULT_MIN_TOKENS;
use benchkeeper_core::outcome::DEFAULT_FAILURE_THRESHOLD;
use serde::{Deserialize, Serialize};

use crate::agent::DEFAULT_MAX_ITERS;
use crate::backend::BackendConfig;
use crate::provider::{ModelProvider, ProviderError, ProviderSpec};
use crate::rewrite::StyleSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub failure_threshold: f64,
    pub leakage_n: usize,
    pub variants_k: usize,
    pub max_iters: usize,
    pub workers: usize,
    pub attempts: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            failure_threshold: DEFAULT_FAILURE_THRESHOLD,
            leakage_n: DEFAULT_MIN_TOKENS,
            variants_k: 4,
            max_iters: DEFAULT_MAX_ITERS,
            workers: 4,
            attempts: 1,
        }
    }
}

/// Which provider plays which part.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Roles {
    /// Models under evaluation.
    pub generators: Vec<String>,
    pub analysis: Option<String>,
    pub revision: Option<String>,
    pub review: Option<String>,
    pub update: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub providers: Vec<ProviderSpec>,
    pub roles: Roles,
    pub backend: Option<BackendConfig>,
    pub thresholds: Thresholds,
    pub styles: Option<StyleSet>,
    pub runs_dir: Option<String>,
    pub approver: Option<String>,
    /// Directory relative paths in the file are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("{path} line {line}, column {col}: {msg}")]
    Parse { path: PathBuf, line: usize, col: usize, msg: String },
    #[error("no provider assigned to role `{0}`")]
    Unassigned(&'static str),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("invalid threshold: {0}")]
    Threshold(String),
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Read(path.to_path_buf(), e))?;
        let mut cfg: Config = serde_json::from_str(&text)
            .map_err(|e| ConfigError::Parse { path: path.to_path_buf(), line: e.line(), col: e.column(), msg: e.to_string() })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.thresholds;
        if !(t.failure_threshold > 0.0 && t.failure_threshold <= 1.0) {
            return Err(ConfigError::Threshold(format!("failure_threshold {} outside (0, 1]", t.failure_threshold)));
        }
        if t.leakage_n == 0 || t.max_iters == 0 || t.attempts == 0 || t.workers == 0 {
            return Err(ConfigError::Threshold("leakage_n, max_iters, attempts and workers must be positive".into()));
        }
        Ok(())
    }

    pub fn provider(&self, id: &str) -> Result<Box<dyn ModelProvider>, ConfigError> {
        let spec = self.providers.iter().find(|p| p.provider_id == id).ok_or_else(|| ProviderError::Unknown(id.into()))?;
        Ok(spec.build(&self.base_dir)?)
    }

    pub fn role_provider(&self, role: &'static str) -> Result<Box<dyn ModelProvider>, ConfigError> {
        let id = match role {
            "analysis" => &self.roles.analysis,
            "revision" => &self.roles.revision,
            "review" => &self.roles.review,
            "update" => &self.roles.update,
            _ => &None,
        };
        self.provider(id.as_deref().ok_or(ConfigError::Unassigned(role))?)
    }

    pub fn generators(&self) -> Result<Vec<Box<dyn ModelProvider>>, ConfigError> {
        self.roles.generators.iter().map(|id| self.provider(id)).collect()
    }

    pub fn backend(&self) -> BackendConfig {
        self.backend.clone().unwrap_or_else(BackendConfig::builtin)
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.base_dir.join(rel)
    }
}
