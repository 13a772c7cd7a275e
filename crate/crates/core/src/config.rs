//! Runtime configuration and agent resolution.
//!
//! A config file (TOML or JSON, chosen by extension) names remote backends
//! and engine defaults:
//!
//! ```toml
//! default_max_turns = 8
//! discourse_bins = 10
//! context_window = 4
//!
//! [backends.local]
//! base_url = "http://localhost:8000/v1"
//! model = "llama-3.1-8b-instruct"
//! api_key_env = "LOCAL_LLM_KEY"
//! ```
//!
//! An agent spec on the command line is either `scripted:<stock name>` or the
//! name of a backend from this file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{stock, AgentHandle, AgentRole, RemoteChatAgent, RemoteConfig};
use crate::domain::PersuasionLevel;
use crate::engine::EngineConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("could not read config {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("invalid config {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("unknown agent `{0}`: use scripted:<name> or a backend defined in the config")]
    UnknownAgent(String),
    #[error("invalid backend `{name}`: {reason}")]
    Backend { name: String, reason: String },
    #[error("invalid setting: {0}")]
    Invalid(String),
}

fn default_turns() -> u32 {
    8
}
fn default_bins() -> usize {
    10
}
fn default_window() -> usize {
    4
}
fn default_no_persuasion_level() -> u8 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub backends: BTreeMap<String, RemoteConfig>,
    /// K for scenarios derived from the corpus.
    #[serde(default = "default_turns")]
    pub default_max_turns: u32,
    #[serde(default = "default_bins")]
    pub discourse_bins: usize,
    #[serde(default = "default_window")]
    pub context_window: usize,
    #[serde(default = "default_no_persuasion_level")]
    pub no_persuasion_level: u8,
    /// Persona catalog override; the bundled catalog otherwise.
    #[serde(default)]
    pub personas: Option<PathBuf>,
    /// Directory of prompt template overrides.
    #[serde(default)]
    pub templates: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            backends: BTreeMap::new(),
            default_max_turns: default_turns(),
            discourse_bins: default_bins(),
            context_window: default_window(),
            no_persuasion_level: default_no_persuasion_level(),
            personas: None,
            templates: None,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let parse_err = |reason: String| ConfigError::Parse {
            path: path.display().to_string(),
            reason,
        };
        let config: Config = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| parse_err(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.default_max_turns == 0 {
            return Err(ConfigError::Invalid("default_max_turns must be at least 1".into()));
        }
        if self.discourse_bins == 0 {
            return Err(ConfigError::Invalid("discourse_bins must be at least 1".into()));
        }
        if self.context_window == 0 {
            return Err(ConfigError::Invalid("context_window must be at least 1".into()));
        }
        PersuasionLevel::new(self.no_persuasion_level.into())
            .map_err(|_| ConfigError::Invalid("no_persuasion_level must be in 1..=5".into()))?;
        for (name, b) in &self.backends {
            if b.base_url.trim().is_empty() || b.model.trim().is_empty() {
                return Err(ConfigError::Backend {
                    name: name.clone(),
                    reason: "base_url and model are required".into(),
                });
            }
        }
        Ok(())
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            context_window: self.context_window,
            no_persuasion_level: PersuasionLevel::clamped(self.no_persuasion_level.into()),
        }
    }
}

/// A resolved agent spec. Scripted agents are rebuilt per game so their noise
/// follows the game seed; remote agents are shared so their concurrency cap
/// applies across the whole batch.
#[derive(Clone)]
pub enum AgentSource {
    Scripted(String),
    Remote(Arc<RemoteChatAgent>),
}

impl std::fmt::Debug for AgentSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AgentSource::Scripted(n) => write!(f, "Scripted({n})"),
            AgentSource::Remote(a) => write!(f, "Remote({})", crate::agents::Agent::id(a.as_ref())),
        }
    }
}

impl AgentSource {
    pub fn resolve(spec: &str, role: AgentRole, config: &Config) -> Result<Self, ConfigError> {
        if let Some(name) = spec.strip_prefix("scripted:") {
            return match stock::build(name, 0) {
                Some(_) => Ok(AgentSource::Scripted(name.to_string())),
                None => Err(ConfigError::UnknownAgent(spec.to_string())),
            };
        }
        let backend = config
            .backends
            .get(spec)
            .ok_or_else(|| ConfigError::UnknownAgent(spec.to_string()))?;
        let agent = RemoteChatAgent::new(spec, backend.clone(), role.default_temperature()).map_err(|e| {
            ConfigError::Backend {
                name: spec.to_string(),
                reason: e.to_string(),
            }
        })?;
        Ok(AgentSource::Remote(Arc::new(agent)))
    }

    pub fn scripted(name: &str) -> Self {
        AgentSource::Scripted(name.to_string())
    }

    pub fn is_scripted(&self) -> bool {
        matches!(self, AgentSource::Scripted(_))
    }

    pub fn spec(&self) -> String {
        match self {
            AgentSource::Scripted(n) => format!("scripted:{n}"),
            AgentSource::Remote(a) => crate::agents::Agent::id(a.as_ref()).to_string(),
        }
    }

    pub fn instantiate(&self, seed: u64) -> AgentHandle {
        match self {
            AgentSource::Scripted(n) => Arc::new(stock::build(n, seed).expect("validated at resolve time")),
            AgentSource::Remote(a) => a.clone(),
        }
    }
}

/// Agents for the four game roles.
#[derive(Debug, Clone)]
pub struct RoleAgents {
    pub interviewer: AgentSource,
    pub source: AgentSource,
    pub judge: AgentSource,
    pub retriever: AgentSource,
}

impl RoleAgents {
    /// The offline stock set.
    pub fn scripted() -> Self {
        RoleAgents {
            interviewer: AgentSource::scripted("outline-interviewer"),
            source: AgentSource::scripted("template-source"),
            judge: AgentSource::scripted("cue-judge"),
            retriever: AgentSource::scripted("keyword-retriever"),
        }
    }

    pub fn all_scripted(&self) -> bool {
        [&self.interviewer, &self.source, &self.judge, &self.retriever]
            .iter()
            .all(|a| a.is_scripted())
    }

    pub fn instantiate(&self, seed: u64) -> crate::engine::GameAgents {
        crate::engine::GameAgents {
            interviewer: self.interviewer.instantiate(seed),
            source: self.source.instantiate(seed),
            judge: self.judge.instantiate(seed),
            retriever: self.retriever.instantiate(seed),
        }
    }
}
