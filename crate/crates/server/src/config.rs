//! Service configuration: a TOML file whose every field is optional, with
//! command-line flags layered on top.

use std::path::{Path, PathBuf};

use parley_core::dialogue::{DialogueError, Engine, TurnBudget};
use parley_core::metrics::{ThresholdError, WordListError};
use parley_core::{Thresholds, WordLists};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    /// Offline rule-based understanding and sidecar-file speech.
    #[default]
    Stub,
    /// OpenAI-compatible remote endpoints, configured from the environment.
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Directory holding the user registry and finished sessions.
    pub store: PathBuf,
    /// Where synthesized audio is written and relative audio refs resolve.
    /// Defaults to `<store>/audio`.
    pub audio_dir: Option<PathBuf>,
    pub providers: ProviderMode,
    pub host: String,
    pub port: u16,
    /// Allowed browser origins; empty allows any.
    pub cors_origins: Vec<String>,
    /// Override directory for `awkward.txt`, `stopwords.txt`, `function_words/`.
    pub word_lists: Option<PathBuf>,
    /// Override directory for `script.toml`, `persona.toml`, `catalog.toml`.
    pub dialogue: Option<PathBuf>,
    pub thresholds: Thresholds,
    pub budget: TurnBudget,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            store: PathBuf::from("parley-store"),
            audio_dir: None,
            providers: ProviderMode::Stub,
            host: "127.0.0.1".into(),
            port: 8080,
            cors_origins: Vec::new(),
            word_lists: None,
            dialogue: None,
            thresholds: Thresholds::default(),
            budget: TurnBudget::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error(transparent)]
    Thresholds(#[from] ThresholdError),
    #[error(transparent)]
    WordLists(#[from] WordListError),
    #[error("dialogue data: {0}")]
    Dialogue(#[from] DialogueError),
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads `path` when given, defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn audio_dir(&self) -> PathBuf {
        self.audio_dir
            .clone()
            .unwrap_or_else(|| self.store.join("audio"))
    }

    pub fn word_lists(&self) -> Result<WordLists, ConfigError> {
        Ok(match &self.word_lists {
            Some(dir) => WordLists::load_dir(dir)?,
            None => WordLists::defaults(),
        })
    }

    pub fn engine(&self) -> Result<Engine, ConfigError> {
        Ok(match &self.dialogue {
            Some(dir) => Engine::from_dir(dir)?,
            None => Engine::default(),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        Ok(self.thresholds.validate()?)
    }
}
