//! Shared plumbing for OpenAI-compatible HTTP providers.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use thiserror::Error;

pub const ENV_API_KEY: &str = "OPENAI_API_KEY";
pub const ENV_BASE_URL: &str = "OPENAI_BASE_URL";
pub const ENV_NLU_MODEL: &str = "PARLEY_NLU_MODEL";
pub const ENV_ASR_MODEL: &str = "PARLEY_ASR_MODEL";
pub const ENV_TTS_MODEL: &str = "PARLEY_TTS_MODEL";
pub const ENV_TTS_VOICE: &str = "PARLEY_TTS_VOICE";

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("missing environment variables: {}", .0.join(", "))]
pub struct MissingEnv(pub Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteConfig {
    pub base_url: String,
    pub api_key: String,
    pub nlu_model: String,
    pub asr_model: String,
    pub tts_model: String,
    pub tts_voice: String,
    pub timeout: Duration,
    pub max_in_flight: usize,
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: api_key.into(),
            nlu_model: "gpt-4o-mini".into(),
            asr_model: "whisper-1".into(),
            tts_model: "tts-1".into(),
            tts_voice: "alloy".into(),
            timeout: DEFAULT_TIMEOUT,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }

    /// Reads the provider settings from the environment. Only the API key is
    /// required.
    pub fn from_env() -> Result<Self, MissingEnv> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, MissingEnv> {
        let get = |k: &str| get(k).filter(|v| !v.trim().is_empty());
        let api_key = get(ENV_API_KEY).ok_or_else(|| MissingEnv(vec![ENV_API_KEY.to_string()]))?;
        let mut config = Self::new(get(ENV_BASE_URL).unwrap_or_else(|| DEFAULT_BASE_URL.into()), api_key);
        if let Some(v) = get(ENV_NLU_MODEL) {
            config.nlu_model = v;
        }
        if let Some(v) = get(ENV_ASR_MODEL) {
            config.asr_model = v;
        }
        if let Some(v) = get(ENV_TTS_MODEL) {
            config.tts_model = v;
        }
        if let Some(v) = get(ENV_TTS_VOICE) {
            config.tts_voice = v;
        }
        Ok(config)
    }

    pub fn endpoint(&self, path: &str) -> String {
        format!("{}/{}", self.base_url, path.trim_start_matches('/'))
    }

    pub(crate) fn client(&self) -> reqwest::blocking::Client {
        reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .expect("http client builds")
    }
}

/// Caps the number of concurrent requests to a provider.
#[derive(Debug)]
pub(crate) struct Gate {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

pub(crate) struct Permit<'a>(&'a Gate);

impl Gate {
    pub(crate) fn new(limit: usize) -> Self {
        Self {
            limit: limit.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub(crate) fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().expect("gate mutex poisoned");
        while *active >= self.limit {
            active = self.freed.wait(active).expect("gate mutex poisoned");
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().expect("gate mutex poisoned") -= 1;
        self.0.freed.notify_one();
    }
}
