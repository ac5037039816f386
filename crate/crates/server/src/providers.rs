use std::path::Path;
use std::sync::Arc;

use parley_core::nlu::remote::RemoteNlu;
use parley_core::nlu::{Nlu, RuleBasedNlu};
use parley_core::remote::{MissingEnv, RemoteConfig};
use parley_core::speech::remote::{RemoteRecognizer, RemoteSynthesizer};
use parley_core::speech::{SpeechRecognizer, SpeechSynthesizer, StubRecognizer, StubSynthesizer};

use crate::config::ProviderMode;

/// The three provider ports a session talks to.
#[derive(Clone)]
pub struct Providers {
    pub nlu: Arc<dyn Nlu>,
    pub asr: Arc<dyn SpeechRecognizer>,
    pub tts: Arc<dyn SpeechSynthesizer>,
}

impl std::fmt::Debug for Providers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Providers")
            .field("nlu", &self.nlu.name())
            .field("asr", &self.asr.name())
            .field("tts", &self.tts.name())
            .finish()
    }
}

impl Providers {
    /// Offline providers. Relative audio refs resolve against `audio_dir`,
    /// which is also where synthesized sidecars land.
    pub fn stub(audio_dir: &Path) -> Self {
        Self {
            nlu: Arc::new(RuleBasedNlu::default()),
            asr: Arc::new(StubRecognizer::with_base_dir(audio_dir)),
            tts: Arc::new(StubSynthesizer::writing_to(audio_dir)),
        }
    }

    pub fn live(config: RemoteConfig, audio_dir: &Path) -> Self {
        Self {
            nlu: Arc::new(RemoteNlu::new(config.clone())),
            asr: Arc::new(RemoteRecognizer::new(config.clone())),
            tts: Arc::new(RemoteSynthesizer::new(config, audio_dir)),
        }
    }

    /// Builds the providers for `mode`; live mode reads its settings from the
    /// environment and fails if a required variable is unset.
    pub fn for_mode(mode: ProviderMode, audio_dir: &Path) -> Result<Self, MissingEnv> {
        match mode {
            ProviderMode::Stub => Ok(Self::stub(audio_dir)),
            ProviderMode::Live => Ok(Self::live(RemoteConfig::from_env()?, audio_dir)),
        }
    }
}
