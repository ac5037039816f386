//! Speech recognition and synthesis ports.
//!
//! The engine only consumes finished audio: recording and playback belong to
//! the client. Every port reports exact durations so the pace metric has
//! real speaking time to work with.

#[cfg(feature = "remote")]
pub mod remote;
mod stub;
pub mod wav;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use stub::{parse_sidecar, render_sidecar, StubRecognizer, StubSynthesizer, TTS_TOKENS_PER_SECOND};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AudioFormat {
    #[serde(rename = "wav16-mono-44100")]
    Wav16Mono44100,
    #[serde(rename = "mp3")]
    Mp3,
    #[serde(rename = "text-stub")]
    TextStub,
}

impl AudioFormat {
    /// Guesses the format from a path's extension; anything unknown is a text stub.
    pub fn from_path(uri: &str) -> Self {
        let lower = uri.to_ascii_lowercase();
        if lower.ends_with(".wav") {
            AudioFormat::Wav16Mono44100
        } else if lower.ends_with(".mp3") {
            AudioFormat::Mp3
        } else {
            AudioFormat::TextStub
        }
    }
}

/// Reference to a piece of audio by path or URI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudioRef {
    pub uri: String,
    pub format: AudioFormat,
    pub duration_ms: u64,
}

impl AudioRef {
    pub fn new(uri: impl Into<String>, format: AudioFormat, duration_ms: u64) -> Self {
        Self {
            uri: uri.into(),
            format,
            duration_ms,
        }
    }

    /// Filesystem path for `file://` URIs and plain paths; `None` for other schemes.
    pub fn local_path(&self) -> Option<PathBuf> {
        if let Some(rest) = self.uri.strip_prefix("file://") {
            return Some(PathBuf::from(rest));
        }
        if self.uri.contains("://") || self.uri.starts_with("stub:") {
            return None;
        }
        Some(PathBuf::from(&self.uri))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcription {
    pub text: String,
    pub duration_ms: u64,
}

#[derive(Debug, Error)]
pub enum SpeechError {
    #[error("cannot read audio {uri}: {reason}")]
    Unreadable { uri: String, reason: String },
    #[error("unsupported audio: {0}")]
    UnsupportedFormat(String),
    #[error("cannot synthesize empty text")]
    EmptyText,
    #[error("speech provider failed: {0}")]
    Provider(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait SpeechRecognizer: Send + Sync {
    fn name(&self) -> &str;

    fn transcribe(&self, audio: &AudioRef) -> Result<Transcription, SpeechError>;
}

pub trait SpeechSynthesizer: Send + Sync {
    fn name(&self) -> &str;

    fn synthesize(&self, text: &str) -> Result<AudioRef, SpeechError>;
}

pub(crate) fn resolve(base: Option<&Path>, path: PathBuf) -> PathBuf {
    match base {
        Some(base) if path.is_relative() => base.join(path),
        _ => path,
    }
}
