//! Speech ports backed by OpenAI-compatible audio endpoints.

use std::fs;
use std::io::Cursor;
use std::path::PathBuf;

use reqwest::blocking::multipart::{Form, Part};
use serde::Deserialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::{wav, AudioFormat, AudioRef, SpeechError, SpeechRecognizer, SpeechSynthesizer, Transcription};
use crate::remote::{Gate, RemoteConfig};

fn provider(e: impl ToString) -> SpeechError {
    SpeechError::Provider(e.to_string())
}

#[derive(Debug, Deserialize)]
struct TranscriptionBody {
    text: String,
}

/// Whisper-style recognizer. Text comes from the provider; duration comes
/// from the WAV header so pacing never depends on the remote side.
pub struct RemoteRecognizer {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl RemoteRecognizer {
    pub fn new(config: RemoteConfig) -> Self {
        Self {
            client: config.client(),
            gate: Gate::new(config.max_in_flight),
            config,
        }
    }
}

impl SpeechRecognizer for RemoteRecognizer {
    fn name(&self) -> &str {
        "remote"
    }

    fn transcribe(&self, audio: &AudioRef) -> Result<Transcription, SpeechError> {
        let path = audio.local_path().ok_or_else(|| SpeechError::Unreadable {
            uri: audio.uri.clone(),
            reason: "only local files can be uploaded".into(),
        })?;
        let bytes = fs::read(&path).map_err(|e| SpeechError::Unreadable {
            uri: audio.uri.clone(),
            reason: e.to_string(),
        })?;
        let (duration_ms, file_name, mime) = match audio.format {
            AudioFormat::Wav16Mono44100 => {
                let info = wav::parse(Cursor::new(&bytes))?.require_capture_format()?;
                (info.duration_ms(), "audio.wav", "audio/wav")
            }
            AudioFormat::Mp3 => (audio.duration_ms, "audio.mp3", "audio/mpeg"),
            AudioFormat::TextStub => {
                return Err(SpeechError::UnsupportedFormat("text stubs need the stub recognizer".into()))
            }
        };
        if duration_ms == 0 {
            return Ok(Transcription {
                text: String::new(),
                duration_ms,
            });
        }

        let part = Part::bytes(bytes).file_name(file_name).mime_str(mime).map_err(provider)?;
        let form = Form::new()
            .text("model", self.config.asr_model.clone())
            .text("response_format", "json")
            .part("file", part);
        let _permit = self.gate.acquire();
        let response = self
            .client
            .post(self.config.endpoint("audio/transcriptions"))
            .bearer_auth(&self.config.api_key)
            .multipart(form)
            .send()
            .map_err(provider)?;
        if !response.status().is_success() {
            return Err(provider(format!("HTTP {}", response.status())));
        }
        let body: TranscriptionBody = response.json().map_err(provider)?;
        Ok(Transcription {
            text: body.text.trim().to_string(),
            duration_ms,
        })
    }
}

/// Text-to-speech that stores WAV replies under an output directory.
pub struct RemoteSynthesizer {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
    out_dir: PathBuf,
}

impl RemoteSynthesizer {
    pub fn new(config: RemoteConfig, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            client: config.client(),
            gate: Gate::new(config.max_in_flight),
            config,
            out_dir: out_dir.into(),
        }
    }
}

impl SpeechSynthesizer for RemoteSynthesizer {
    fn name(&self) -> &str {
        "remote"
    }

    fn synthesize(&self, text: &str) -> Result<AudioRef, SpeechError> {
        if text.trim().is_empty() {
            return Err(SpeechError::EmptyText);
        }
        let body = json!({
            "model": self.config.tts_model,
            "voice": self.config.tts_voice,
            "input": text,
            "response_format": "wav",
        });
        let _permit = self.gate.acquire();
        let response = self
            .client
            .post(self.config.endpoint("audio/speech"))
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(provider)?;
        if !response.status().is_success() {
            return Err(provider(format!("HTTP {}", response.status())));
        }
        let bytes = response.bytes().map_err(provider)?;
        let info = wav::parse(Cursor::new(&bytes))?;

        let digest = Sha256::digest(text.as_bytes());
        let stem: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(format!("tts-{stem}.wav"));
        fs::write(&path, &bytes)?;
        Ok(AudioRef::new(
            path.display().to_string(),
            AudioFormat::Wav16Mono44100,
            info.duration_ms(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::remote::mock;

    fn wav_bytes(rate: u32, frames: u32) -> Vec<u8> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::new());
        let mut writer = hound::WavWriter::new(&mut cursor, spec).unwrap();
        for _ in 0..frames {
            writer.write_sample(0i16).unwrap();
        }
        writer.finalize().unwrap();
        cursor.into_inner()
    }

    #[test]
    fn transcription_uses_header_duration() {
        let dir = tempfile::tempdir().unwrap();
        let clip = dir.path().join("turn.wav");
        fs::write(&clip, wav_bytes(44_100, 66_150)).unwrap();
        let (base, _server) = mock::serve(vec![(
            200,
            "application/json",
            br#"{"text":" I live in Austin. "}"#.to_vec(),
        )]);
        let asr = RemoteRecognizer::new(RemoteConfig::new(base, "sk-test"));
        let t = asr
            .transcribe(&AudioRef::new(clip.display().to_string(), AudioFormat::Wav16Mono44100, 0))
            .unwrap();
        assert_eq!(t, Transcription { text: "I live in Austin.".into(), duration_ms: 1500 });
    }

    #[test]
    fn synthesized_wav_is_saved_with_duration() {
        let dir = tempfile::tempdir().unwrap();
        let (base, _server) = mock::serve(vec![(200, "audio/wav", wav_bytes(24_000, 48_000))]);
        let tts = RemoteSynthesizer::new(RemoteConfig::new(base, "sk-test"), dir.path());
        let audio = tts.synthesize("Where are you from?").unwrap();
        assert_eq!(audio.duration_ms, 2000);
        assert!(audio.local_path().unwrap().exists());
    }

    #[test]
    fn unreachable_provider_is_provider_error() {
        let dir = tempfile::tempdir().unwrap();
        let tts = RemoteSynthesizer::new(RemoteConfig::new(mock::refused(), "sk-test"), dir.path());
        assert!(matches!(tts.synthesize("hello"), Err(SpeechError::Provider(_))));
    }
}
