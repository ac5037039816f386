use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{resolve, wav, AudioFormat, AudioRef, SpeechError, SpeechRecognizer, SpeechSynthesizer, Transcription};
use crate::metrics::tokenize;

/// Nominal pacing of stub speech: 2.5 tokens per second is 150 words per minute.
pub const TTS_TOKENS_PER_SECOND: f64 = 2.5;
const MS_PER_TOKEN: u64 = 400;

const DURATION_HEADER: &str = "duration_ms:";

/// Splits a sidecar file into its declared duration (if any) and transcript text.
///
/// ```text
/// duration_ms: 5000
/// hello there
/// ```
pub fn parse_sidecar(contents: &str) -> Result<(Option<u64>, String), SpeechError> {
    let mut lines = contents.lines();
    let mut duration = None;
    let mut body: Vec<&str> = Vec::new();
    if let Some(first) = lines.next() {
        match first.trim().strip_prefix(DURATION_HEADER) {
            Some(value) => {
                let parsed = value.trim().parse::<u64>().map_err(|_| {
                    SpeechError::UnsupportedFormat(format!("bad duration header {first:?}"))
                })?;
                duration = Some(parsed);
            }
            None => body.push(first),
        }
    }
    body.extend(lines);
    Ok((duration, body.join("\n").trim().to_string()))
}

pub fn render_sidecar(duration_ms: u64, text: &str) -> String {
    format!("{DURATION_HEADER} {duration_ms}\n{text}\n")
}

fn sidecar_for(audio: &Path) -> PathBuf {
    let mut name = audio.as_os_str().to_owned();
    name.push(".txt");
    PathBuf::from(name)
}

fn unreadable(uri: &str, reason: impl ToString) -> SpeechError {
    SpeechError::Unreadable {
        uri: uri.to_string(),
        reason: reason.to_string(),
    }
}

/// Offline recognizer that reads transcripts from sidecar files.
///
/// - `text-stub`: the reference points at the sidecar itself.
/// - WAV: duration comes from the header; text from `<path>.txt`, or empty
///   (silence) when there is no sidecar.
/// - MP3: text and duration both come from `<path>.txt`.
#[derive(Debug, Clone, Default)]
pub struct StubRecognizer {
    base_dir: Option<PathBuf>,
}

impl StubRecognizer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Relative audio paths resolve against `dir`.
    pub fn with_base_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            base_dir: Some(dir.into()),
        }
    }
}

impl SpeechRecognizer for StubRecognizer {
    fn name(&self) -> &str {
        "stub"
    }

    fn transcribe(&self, audio: &AudioRef) -> Result<Transcription, SpeechError> {
        let path = audio
            .local_path()
            .map(|p| resolve(self.base_dir.as_deref(), p))
            .ok_or_else(|| unreadable(&audio.uri, "stub recognizer only reads local files"))?;

        match audio.format {
            AudioFormat::TextStub => {
                let contents = fs::read_to_string(&path).map_err(|e| unreadable(&audio.uri, e))?;
                let (declared, text) = parse_sidecar(&contents)?;
                Ok(Transcription {
                    text,
                    duration_ms: declared.unwrap_or(audio.duration_ms),
                })
            }
            AudioFormat::Wav16Mono44100 => {
                let info = wav::parse_file(&path)?.require_capture_format()?;
                let sidecar = sidecar_for(&path);
                let text = if sidecar.exists() {
                    let contents =
                        fs::read_to_string(&sidecar).map_err(|e| unreadable(&audio.uri, e))?;
                    parse_sidecar(&contents)?.1
                } else {
                    String::new()
                };
                Ok(Transcription {
                    text,
                    duration_ms: info.duration_ms(),
                })
            }
            AudioFormat::Mp3 => {
                if !path.exists() {
                    return Err(unreadable(&audio.uri, "file not found"));
                }
                let contents = fs::read_to_string(sidecar_for(&path))
                    .map_err(|e| unreadable(&audio.uri, format!("missing sidecar: {e}")))?;
                let (declared, text) = parse_sidecar(&contents)?;
                Ok(Transcription {
                    text,
                    duration_ms: declared.unwrap_or(audio.duration_ms),
                })
            }
        }
    }
}

/// Offline synthesizer: "speaks" at a fixed 150 WPM and optionally writes the
/// text as a sidecar file that [`StubRecognizer`] can read back.
#[derive(Debug, Clone, Default)]
pub struct StubSynthesizer {
    out_dir: Option<PathBuf>,
}

impl StubSynthesizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn writing_to(dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: Some(dir.into()),
        }
    }

    pub fn estimate_ms(text: &str) -> u64 {
        tokenize(text).len() as u64 * MS_PER_TOKEN
    }
}

impl SpeechSynthesizer for StubSynthesizer {
    fn name(&self) -> &str {
        "stub"
    }

    fn synthesize(&self, text: &str) -> Result<AudioRef, SpeechError> {
        if text.trim().is_empty() {
            return Err(SpeechError::EmptyText);
        }
        let duration_ms = Self::estimate_ms(text);
        let digest = Sha256::digest(text.as_bytes());
        let stem: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        let file_name = format!("tts-{stem}.txt");

        let uri = match &self.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(&file_name);
                fs::write(&path, render_sidecar(duration_ms, text))?;
                path.display().to_string()
            }
            None => format!("stub:tts/{file_name}"),
        };
        Ok(AudioRef::new(uri, AudioFormat::TextStub, duration_ms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_stub_passthrough() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("turn.txt");
        fs::write(&path, "hello there").unwrap();
        let audio = AudioRef::new(path.display().to_string(), AudioFormat::TextStub, 5000);
        let t = StubRecognizer::new().transcribe(&audio).unwrap();
        assert_eq!(t, Transcription { text: "hello there".into(), duration_ms: 5000 });
    }

    #[test]
    fn declared_duration_wins_for_text_stub() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t.txt"), render_sidecar(2400, "I like the beach")).unwrap();
        let audio = AudioRef::new("t.txt", AudioFormat::TextStub, 0);
        let t = StubRecognizer::with_base_dir(dir.path()).transcribe(&audio).unwrap();
        assert_eq!(t.duration_ms, 2400);
        assert_eq!(t.text, "I like the beach");
    }

    #[test]
    fn missing_file_is_unreadable() {
        let audio = AudioRef::new("/nonexistent/clip.wav", AudioFormat::Wav16Mono44100, 0);
        assert!(matches!(
            StubRecognizer::new().transcribe(&audio),
            Err(SpeechError::Unreadable { .. })
        ));
        let remote = AudioRef::new("https://example.com/a.wav", AudioFormat::Wav16Mono44100, 0);
        assert!(StubRecognizer::new().transcribe(&remote).is_err());
    }

    #[test]
    fn synth_durations() {
        let tts = StubSynthesizer::new();
        assert_eq!(tts.synthesize("hi").unwrap().duration_ms, 400);
        let sentence = vec!["word"; 25].join(" ");
        assert_eq!(tts.synthesize(&sentence).unwrap().duration_ms, 10_000);
        assert!(matches!(tts.synthesize(""), Err(SpeechError::EmptyText)));
    }

    #[test]
    fn synth_output_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let tts = StubSynthesizer::writing_to(dir.path());
        let audio = tts.synthesize("Where are you from?").unwrap();
        let again = tts.synthesize("Where are you from?").unwrap();
        assert_eq!(audio, again);
        let t = StubRecognizer::new().transcribe(&audio).unwrap();
        assert_eq!(t.text, "Where are you from?");
        assert_eq!(t.duration_ms, 1600);
    }

    #[test]
    fn sidecar_without_header() {
        assert_eq!(parse_sidecar("just text\nmore").unwrap(), (None, "just text\nmore".into()));
        assert!(parse_sidecar("duration_ms: soon\nx").is_err());
    }
}
