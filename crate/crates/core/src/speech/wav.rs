//! RIFF/WAVE header parsing. Durations come from header arithmetic only; no
//! samples are decoded.

use std::fs::File;
use std::io::{BufReader, Read, Seek, SeekFrom};
use std::path::Path;

use super::SpeechError;

/// Capture parameters for recorded user audio.
pub const CAPTURE_SAMPLE_RATE: u32 = 44_100;
pub const CAPTURE_CHANNELS: u16 = 1;
pub const CAPTURE_BITS_PER_SAMPLE: u16 = 16;
/// Samples per buffer when recording; clients read audio in chunks of this size.
pub const CAPTURE_CHUNK_FRAMES: usize = 1_024;

const WAVE_FORMAT_PCM: u16 = 1;
const WAVE_FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavInfo {
    pub sample_rate: u32,
    pub channels: u16,
    pub bits_per_sample: u16,
    pub frames: u64,
}

impl WavInfo {
    /// Duration rounded to the nearest millisecond (halves round up).
    pub fn duration_ms(&self) -> u64 {
        let rate = u64::from(self.sample_rate);
        (self.frames * 1000 + rate / 2) / rate
    }

    pub fn duration_seconds(&self) -> f64 {
        self.frames as f64 / f64::from(self.sample_rate)
    }

    /// True for 16-bit mono PCM at 44.1 kHz, the accepted capture format.
    pub fn is_capture_format(&self) -> bool {
        self.sample_rate == CAPTURE_SAMPLE_RATE
            && self.channels == CAPTURE_CHANNELS
            && self.bits_per_sample == CAPTURE_BITS_PER_SAMPLE
    }

    pub fn require_capture_format(self) -> Result<Self, SpeechError> {
        if self.is_capture_format() {
            Ok(self)
        } else {
            Err(SpeechError::UnsupportedFormat(format!(
                "expected 16-bit mono PCM at {CAPTURE_SAMPLE_RATE} Hz, got {}-bit, {} channel(s) at {} Hz",
                self.bits_per_sample, self.channels, self.sample_rate
            )))
        }
    }
}

fn bad(msg: impl Into<String>) -> SpeechError {
    SpeechError::UnsupportedFormat(msg.into())
}

fn read_u16(buf: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([buf[at], buf[at + 1]])
}

fn read_u32(buf: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([buf[at], buf[at + 1], buf[at + 2], buf[at + 3]])
}

/// Parses the header of a PCM WAV stream.
pub fn parse<R: Read + Seek>(mut reader: R) -> Result<WavInfo, SpeechError> {
    let total_len = reader.seek(SeekFrom::End(0))?;
    reader.seek(SeekFrom::Start(0))?;

    let mut riff = [0u8; 12];
    reader
        .read_exact(&mut riff)
        .map_err(|_| bad("file too short for a RIFF header"))?;
    if &riff[0..4] != b"RIFF" || &riff[8..12] != b"WAVE" {
        return Err(bad("not a RIFF/WAVE file"));
    }

    let mut format: Option<(u16, u16, u32, u16, u16)> = None;
    let mut pos = 12u64;
    loop {
        let mut header = [0u8; 8];
        if reader.read_exact(&mut header).is_err() {
            return Err(bad("no data chunk"));
        }
        pos += 8;
        let id = [header[0], header[1], header[2], header[3]];
        let size = u64::from(read_u32(&header, 4));

        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(bad("fmt chunk too short"));
                }
                let mut body = vec![0u8; size as usize];
                reader
                    .read_exact(&mut body)
                    .map_err(|_| bad("truncated fmt chunk"))?;
                let mut tag = read_u16(&body, 0);
                if tag == WAVE_FORMAT_EXTENSIBLE && body.len() >= 26 {
                    tag = read_u16(&body, 24);
                }
                format = Some((
                    tag,
                    read_u16(&body, 2),
                    read_u32(&body, 4),
                    read_u16(&body, 12),
                    read_u16(&body, 14),
                ));
            }
            b"data" => {
                let (tag, channels, sample_rate, block_align, bits) =
                    format.ok_or_else(|| bad("data chunk before fmt chunk"))?;
                if tag != WAVE_FORMAT_PCM {
                    return Err(bad(format!("unsupported WAV encoding tag {tag}")));
                }
                if channels == 0 || sample_rate == 0 || bits == 0 {
                    return Err(bad("zero channels, rate, or sample width"));
                }
                let frame_bytes = u64::from(channels) * u64::from(bits).div_ceil(8);
                if u64::from(block_align) != frame_bytes {
                    return Err(bad("block alignment disagrees with channels and sample width"));
                }
                // Streaming writers leave the size as a placeholder; trust the file length.
                let available = total_len.saturating_sub(pos);
                let data_len = size.min(available);
                return Ok(WavInfo {
                    sample_rate,
                    channels,
                    bits_per_sample: bits,
                    frames: data_len / frame_bytes,
                });
            }
            _ => {
                let skip = size + (size & 1);
                reader.seek(SeekFrom::Current(skip as i64))?;
            }
        }
        pos += size + (size & 1);
    }
}

pub fn parse_file(path: &Path) -> Result<WavInfo, SpeechError> {
    let file = File::open(path).map_err(|e| SpeechError::Unreadable {
        uri: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse(BufReader::new(file))
}
