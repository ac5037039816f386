//! Shared domain vocabulary: speakers, utterances, transcripts, and feedback reports.

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::Thresholds;

/// Who produced an utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    Bot,
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speaker::User => f.write_str("user"),
            Speaker::Bot => f.write_str("bot"),
        }
    }
}

/// One speaker turn with millisecond time bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: Speaker,
    pub text: String,
    pub start_ms: u64,
    pub end_ms: u64,
}

impl Utterance {
    pub fn new(
        speaker: Speaker,
        text: impl Into<String>,
        start_ms: u64,
        end_ms: u64,
    ) -> Result<Self, TranscriptError> {
        if end_ms < start_ms {
            return Err(TranscriptError::NegativeDuration { start_ms, end_ms });
        }
        Ok(Self {
            speaker,
            text: text.into(),
            start_ms,
            end_ms,
        })
    }

    pub fn user(text: impl Into<String>, start_ms: u64, end_ms: u64) -> Result<Self, TranscriptError> {
        Self::new(Speaker::User, text, start_ms, end_ms)
    }

    pub fn bot(text: impl Into<String>, start_ms: u64, end_ms: u64) -> Result<Self, TranscriptError> {
        Self::new(Speaker::Bot, text, start_ms, end_ms)
    }

    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }

    /// User turns with blank text never count towards metrics.
    pub fn is_admitted_user_turn(&self) -> bool {
        self.speaker == Speaker::User && !self.text.trim().is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("utterance ends before it starts ({start_ms} > {end_ms})")]
    NegativeDuration { start_ms: u64, end_ms: u64 },
    #[error("utterance starting at {start_ms} ms overlaps the previous one ending at {previous_end_ms} ms")]
    Overlap { start_ms: u64, previous_end_ms: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Ordered, non-overlapping utterances for one conversation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: String,
    utterances: Vec<Utterance>,
}

/// Canonical ordering key; zero-length placeholders sort ahead of a turn starting at the same instant.
fn order_key(u: &Utterance) -> (u64, u64) {
    (u.start_ms, u.end_ms)
}

impl Transcript {
    pub fn new(session_id: impl Into<String>) -> Self {
        Self {
            session_id: session_id.into(),
            utterances: Vec::new(),
        }
    }

    /// Builds a transcript from utterances in any order, sorting them canonically.
    pub fn from_unsorted(
        session_id: impl Into<String>,
        mut utterances: Vec<Utterance>,
    ) -> Result<Self, TranscriptError> {
        utterances.sort_by_key(order_key);
        let mut transcript = Self::new(session_id);
        for u in utterances {
            transcript.push(u)?;
        }
        Ok(transcript)
    }

    /// Appends an utterance; it must start no earlier than the previous one ends.
    pub fn push(&mut self, utterance: Utterance) -> Result<(), TranscriptError> {
        if utterance.end_ms < utterance.start_ms {
            return Err(TranscriptError::NegativeDuration {
                start_ms: utterance.start_ms,
                end_ms: utterance.end_ms,
            });
        }
        if let Some(last) = self.utterances.last() {
            if utterance.start_ms < last.end_ms || order_key(&utterance) < order_key(last) {
                return Err(TranscriptError::Overlap {
                    start_ms: utterance.start_ms,
                    previous_end_ms: last.end_ms,
                });
            }
        }
        self.utterances.push(utterance);
        Ok(())
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn into_utterances(self) -> Vec<Utterance> {
        self.utterances
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    /// User utterances admitted to metrics (non-blank text).
    pub fn user_turns(&self) -> impl Iterator<Item = &Utterance> {
        self.utterances.iter().filter(|u| u.is_admitted_user_turn())
    }

    /// Bot utterances that carry text.
    pub fn bot_turns(&self) -> impl Iterator<Item = &Utterance> {
        self.utterances
            .iter()
            .filter(|u| u.speaker == Speaker::Bot && !u.text.trim().is_empty())
    }

    /// End of the last utterance, or 0 for an empty transcript.
    pub fn end_ms(&self) -> u64 {
        self.utterances.last().map_or(0, |u| u.end_ms)
    }

    /// Parses the line-oriented transcript format: one JSON object per line.
    /// Blank lines are skipped.
    pub fn from_jsonl(session_id: impl Into<String>, input: &str) -> Result<Self, TranscriptError> {
        let mut transcript = Self::new(session_id);
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let utterance: Utterance =
                serde_json::from_str(line).map_err(|e| TranscriptError::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            transcript.push(utterance).map_err(|e| TranscriptError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(transcript)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for u in &self.utterances {
            // Utterance contains only strings and integers.
            out.push_str(&serde_json::to_string(u).expect("utterance serializes"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Good,
    NeedsWork,
    Inconclusive,
}

/// Result of one feedback metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVerdict {
    pub metric_name: String,
    pub value: f64,
    pub verdict: Verdict,
    pub advice: String,
    pub details: Vec<(String, u64)>,
}

impl MetricVerdict {
    pub fn inconclusive(metric_name: &str, reason: impl Into<String>) -> Self {
        Self {
            metric_name: metric_name.to_string(),
            value: 0.0,
            verdict: Verdict::Inconclusive,
            advice: reason.into(),
            details: Vec::new(),
        }
    }
}

/// The five metric results for one conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub awkward: MetricVerdict,
    pub questions: MetricVerdict,
    pub pace: MetricVerdict,
    pub tics: MetricVerdict,
    pub acknowledgment: MetricVerdict,
    /// Thresholds the verdicts were judged against.
    pub thresholds: Thresholds,
    pub generated_at: DateTime<Utc>,
}

impl FeedbackReport {
    pub fn metrics(&self) -> [&MetricVerdict; 5] {
        [
            &self.awkward,
            &self.questions,
            &self.pace,
            &self.tics,
            &self.acknowledgment,
        ]
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
