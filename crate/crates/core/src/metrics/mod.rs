//! Conversation-skill metrics computed over a transcript.
//!
//! Each metric reads the admitted user turns (and, for style matching, the
//! bot turns) and returns a [`MetricVerdict`]. When a metric's inputs are
//! missing the verdict is `Inconclusive`; no metric ever fails.

mod tokenize;
mod wordlists;

use std::collections::HashMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{FeedbackReport, MetricVerdict, Transcript, Verdict};

pub use tokenize::tokenize;
pub use wordlists::{parse_list, WordListError, WordLists};

pub const AWKWARD: &str = "awkward_transitions";
pub const QUESTIONS: &str = "question_ratio";
pub const PACE: &str = "words_per_minute";
pub const TICS: &str = "verbal_tics";
pub const ACKNOWLEDGMENT: &str = "language_style_matching";

/// Smoothing term in the per-category style-matching score.
pub const LSM_EPSILON: f64 = 0.0001;

/// Tokens that make an utterance read as a question when the interrogative
/// heuristic is enabled.
const INTERROGATIVE_OPENERS: &[&str] = &[
    "who", "what", "when", "where", "why", "how", "which", "whose", "do", "does", "did", "are",
    "is", "was", "were", "can", "could", "would", "will", "should", "have", "has", "may",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Good strictly below this many awkward transitions per session.
    pub awkward_max: u32,
    /// Number of leading tokens in which an awkward phrase may start.
    pub awkward_window: usize,
    /// Good at or above this share of question-bearing utterances.
    pub question_ratio_min: f64,
    /// Also treat utterances opening with a wh-word or auxiliary as questions.
    pub interrogative_heuristic: bool,
    pub wpm_low: f64,
    pub wpm_high: f64,
    /// Good at or above this style-matching score.
    pub lsm_min: f64,
    pub tic_min_count: u32,
    pub tic_min_share: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            awkward_max: 10,
            awkward_window: 3,
            question_ratio_min: 0.39,
            interrogative_heuristic: false,
            wpm_low: 120.0,
            wpm_high: 150.0,
            lsm_min: 0.8,
            tic_min_count: 5,
            tic_min_share: 0.03,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("invalid threshold {name}: {reason}")]
pub struct ThresholdError {
    pub name: &'static str,
    pub reason: String,
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), ThresholdError> {
        let fail = |name, reason: &str| {
            Err(ThresholdError {
                name,
                reason: reason.to_string(),
            })
        };
        let finite_positive = |v: f64| v.is_finite() && v > 0.0;
        if self.awkward_max == 0 {
            return fail("awkward_max", "must be > 0");
        }
        if self.awkward_window == 0 {
            return fail("awkward_window", "must be > 0");
        }
        if !(self.question_ratio_min > 0.0 && self.question_ratio_min < 1.0) {
            return fail("question_ratio_min", "must lie in (0, 1)");
        }
        if !finite_positive(self.wpm_low) || !finite_positive(self.wpm_high) {
            return fail("wpm_low/wpm_high", "must be positive");
        }
        if self.wpm_low >= self.wpm_high {
            return fail("wpm_low", "must be below wpm_high");
        }
        if !(self.lsm_min > 0.0 && self.lsm_min <= 1.0) {
            return fail("lsm_min", "must lie in (0, 1]");
        }
        if self.tic_min_count == 0 {
            return fail("tic_min_count", "must be > 0");
        }
        if !finite_positive(self.tic_min_share) {
            return fail("tic_min_share", "must be positive");
        }
        Ok(())
    }
}

fn sort_details(details: &mut [(String, u64)]) {
    details.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

fn quoted_list(items: &[&str]) -> String {
    items
        .iter()
        .map(|s| format!("\"{s}\""))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Counts user utterances that open with a listed awkward transition.
pub fn count_awkward_transitions(
    transcript: &Transcript,
    lists: &WordLists,
    thresholds: &Thresholds,
) -> MetricVerdict {
    let mut utterances = 0usize;
    let mut awkward = 0u64;
    let mut per_phrase: HashMap<&str, u64> = HashMap::new();

    for utterance in transcript.user_turns() {
        utterances += 1;
        let tokens = tokenize(&utterance.text);
        let window = thresholds.awkward_window.min(tokens.len());
        let mut hit = false;
        for (phrase, phrase_tokens) in lists.awkward_phrases() {
            let found = (0..window).any(|start| tokens[start..].starts_with(phrase_tokens));
            if found {
                hit = true;
                *per_phrase.entry(phrase).or_default() += 1;
            }
        }
        if hit {
            awkward += 1;
        }
    }

    if utterances == 0 {
        return MetricVerdict::inconclusive(
            AWKWARD,
            "No user turns were recorded, so transitions could not be checked.",
        );
    }

    let mut details: Vec<(String, u64)> = per_phrase
        .into_iter()
        .map(|(p, c)| (p.to_string(), c))
        .collect();
    sort_details(&mut details);

    let good = awkward < u64::from(thresholds.awkward_max);
    let advice = if good {
        "Your topic transitions were smooth.".to_string()
    } else {
        let top: Vec<&str> = details.iter().take(3).map(|(p, _)| p.as_str()).collect();
        format!(
            "You often switched topics abruptly with phrases like {}. Try linking the new topic to something your partner just said.",
            quoted_list(&top)
        )
    };

    MetricVerdict {
        metric_name: AWKWARD.to_string(),
        value: awkward as f64,
        verdict: if good { Verdict::Good } else { Verdict::NeedsWork },
        advice,
        details,
    }
}

fn is_question(text: &str, thresholds: &Thresholds) -> bool {
    if text.contains('?') {
        return true;
    }
    thresholds.interrogative_heuristic
        && tokenize(text)
            .first()
            .is_some_and(|t| INTERROGATIVE_OPENERS.contains(&t.as_str()))
}

/// Share of user utterances that contain a question.
pub fn question_ratio(transcript: &Transcript, thresholds: &Thresholds) -> MetricVerdict {
    let mut total = 0u64;
    let mut questions = 0u64;
    for utterance in transcript.user_turns() {
        total += 1;
        if is_question(&utterance.text, thresholds) {
            questions += 1;
        }
    }
    if total == 0 {
        return MetricVerdict::inconclusive(
            QUESTIONS,
            "No user turns were recorded, so questions could not be counted.",
        );
    }

    let ratio = questions as f64 / total as f64;
    let good = ratio >= thresholds.question_ratio_min;
    let advice = if good {
        "You asked your partner plenty of questions, which keeps a conversation engaging."
    } else {
        "Try asking more questions. Showing curiosity about your partner makes them like talking with you."
    };
    MetricVerdict {
        metric_name: QUESTIONS.to_string(),
        value: ratio,
        verdict: if good { Verdict::Good } else { Verdict::NeedsWork },
        advice: advice.to_string(),
        details: vec![("questions".into(), questions), ("utterances".into(), total)],
    }
}

/// Speaking pace over the user's recorded speaking time.
pub fn words_per_minute(transcript: &Transcript, thresholds: &Thresholds) -> MetricVerdict {
    let mut tokens = 0u64;
    let mut duration_ms = 0u64;
    for utterance in transcript.user_turns() {
        tokens += tokenize(&utterance.text).len() as u64;
        duration_ms += utterance.duration_ms();
    }
    if duration_ms == 0 {
        return MetricVerdict::inconclusive(
            PACE,
            "Speaking time was not recorded, so your pace could not be measured.",
        );
    }

    let wpm = tokens as f64 * 60_000.0 / duration_ms as f64;
    let (verdict, advice) = if wpm < thresholds.wpm_low {
        (
            Verdict::NeedsWork,
            "You spoke a bit slowly. Try to speak a bit faster and add more substance to each answer.",
        )
    } else if wpm > thresholds.wpm_high {
        (
            Verdict::NeedsWork,
            "You spoke quickly. Slow down a little so your partner can follow along.",
        )
    } else {
        (
            Verdict::Good,
            "Your speaking pace was right in the natural conversational range.",
        )
    };
    MetricVerdict {
        metric_name: PACE.to_string(),
        value: wpm,
        verdict,
        advice: advice.to_string(),
        details: vec![("tokens".into(), tokens), ("duration_ms".into(), duration_ms)],
    }
}

/// Flags overused content words in the user's speech.
pub fn detect_tics(
    transcript: &Transcript,
    lists: &WordLists,
    thresholds: &Thresholds,
) -> MetricVerdict {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for utterance in transcript.user_turns() {
        for token in tokenize(&utterance.text) {
            if lists.is_stopword(&token) {
                continue;
            }
            total += 1;
            *counts.entry(token).or_default() += 1;
        }
    }
    if total == 0 {
        return MetricVerdict::inconclusive(
            TICS,
            "There were no content words to analyze for repeated words.",
        );
    }

    let mut details: Vec<(String, u64)> = counts.into_iter().collect();
    sort_details(&mut details);

    let flagged: Vec<&str> = details
        .iter()
        .filter(|(_, count)| {
            *count >= u64::from(thresholds.tic_min_count)
                && *count as f64 / total as f64 >= thresholds.tic_min_share
        })
        .map(|(token, _)| token.as_str())
        .collect();

    let (verdict, advice) = if flagged.is_empty() {
        (
            Verdict::Good,
            "You used a varied vocabulary without leaning on any one word.".to_string(),
        )
    } else {
        (
            Verdict::NeedsWork,
            format!(
                "You leaned on {} quite a lot. Try varying your wording.",
                quoted_list(&flagged)
            ),
        )
    };
    MetricVerdict {
        metric_name: TICS.to_string(),
        value: flagged.len() as f64,
        verdict,
        advice,
        details,
    }
}

/// Language style matching between the user and the bot over function-word categories.
pub fn lsm_score(
    transcript: &Transcript,
    lists: &WordLists,
    thresholds: &Thresholds,
) -> MetricVerdict {
    let categories = lists.category_count();
    let tally = |texts: &mut dyn Iterator<Item = &str>| {
        let mut per_category = vec![0u64; categories];
        let mut total = 0u64;
        for text in texts {
            for token in tokenize(text) {
                total += 1;
                if let Some(idx) = lists.category_index(&token) {
                    per_category[idx] += 1;
                }
            }
        }
        (per_category, total)
    };
    let (user_counts, user_total) = tally(&mut transcript.user_turns().map(|u| u.text.as_str()));
    let (bot_counts, bot_total) = tally(&mut transcript.bot_turns().map(|u| u.text.as_str()));

    if user_total == 0 || bot_total == 0 {
        return MetricVerdict::inconclusive(
            ACKNOWLEDGMENT,
            "Both sides of the conversation are needed to compare speaking styles.",
        );
    }

    let mut sum = 0.0;
    let mut active = 0usize;
    let mut details = Vec::new();
    for (idx, name) in lists.function_word_categories().keys().enumerate() {
        let (cu, cb) = (user_counts[idx], bot_counts[idx]);
        if cu == 0 && cb == 0 {
            continue;
        }
        let u = cu as f64 / user_total as f64;
        let b = cb as f64 / bot_total as f64;
        sum += 1.0 - (u - b).abs() / (u + b + LSM_EPSILON);
        active += 1;
        details.push((format!("user:{name}"), cu));
        details.push((format!("bot:{name}"), cb));
    }
    if active == 0 {
        return MetricVerdict::inconclusive(
            ACKNOWLEDGMENT,
            "Neither side used any function words, so styles could not be compared.",
        );
    }

    let lsm = (sum / active as f64).clamp(0.0, 1.0);
    let good = lsm >= thresholds.lsm_min;
    let advice = if good {
        "You matched your partner's speaking style well, a sign you were paying attention."
    } else {
        "Show more attention to your partner by acknowledging and building on what they said before."
    };
    MetricVerdict {
        metric_name: ACKNOWLEDGMENT.to_string(),
        value: lsm,
        verdict: if good { Verdict::Good } else { Verdict::NeedsWork },
        advice: advice.to_string(),
        details,
    }
}

/// Runs all five metrics, stamping the report with the current time.
pub fn build_report(
    transcript: &Transcript,
    lists: &WordLists,
    thresholds: &Thresholds,
) -> FeedbackReport {
    build_report_at(transcript, lists, thresholds, Utc::now())
}

pub fn build_report_at(
    transcript: &Transcript,
    lists: &WordLists,
    thresholds: &Thresholds,
    generated_at: DateTime<Utc>,
) -> FeedbackReport {
    FeedbackReport {
        awkward: count_awkward_transitions(transcript, lists, thresholds),
        questions: question_ratio(transcript, thresholds),
        pace: words_per_minute(transcript, thresholds),
        tics: detect_tics(transcript, lists, thresholds),
        acknowledgment: lsm_score(transcript, lists, thresholds),
        thresholds: thresholds.clone(),
        generated_at,
    }
}
