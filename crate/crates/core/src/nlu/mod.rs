//! Understanding of user turns: intent, polarity, entities, and topic cues.
//!
//! [`RuleBasedNlu`] is the offline default. Remote providers implement the
//! same [`Nlu`] trait and are wrapped with [`interpret_with_fallback`] so a
//! failed call degrades to the rule-based result instead of ending a session.

mod rules;
#[cfg(feature = "remote")]
pub mod remote;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rules::{RuleBasedNlu, SlotKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Intent {
    Answer,
    Question,
    YesReply,
    NoReply,
    RequestDetail,
    Unclear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicCue {
    Travel,
    Entertainment,
    Health,
}

/// Entity key holding the normalized question the user asked, if any.
pub const QUESTION_ENTITY: &str = "question";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub intent: Intent,
    pub polarity: Polarity,
    pub entities: BTreeMap<String, String>,
    pub topic_cues: BTreeSet<TopicCue>,
}

impl Interpretation {
    pub fn unclear() -> Self {
        Self {
            intent: Intent::Unclear,
            polarity: Polarity::Neutral,
            entities: BTreeMap::new(),
            topic_cues: BTreeSet::new(),
        }
    }

    pub fn new(intent: Intent) -> Self {
        Self {
            intent,
            ..Self::unclear()
        }
    }

    pub fn with_entity(mut self, slot: &str, value: &str) -> Self {
        self.entities.insert(slot.to_string(), value.to_string());
        self
    }

    pub fn with_cue(mut self, cue: TopicCue) -> Self {
        self.topic_cues.insert(cue);
        self
    }

    pub fn with_polarity(mut self, polarity: Polarity) -> Self {
        self.polarity = polarity;
        self
    }

    pub fn entity(&self, slot: &str) -> Option<&str> {
        self.entities.get(slot).map(String::as_str)
    }

    pub fn question(&self) -> Option<&str> {
        self.entity(QUESTION_ENTITY)
    }

    /// Restores the structural invariants: an unclear reading carries no entities.
    pub fn normalized(mut self) -> Self {
        if self.intent == Intent::Unclear {
            self.entities.clear();
        }
        self
    }
}

#[derive(Debug, Error)]
pub enum NluError {
    #[error("provider request failed: {0}")]
    Transport(String),
    #[error("provider timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("provider returned an unusable response: {0}")]
    BadResponse(String),
}

/// A source of interpretations. Implementations must be deterministic for a
/// fixed input and safe to call concurrently.
pub trait Nlu: Send + Sync {
    fn name(&self) -> &str;

    fn interpret(&self, text: &str, expected: &[&str]) -> Result<Interpretation, NluError>;

    fn extract_name(&self, text: &str) -> Result<Option<String>, NluError>;
}

/// Interpretation plus a note when the primary provider failed.
#[derive(Debug, Clone)]
pub struct Understood {
    pub interpretation: Interpretation,
    pub fallback_reason: Option<String>,
}

/// Asks `primary`, falling back to the rule-based provider on any failure.
pub fn interpret_with_fallback(primary: &dyn Nlu, text: &str, expected: &[&str]) -> Understood {
    match primary.interpret(text, expected) {
        Ok(interpretation) => Understood {
            interpretation: interpretation.normalized(),
            fallback_reason: None,
        },
        Err(err) => {
            tracing::warn!(provider = primary.name(), error = %err, "nlu fell back to rules");
            Understood {
                interpretation: RuleBasedNlu::default().interpret_text(text, expected),
                fallback_reason: Some(format!("{} failed: {err}", primary.name())),
            }
        }
    }
}
