//! The bot's fixed opinions, answered when the user asks about them.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use super::DialogueError;
use crate::metrics::tokenize;

const DEFAULT_PERSONA: &str = include_str!("../../data/dialogue/persona.toml");

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaFact {
    pub topic: String,
    pub statement: String,
    /// Word sets; a fact covers a question containing every word of any cue.
    pub cues: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Persona {
    facts: Vec<PersonaFact>,
}

impl Persona {
    pub fn defaults() -> Self {
        Self::from_toml(DEFAULT_PERSONA).expect("bundled persona is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, DialogueError> {
        let persona: Self =
            toml::from_str(text).map_err(|e| DialogueError::Data(format!("persona: {e}")))?;
        for fact in &persona.facts {
            if fact.statement.trim().is_empty() || fact.cues.iter().any(Vec::is_empty) {
                return Err(DialogueError::Data(format!(
                    "persona: fact {:?} needs a statement and non-empty cues",
                    fact.topic
                )));
            }
        }
        Ok(persona)
    }

    pub fn load(path: &Path) -> Result<Self, DialogueError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DialogueError::Data(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn facts(&self) -> &[PersonaFact] {
        &self.facts
    }

    /// Statement of the fact whose longest cue is contained in the question.
    /// Ties go to the fact listed first.
    pub fn answer(&self, question_topic: &str) -> Option<&str> {
        let words: BTreeSet<String> = tokenize(question_topic).into_iter().collect();
        let mut best: Option<(usize, &PersonaFact)> = None;
        for fact in &self.facts {
            let score = fact
                .cues
                .iter()
                .filter(|cue| cue.iter().all(|w| words.contains(w.as_str())))
                .map(Vec::len)
                .max();
            if let Some(score) = score {
                if best.is_none_or(|(b, _)| score > b) {
                    best = Some((score, fact));
                }
            }
        }
        best.map(|(_, fact)| fact.statement.as_str())
    }
}
