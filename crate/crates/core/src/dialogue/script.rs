//! Bot lines loaded from a TOML script, keyed by dialogue state.

use std::path::Path;

use serde::Deserialize;

use super::{DialogueError, SlotStore};

const DEFAULT_SCRIPT: &str = include_str!("../../data/dialogue/script.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecommendKind {
    Movie,
    Song,
}

/// One scripted bot question and the slot its answer fills.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prompt {
    pub text: String,
    #[serde(default)]
    pub slot: Option<String>,
    /// Fills `{recommendation}` from the catalog before asking.
    #[serde(default)]
    pub recommend: Option<RecommendKind>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntroNew {
    pub prompts: Vec<Prompt>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntroReturning {
    pub greeting: String,
    pub greeting_unrated: String,
    pub greeting_slot: Option<String>,
    pub prompts: Vec<Prompt>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicScript {
    pub prompts: Vec<Prompt>,
    #[serde(default)]
    pub extras: Vec<Prompt>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct General {
    pub followups: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bridges {
    pub health_to_travel: String,
    pub health_to_entertainment: String,
    pub travel_to_entertainment: String,
    pub entertainment_to_travel: String,
    pub to_feedback: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackLines {
    pub detail_offer: String,
    pub after_detail: String,
    pub skip_detail: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyScript {
    pub intro: String,
    pub questions: Vec<String>,
    pub rating: String,
    pub rating_retry: String,
    pub goodbye: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phrases {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub neutral: Vec<String>,
    pub unclear: Vec<String>,
    pub question_fallback: Vec<String>,
    pub recommend_again: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    pub intro_new: IntroNew,
    pub intro_returning: IntroReturning,
    pub health: TopicScript,
    pub travel: TopicScript,
    pub entertainment: TopicScript,
    pub general: General,
    pub bridges: Bridges,
    pub feedback: FeedbackLines,
    pub survey: SurveyScript,
    pub phrases: Phrases,
}

impl Script {
    pub fn defaults() -> Self {
        Self::from_toml(DEFAULT_SCRIPT).expect("bundled script is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, DialogueError> {
        let script: Self =
            toml::from_str(text).map_err(|e| DialogueError::Data(format!("script: {e}")))?;
        script.validate()?;
        Ok(script)
    }

    pub fn load(path: &Path) -> Result<Self, DialogueError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DialogueError::Data(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<(), DialogueError> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(DialogueError::Data(format!("script: {what} must not be empty")))
            }
        };
        need(!self.intro_new.prompts.is_empty(), "intro_new.prompts")?;
        need(!self.health.prompts.is_empty(), "health.prompts")?;
        need(!self.travel.prompts.is_empty(), "travel.prompts")?;
        need(!self.entertainment.prompts.is_empty(), "entertainment.prompts")?;
        need(!self.general.followups.is_empty(), "general.followups")?;
        need(!self.survey.questions.is_empty(), "survey.questions")?;
        let p = &self.phrases;
        for (list, name) in [
            (&p.positive, "phrases.positive"),
            (&p.negative, "phrases.negative"),
            (&p.neutral, "phrases.neutral"),
            (&p.unclear, "phrases.unclear"),
            (&p.question_fallback, "phrases.question_fallback"),
        ] {
            need(!list.is_empty(), name)?;
        }
        Ok(())
    }
}

/// Fills `{name}` and `{name|fallback}` placeholders from `vars` first, then
/// from slots. Unknown names without a fallback render as "that".
pub fn render(template: &str, slots: &SlotStore, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let Some(close) = rest[open..].find('}') else {
            out.push_str(&rest[open..]);
            return out;
        };
        let inner = &rest[open + 1..open + close];
        let (name, fallback) = match inner.split_once('|') {
            Some((n, f)) => (n.trim(), Some(f)),
            None => (inner.trim(), None),
        };
        let value = vars
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .or_else(|| slots.get(name))
            .or(fallback)
            .unwrap_or("that");
        out.push_str(value);
        rest = &rest[open + close + 1..];
    }
    out.push_str(rest);
    out
}
