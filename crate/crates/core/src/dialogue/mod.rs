//! Scripted small-talk dialogue: intro, health, travel and entertainment
//! topics, then feedback and a short survey.
//!
//! The flow is a fixed finite-state graph (see [`transition_table`]). Bot
//! wording lives in data files: the prompt script, the persona facts, and the
//! recommendation catalog.

mod catalog;
mod engine;
mod feedback;
mod persona;
pub mod script;
mod survey;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{Recommendation, RecommendationSource, StaticCatalog};
pub use engine::{DialogueContext, Engine};
pub use feedback::deliver_feedback;
pub use persona::{Persona, PersonaFact};
pub use script::Script;
pub use survey::{asked_questions, parse_rating, run_survey, SurveyStep};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DialogueError {
    #[error("the session has already ended")]
    SessionEnded,
    #[error("invalid dialogue data: {0}")]
    Data(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DialogueState {
    Start,
    IntroNewUser,
    IntroReturning,
    Health,
    Travel,
    Entertainment,
    FeedbackDelivery,
    FeedbackDetail,
    Survey,
    End,
}

impl DialogueState {
    pub const ALL: [DialogueState; 10] = [
        DialogueState::Start,
        DialogueState::IntroNewUser,
        DialogueState::IntroReturning,
        DialogueState::Health,
        DialogueState::Travel,
        DialogueState::Entertainment,
        DialogueState::FeedbackDelivery,
        DialogueState::FeedbackDetail,
        DialogueState::Survey,
        DialogueState::End,
    ];

    /// States whose user replies count toward the turn budget and metrics.
    pub fn is_conversational(self) -> bool {
        matches!(
            self,
            DialogueState::IntroNewUser
                | DialogueState::IntroReturning
                | DialogueState::Health
                | DialogueState::Travel
                | DialogueState::Entertainment
        )
    }
}

impl fmt::Display for DialogueState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Edges of the dialogue graph. Self-loops mean the state asks another
/// question of its own.
pub fn transition_table() -> &'static [(DialogueState, DialogueState)] {
    use DialogueState::*;
    &[
        (Start, IntroNewUser),
        (Start, IntroReturning),
        (IntroNewUser, IntroNewUser),
        (IntroNewUser, IntroReturning),
        (IntroNewUser, Health),
        (IntroReturning, IntroReturning),
        (IntroReturning, Health),
        (Health, Health),
        (Health, Travel),
        (Health, Entertainment),
        (Travel, Travel),
        (Travel, Entertainment),
        (Travel, FeedbackDelivery),
        (Entertainment, Entertainment),
        (Entertainment, Travel),
        (Entertainment, FeedbackDelivery),
        (FeedbackDelivery, FeedbackDelivery),
        (FeedbackDelivery, FeedbackDetail),
        (FeedbackDelivery, Survey),
        (FeedbackDetail, Survey),
        (Survey, Survey),
        (Survey, End),
    ]
}

/// Values captured from the user's answers, by slot name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlotStore(BTreeMap<String, String>);

impl SlotStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// `None` when the slot was never set.
    pub fn get(&self, slot: &str) -> Option<&str> {
        self.0.get(slot).map(String::as_str)
    }

    /// Sets or overwrites a slot. Blank values are ignored so a set slot is
    /// never empty.
    pub fn set(&mut self, slot: &str, value: &str) -> bool {
        let value = value.trim();
        if value.is_empty() {
            return false;
        }
        self.0.insert(slot.to_string(), value.to_string());
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// What the bot says next and where the dialogue goes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnPlan {
    pub bot_text: String,
    pub next_state: DialogueState,
    pub slots_to_set: Vec<(String, String)>,
    /// Whether the user's reply to this turn counts toward the budget and metrics.
    pub eligible_for_feedback: bool,
}

/// Minimum conversation length before feedback: a turn count or elapsed
/// time, whichever comes first. Once met it stays met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurnBudget {
    pub min_user_turns: u32,
    pub min_elapsed_ms: u64,
    #[serde(skip)]
    user_turns: u32,
    #[serde(skip)]
    elapsed_ms: u64,
    #[serde(skip)]
    met: bool,
}

impl Default for TurnBudget {
    fn default() -> Self {
        Self::new(24, 420_000)
    }
}

impl TurnBudget {
    pub fn new(min_user_turns: u32, min_elapsed_ms: u64) -> Self {
        Self {
            min_user_turns,
            min_elapsed_ms,
            user_turns: 0,
            elapsed_ms: 0,
            met: false,
        }
    }

    /// Records progress. Counters never move backwards.
    pub fn record(&mut self, user_turns: u32, elapsed_ms: u64) {
        self.user_turns = self.user_turns.max(user_turns);
        self.elapsed_ms = self.elapsed_ms.max(elapsed_ms);
        self.met = self.met
            || self.user_turns >= self.min_user_turns
            || self.elapsed_ms >= self.min_elapsed_ms;
    }

    pub fn met(&self) -> bool {
        self.met
    }

    pub fn user_turns(&self) -> u32 {
        self.user_turns
    }

    pub fn elapsed_ms(&self) -> u64 {
        self.elapsed_ms
    }
}
