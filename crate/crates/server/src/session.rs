//! One conversation: dialogue context, the growing transcript, and the
//! virtual clock that times it.
//!
//! Time advances only by speech. A bot turn lasts as long as its synthesized
//! audio; a user turn lasts as long as the recognized audio, or the declared
//! `duration_ms` of a text turn. Text turns without a duration are recorded
//! with zero length, so pace stays inconclusive for purely typed sessions.

use chrono::Utc;
use parley_core::dialogue::{asked_questions, DialogueContext, DialogueError, DialogueState, Engine, TurnBudget, TurnPlan};
use parley_core::metrics::build_report;
use parley_core::nlu::interpret_with_fallback;
use parley_core::persistence::{KnownUsers, PersistenceError, RegistryStore, SurveyAnswer, SurveyRecord, UserRegistry};
use parley_core::speech::{AudioRef, StubSynthesizer};
use parley_core::types::TranscriptError;
use parley_core::{FeedbackReport, Thresholds, Transcript, Utterance, WordLists};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::providers::Providers;

/// Everything sessions share: engine, metric settings, providers and store.
#[derive(Debug)]
pub struct Runtime {
    pub engine: Engine,
    pub lists: WordLists,
    pub thresholds: Thresholds,
    pub budget: TurnBudget,
    pub providers: Providers,
    /// Without a store nobody is recognized and nothing is persisted.
    pub store: Option<RegistryStore>,
    no_users: UserRegistry,
}

impl Runtime {
    pub fn new(
        engine: Engine,
        lists: WordLists,
        thresholds: Thresholds,
        budget: TurnBudget,
        providers: Providers,
        store: Option<RegistryStore>,
    ) -> Self {
        Self {
            engine,
            lists,
            thresholds,
            budget,
            providers,
            store,
            no_users: UserRegistry::new(),
        }
    }

    fn users(&self) -> &dyn KnownUsers {
        match &self.store {
            Some(store) => store,
            None => &self.no_users,
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session has ended")]
    Ended,
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error("could not persist session: {0}")]
    Persistence(#[from] PersistenceError),
}

/// A user reply: typed text or a reference to recorded audio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TurnInput {
    Text { text: String, duration_ms: Option<u64> },
    Audio(AudioRef),
}

/// What the client shows after a turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnOutcome {
    pub bot_text: String,
    pub state: DialogueState,
    pub done: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_ref: Option<AudioRef>,
}

#[derive(Debug)]
pub struct Session {
    ctx: DialogueContext,
    transcript: Transcript,
    budget: TurnBudget,
    clock_ms: u64,
    eligible_replies: u32,
    awaiting_eligible: bool,
    persisted: bool,
}

impl Session {
    /// Opens a conversation and speaks the greeting.
    pub fn start(rt: &Runtime, id: &str, name_hint: Option<&str>) -> Result<(Self, TurnOutcome), SessionError> {
        let (ctx, plan) = rt.engine.start_session(name_hint, rt.users());
        let mut session = Self {
            ctx,
            transcript: Transcript::new(id),
            budget: rt.budget,
            clock_ms: 0,
            eligible_replies: 0,
            awaiting_eligible: plan.eligible_for_feedback,
            persisted: false,
        };
        let audio_ref = session.speak(rt, &plan.bot_text)?;
        let outcome = session.outcome(plan.bot_text, audio_ref);
        Ok((session, outcome))
    }

    pub fn id(&self) -> &str {
        &self.transcript.session_id
    }

    pub fn state(&self) -> DialogueState {
        self.ctx.state()
    }

    pub fn is_ended(&self) -> bool {
        self.ctx.is_ended()
    }

    pub fn trace(&self) -> &[DialogueState] {
        self.ctx.trace()
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn context(&self) -> &DialogueContext {
        &self.ctx
    }

    pub fn report(&self) -> Option<&FeedbackReport> {
        self.ctx.report()
    }

    pub fn budget(&self) -> &TurnBudget {
        &self.budget
    }

    /// Transcribes (if needed), interprets and advances one turn.
    pub fn turn(&mut self, rt: &Runtime, input: TurnInput) -> Result<TurnOutcome, SessionError> {
        if self.is_ended() {
            return Err(SessionError::Ended);
        }
        let (text, duration_ms) = match input {
            TurnInput::Text { text, duration_ms } => (text, duration_ms.unwrap_or(0)),
            TurnInput::Audio(audio) => match rt.providers.asr.transcribe(&audio) {
                Ok(t) => (t.text, t.duration_ms),
                Err(err) => {
                    tracing::warn!(session = self.id(), error = %err, "transcription failed");
                    return self.reprompt(rt);
                }
            },
        };
        if text.trim().is_empty() {
            // Silence still takes time.
            self.clock_ms += duration_ms;
            return self.reprompt(rt);
        }

        let start = self.clock_ms;
        self.clock_ms += duration_ms;
        self.transcript.push(Utterance::user(text.clone(), start, self.clock_ms)?)?;
        if self.awaiting_eligible {
            self.eligible_replies += 1;
        }
        self.budget.record(self.eligible_replies, self.clock_ms);

        let before = self.ctx.state();
        let expected = self.ctx.expected_slots();
        let interp = interpret_with_fallback(rt.providers.nlu.as_ref(), &text, &expected).interpretation;
        let transcript = &self.transcript;
        let mut plan = rt.engine.advance(&mut self.ctx, &text, &interp, &self.budget, || {
            build_report(transcript, &rt.lists, &rt.thresholds)
        })?;
        if let Some(switched) = self.recognize_returning(rt, before, &plan) {
            plan = switched;
        }
        self.awaiting_eligible = plan.eligible_for_feedback;

        let audio_ref = self.speak(rt, &plan.bot_text)?;
        if self.is_ended() {
            self.persist(rt)?;
        }
        Ok(self.outcome(plan.bot_text, audio_ref))
    }

    /// A name given during the new-user intro that the registry knows turns
    /// the intro into the returning-user greeting.
    fn recognize_returning(&mut self, rt: &Runtime, before: DialogueState, plan: &TurnPlan) -> Option<TurnPlan> {
        if before != DialogueState::IntroNewUser || plan.next_state != DialogueState::IntroNewUser {
            return None;
        }
        let (_, name) = plan.slots_to_set.iter().find(|(slot, _)| slot == "user_name")?;
        let profile = rt.users().find_user(name)?;
        Some(rt.engine.welcome_back(&mut self.ctx, &profile))
    }

    fn reprompt(&mut self, rt: &Runtime) -> Result<TurnOutcome, SessionError> {
        let unclear = &rt.engine.script().phrases.unclear;
        let apology = unclear
            .get(self.transcript.len() % unclear.len().max(1))
            .map_or("Sorry, I didn't catch that.", String::as_str);
        let text = match self.ctx.pending_prompt() {
            Some(prompt) => format!("{apology} {prompt}"),
            None => apology.to_string(),
        };
        let audio_ref = self.speak(rt, &text)?;
        Ok(self.outcome(text, audio_ref))
    }

    /// Appends a bot utterance lasting as long as its synthesized audio.
    fn speak(&mut self, rt: &Runtime, text: &str) -> Result<Option<AudioRef>, SessionError> {
        if text.trim().is_empty() {
            return Ok(None);
        }
        let (duration_ms, audio_ref) = match rt.providers.tts.synthesize(text) {
            Ok(audio) => (audio.duration_ms, Some(audio)),
            Err(err) => {
                tracing::warn!(session = self.id(), error = %err, "synthesis failed; continuing with text only");
                (StubSynthesizer::estimate_ms(text), None)
            }
        };
        let start = self.clock_ms;
        self.clock_ms += duration_ms;
        self.transcript.push(Utterance::bot(text, start, self.clock_ms)?)?;
        Ok(audio_ref)
    }

    fn persist(&mut self, rt: &Runtime) -> Result<(), SessionError> {
        let Some(store) = &rt.store else {
            return Ok(());
        };
        if self.persisted {
            return Ok(());
        }
        let answers = self.ctx.survey_answers();
        let now = Utc::now();
        let survey = SurveyRecord {
            answers: asked_questions(&rt.engine.script().survey, answers.len())
                .into_iter()
                .zip(answers)
                .map(|(question, answer)| SurveyAnswer {
                    question: question.to_string(),
                    answer: answer.clone(),
                    timestamp: now,
                })
                .collect(),
            rating: self.ctx.rating(),
        };
        let name = self.ctx.slots().get("user_name");
        store.record_session(name, &self.transcript, self.ctx.report(), &survey)?;
        self.persisted = true;
        Ok(())
    }

    fn outcome(&self, bot_text: String, audio_ref: Option<AudioRef>) -> TurnOutcome {
        TurnOutcome {
            bot_text,
            state: self.state(),
            done: self.is_ended(),
            audio_ref,
        }
    }
}
