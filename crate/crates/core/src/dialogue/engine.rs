use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use super::catalog::{RecommendationSource, StaticCatalog};
use super::feedback::deliver_feedback;
use super::persona::Persona;
use super::script::{render, Prompt, RecommendKind, Script};
use super::survey::run_survey;
use super::{DialogueError, DialogueState, SlotStore, TurnBudget, TurnPlan};
use crate::metrics::tokenize;
use crate::nlu::{Intent, Interpretation, Polarity, TopicCue};
use crate::persistence::{KnownUsers, UserProfile};
use crate::types::FeedbackReport;

use DialogueState::*;

/// Words that turn a question back on the bot ("and you?", "what about you?").
const REDIRECT_WORDS: &[&str] = &["and", "what", "how", "about", "you", "yourself", "u"];

#[derive(Debug, Clone, PartialEq, Eq)]
struct Pending {
    text: String,
    slot: Option<String>,
    recommend: Option<RecommendKind>,
}

/// Mutable state of one conversation. Owned by a single session; turns are
/// applied strictly in order.
#[derive(Debug, Clone, Default)]
pub struct DialogueContext {
    state: Option<DialogueState>,
    slots: SlotStore,
    cursors: BTreeMap<DialogueState, usize>,
    extras: BTreeMap<DialogueState, usize>,
    completed: BTreeSet<DialogueState>,
    general_used: usize,
    pending: Option<Pending>,
    report: Option<FeedbackReport>,
    survey_answers: Vec<String>,
    rating: Option<u8>,
    recommended: Vec<String>,
    recommend_retry_used: bool,
    turn_index: usize,
    trace: Vec<DialogueState>,
    turn_sets: Vec<(String, String)>,
}

impl DialogueContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> DialogueState {
        self.state.unwrap_or(Start)
    }

    pub fn slots(&self) -> &SlotStore {
        &self.slots
    }

    pub fn report(&self) -> Option<&FeedbackReport> {
        self.report.as_ref()
    }

    pub fn survey_answers(&self) -> &[String] {
        &self.survey_answers
    }

    pub fn rating(&self) -> Option<u8> {
        self.rating
    }

    /// Distinct states visited, in order.
    pub fn trace(&self) -> &[DialogueState] {
        &self.trace
    }

    /// The question the bot is waiting on.
    pub fn pending_prompt(&self) -> Option<&str> {
        self.pending.as_ref().map(|p| p.text.as_str())
    }

    /// Slots the next user reply may fill.
    pub fn expected_slots(&self) -> Vec<&str> {
        self.pending
            .as_ref()
            .and_then(|p| p.slot.as_deref())
            .into_iter()
            .collect()
    }

    pub fn is_ended(&self) -> bool {
        self.state() == End
    }

    fn goto(&mut self, state: DialogueState) {
        self.state = Some(state);
        if self.trace.last() != Some(&state) {
            self.trace.push(state);
        }
    }

    fn set_slot(&mut self, slot: &str, value: &str) {
        if self.slots.set(slot, value) {
            self.turn_sets.push((slot.to_string(), value.trim().to_string()));
        }
    }

    fn pick<'a>(&self, list: &'a [String]) -> &'a str {
        &list[self.turn_index % list.len()]
    }
}

fn join(parts: &[&str]) -> String {
    parts
        .iter()
        .map(|p| p.trim())
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_redirect(question: &str) -> bool {
    let tokens = tokenize(question);
    !tokens.is_empty()
        && tokens.len() <= 4
        && tokens.iter().all(|t| REDIRECT_WORDS.contains(&t.as_str()))
}

/// The dialogue manager. Stateless between calls: everything about a
/// conversation lives in its [`DialogueContext`].
pub struct Engine {
    script: Script,
    persona: Persona,
    catalog: Arc<dyn RecommendationSource>,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(
            Script::defaults(),
            Persona::defaults(),
            Arc::new(StaticCatalog::defaults()),
        )
    }
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").finish_non_exhaustive()
    }
}

impl Engine {
    pub fn new(script: Script, persona: Persona, catalog: Arc<dyn RecommendationSource>) -> Self {
        Self {
            script,
            persona,
            catalog,
        }
    }

    /// Loads `script.toml`, `persona.toml` and `catalog.toml` from `dir`;
    /// missing files fall back to the bundled versions.
    pub fn from_dir(dir: &Path) -> Result<Self, DialogueError> {
        let script = match dir.join("script.toml") {
            p if p.exists() => Script::load(&p)?,
            _ => Script::defaults(),
        };
        let persona = match dir.join("persona.toml") {
            p if p.exists() => Persona::load(&p)?,
            _ => Persona::defaults(),
        };
        let catalog = match dir.join("catalog.toml") {
            p if p.exists() => StaticCatalog::load(&p)?,
            _ => StaticCatalog::defaults(),
        };
        Ok(Self::new(script, persona, Arc::new(catalog)))
    }

    pub fn script(&self) -> &Script {
        &self.script
    }

    pub fn persona_answer(&self, question_topic: &str) -> Option<&str> {
        self.persona.answer(question_topic)
    }

    /// Opens a conversation. A hint naming a registered user gets the
    /// returning-user greeting; anyone else is asked for their name.
    pub fn start_session(
        &self,
        user_name_hint: Option<&str>,
        users: &dyn KnownUsers,
    ) -> (DialogueContext, TurnPlan) {
        let mut ctx = DialogueContext::new();
        ctx.goto(Start);
        let profile = user_name_hint
            .filter(|h| !h.trim().is_empty())
            .and_then(|h| users.find_user(h));
        let plan = match profile {
            Some(profile) => self.welcome_back(&mut ctx, &profile),
            None => {
                ctx.goto(IntroNewUser);
                let text = self.ask_main(&mut ctx, IntroNewUser);
                self.plan(&mut ctx, text)
            }
        };
        (ctx, plan)
    }

    /// Switches to the returning-user greeting for a recognized user.
    pub fn welcome_back(&self, ctx: &mut DialogueContext, profile: &UserProfile) -> TurnPlan {
        ctx.set_slot("user_name", &profile.display_name);
        ctx.goto(IntroReturning);
        let intro = &self.script.intro_returning;
        let text = match profile.last_rating {
            Some(r) => render(&intro.greeting, &ctx.slots, &[("last_rating", &r.to_string())]),
            None => render(&intro.greeting_unrated, &ctx.slots, &[]),
        };
        ctx.pending = Some(Pending {
            text: text.clone(),
            slot: intro.greeting_slot.clone(),
            recommend: None,
        });
        self.plan(ctx, text)
    }

    /// Applies one user reply. `report` is called once, when the dialogue
    /// first reaches feedback.
    pub fn advance(
        &self,
        ctx: &mut DialogueContext,
        user_text: &str,
        interpretation: &Interpretation,
        budget: &TurnBudget,
        report: impl FnOnce() -> FeedbackReport,
    ) -> Result<TurnPlan, DialogueError> {
        let state = ctx.state();
        if state == End {
            return Err(DialogueError::SessionEnded);
        }
        ctx.turn_index += 1;
        ctx.turn_sets.clear();

        let text = match state {
            Start => {
                ctx.goto(IntroNewUser);
                self.ask_main(ctx, IntroNewUser)
            }
            IntroNewUser | IntroReturning | Health | Travel | Entertainment => {
                self.converse(ctx, interpretation, budget, report)
            }
            FeedbackDelivery => self.after_feedback(ctx, interpretation),
            FeedbackDetail => {
                let thanks = ctx.pick(&self.script.phrases.neutral).to_string();
                self.enter_survey(ctx, &thanks, false)
            }
            Survey => self.survey_turn(ctx, user_text),
            End => unreachable!(),
        };
        Ok(self.plan(ctx, text))
    }

    fn plan(&self, ctx: &mut DialogueContext, bot_text: String) -> TurnPlan {
        let next_state = ctx.state();
        TurnPlan {
            bot_text,
            next_state,
            slots_to_set: std::mem::take(&mut ctx.turn_sets),
            eligible_for_feedback: next_state.is_conversational(),
        }
    }

    fn topic(&self, state: DialogueState) -> (&[Prompt], &[Prompt]) {
        match state {
            IntroNewUser => (&self.script.intro_new.prompts, &[]),
            IntroReturning => (&self.script.intro_returning.prompts, &[]),
            Health => (&self.script.health.prompts, &self.script.health.extras),
            Travel => (&self.script.travel.prompts, &self.script.travel.extras),
            Entertainment => (
                &self.script.entertainment.prompts,
                &self.script.entertainment.extras,
            ),
            _ => (&[], &[]),
        }
    }

    fn main_left(&self, ctx: &DialogueContext, state: DialogueState) -> bool {
        ctx.cursors.get(&state).copied().unwrap_or(0) < self.topic(state).0.len()
    }

    fn extra_left(&self, ctx: &DialogueContext, state: DialogueState) -> bool {
        ctx.extras.get(&state).copied().unwrap_or(0) < self.topic(state).1.len()
    }

    /// Asks the next main prompt of `state`.
    fn ask_main(&self, ctx: &mut DialogueContext, state: DialogueState) -> String {
        let cursor = ctx.cursors.entry(state).or_default();
        let prompt = self.topic(state).0[*cursor].clone();
        *cursor += 1;
        self.ask(ctx, &prompt)
    }

    fn ask_extra(&self, ctx: &mut DialogueContext, state: DialogueState) -> String {
        let cursor = ctx.extras.entry(state).or_default();
        let prompt = self.topic(state).1[*cursor].clone();
        *cursor += 1;
        self.ask(ctx, &prompt)
    }

    fn ask_general(&self, ctx: &mut DialogueContext) -> String {
        let followups = &self.script.general.followups;
        let text = followups[ctx.general_used % followups.len()].clone();
        ctx.general_used += 1;
        ctx.pending = Some(Pending {
            text: text.clone(),
            slot: None,
            recommend: None,
        });
        text
    }

    /// Next question within `state`: main prompts, then extras, then general.
    fn ask_within(&self, ctx: &mut DialogueContext, state: DialogueState) -> String {
        if self.main_left(ctx, state) {
            self.ask_main(ctx, state)
        } else if self.extra_left(ctx, state) {
            self.ask_extra(ctx, state)
        } else {
            self.ask_general(ctx)
        }
    }

    fn ask(&self, ctx: &mut DialogueContext, prompt: &Prompt) -> String {
        let text = match prompt.recommend {
            Some(kind) => self.render_recommendation(ctx, kind, &prompt.text),
            None => render(&prompt.text, &ctx.slots, &[]),
        };
        ctx.pending = Some(Pending {
            text: text.clone(),
            slot: prompt.slot.clone(),
            recommend: prompt.recommend,
        });
        text
    }

    fn render_recommendation(&self, ctx: &mut DialogueContext, kind: RecommendKind, template: &str) -> String {
        let hint = ctx.slots.get("favorite_genre").map(str::to_string);
        // Never suggest what the user already named as a favorite.
        let mut exclude = ctx.recommended.clone();
        exclude.extend(
            ["favorite_movie", "favorite_song"]
                .iter()
                .filter_map(|slot| ctx.slots.get(slot).map(str::to_string)),
        );
        let pick = self.catalog.recommend(kind, hint.as_deref(), &exclude);
        let spoken = match pick {
            Some(rec) => {
                let slot = match kind {
                    RecommendKind::Movie => "recommended_movie",
                    RecommendKind::Song => "recommended_song",
                };
                ctx.set_slot(slot, &rec.title);
                ctx.recommended.push(rec.title);
                rec.spoken
            }
            None => "something new".to_string(),
        };
        render(template, &ctx.slots, &[("recommendation", &spoken)])
    }

    fn reaction(&self, ctx: &DialogueContext, interp: &Interpretation, pending: Option<&Pending>) -> String {
        let phrases = &self.script.phrases;
        if let Some(question) = interp.question() {
            let topic = match pending {
                Some(p) if is_redirect(question) => p.text.as_str(),
                _ => question,
            };
            return self
                .persona
                .answer(topic)
                .unwrap_or_else(|| ctx.pick(&phrases.question_fallback))
                .to_string();
        }
        let list = match interp.polarity {
            Polarity::Positive => &phrases.positive,
            Polarity::Negative => &phrases.negative,
            Polarity::Neutral => &phrases.neutral,
        };
        ctx.pick(list).to_string()
    }

    fn converse(
        &self,
        ctx: &mut DialogueContext,
        interp: &Interpretation,
        budget: &TurnBudget,
        report: impl FnOnce() -> FeedbackReport,
    ) -> String {
        let state = ctx.state();
        let pending = ctx.pending.clone();

        if interp.intent == Intent::Unclear {
            let sorry = ctx.pick(&self.script.phrases.unclear).to_string();
            let next = if self.main_left(ctx, state) || self.extra_left(ctx, state) {
                self.ask_within(ctx, state)
            } else {
                pending.as_ref().map(|p| p.text.clone()).unwrap_or_else(|| self.ask_general(ctx))
            };
            return join(&[&sorry, &next]);
        }

        if let Some(slot) = pending.as_ref().and_then(|p| p.slot.as_deref()) {
            if let Some(value) = interp.entity(slot) {
                ctx.set_slot(slot, value);
            }
        }

        if let Some(kind) = pending.as_ref().and_then(|p| p.recommend) {
            if interp.intent == Intent::NoReply && !ctx.recommend_retry_used {
                ctx.recommend_retry_used = true;
                let template = self.script.phrases.recommend_again.clone();
                let text = self.render_recommendation(ctx, kind, &template);
                ctx.pending = Some(Pending {
                    text: text.clone(),
                    slot: pending.as_ref().and_then(|p| p.slot.clone()),
                    recommend: Some(kind),
                });
                return text;
            }
        }

        let reaction = self.reaction(ctx, interp, pending.as_ref());
        let next = match state {
            IntroNewUser | IntroReturning => {
                if self.main_left(ctx, state) {
                    self.ask_main(ctx, state)
                } else {
                    ctx.goto(Health);
                    self.ask_main(ctx, Health)
                }
            }
            Health => {
                if self.main_left(ctx, Health) {
                    self.ask_main(ctx, Health)
                } else {
                    ctx.completed.insert(Health);
                    let cues = &interp.topic_cues;
                    let travel_first =
                        cues.contains(&TopicCue::Travel) && !cues.contains(&TopicCue::Entertainment);
                    let bridges = &self.script.bridges;
                    if travel_first {
                        self.enter(ctx, Travel, &bridges.health_to_travel)
                    } else {
                        self.enter(ctx, Entertainment, &bridges.health_to_entertainment)
                    }
                }
            }
            _ => self.topic_step(ctx, interp, budget, report),
        };
        join(&[&reaction, &next])
    }

    fn bridge(&self, from: DialogueState) -> &str {
        match from {
            Travel => &self.script.bridges.travel_to_entertainment,
            _ => &self.script.bridges.entertainment_to_travel,
        }
    }

    fn enter(&self, ctx: &mut DialogueContext, target: DialogueState, bridge: &str) -> String {
        ctx.goto(target);
        let question = self.ask_within(ctx, target);
        join(&[bridge, &question])
    }

    fn topic_step(
        &self,
        ctx: &mut DialogueContext,
        interp: &Interpretation,
        budget: &TurnBudget,
        report: impl FnOnce() -> FeedbackReport,
    ) -> String {
        let current = ctx.state();
        let other = if current == Travel { Entertainment } else { Travel };

        // A movie mention mid-travel jumps over before entertainment has started.
        if current == Travel
            && interp.topic_cues.contains(&TopicCue::Entertainment)
            && !ctx.completed.contains(&Entertainment)
            && !ctx.cursors.contains_key(&Entertainment)
        {
            return self.enter(ctx, Entertainment, self.bridge(Travel));
        }
        if self.main_left(ctx, current) {
            return self.ask_main(ctx, current);
        }
        ctx.completed.insert(current);
        if budget.met() {
            return self.enter_feedback(ctx, report());
        }
        if !ctx.completed.contains(&other) {
            return self.enter(ctx, other, self.bridge(current));
        }
        // Both topics done but the budget is not: stay put with extras, then
        // general follow-ups.
        if self.extra_left(ctx, current) {
            return self.ask_extra(ctx, current);
        }
        self.ask_general(ctx)
    }

    fn enter_feedback(&self, ctx: &mut DialogueContext, report: FeedbackReport) -> String {
        ctx.goto(FeedbackDelivery);
        let lines = &self.script.feedback;
        let text = join(&[
            &self.script.bridges.to_feedback,
            &deliver_feedback(&report, false),
            &lines.detail_offer,
        ]);
        ctx.report = Some(report);
        ctx.pending = Some(Pending {
            text: lines.detail_offer.clone(),
            slot: None,
            recommend: None,
        });
        text
    }

    fn after_feedback(&self, ctx: &mut DialogueContext, interp: &Interpretation) -> String {
        let lines = &self.script.feedback;
        match interp.intent {
            Intent::Unclear => join(&[ctx.pick(&self.script.phrases.unclear), &lines.detail_offer]),
            Intent::YesReply | Intent::RequestDetail => {
                ctx.goto(FeedbackDetail);
                let detail = ctx
                    .report
                    .as_ref()
                    .map(|r| deliver_feedback(r, true))
                    .unwrap_or_default();
                ctx.pending = Some(Pending {
                    text: lines.after_detail.clone(),
                    slot: None,
                    recommend: None,
                });
                join(&[&detail, &lines.after_detail])
            }
            _ => {
                let skip = lines.skip_detail.clone();
                self.enter_survey(ctx, &skip, true)
            }
        }
    }

    fn enter_survey(&self, ctx: &mut DialogueContext, prefix: &str, with_intro: bool) -> String {
        ctx.goto(Survey);
        ctx.survey_answers.clear();
        let first = run_survey(&self.script.survey, &[]).plan.bot_text;
        ctx.pending = Some(Pending {
            text: first.clone(),
            slot: None,
            recommend: None,
        });
        let intro = if with_intro { self.script.survey.intro.as_str() } else { "" };
        join(&[prefix, intro, &first])
    }

    fn survey_turn(&self, ctx: &mut DialogueContext, user_text: &str) -> String {
        ctx.survey_answers.push(user_text.trim().to_string());
        let step = run_survey(&self.script.survey, &ctx.survey_answers);
        if step.plan.next_state == End {
            ctx.rating = step.rating;
            if let Some(r) = step.rating {
                ctx.set_slot("survey_rating", &r.to_string());
            }
            ctx.pending = None;
            ctx.goto(End);
            return render(&self.script.survey.goodbye, &ctx.slots, &[]);
        }
        ctx.pending = Some(Pending {
            text: step.plan.bot_text.clone(),
            slot: None,
            recommend: None,
        });
        step.plan.bot_text
    }
}
