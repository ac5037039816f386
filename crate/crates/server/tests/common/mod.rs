//! Shared fixtures for the binary-level tests: the golden scripted user and
//! a helper that runs `parley serve` on a free port.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};

use serde_json::{json, Value};

/// Replies of the golden user, per state, used in order and then cycled.
/// Durations are chosen so the user speaks at a realistic pace.
const INTRO_NEW: &[&str] = &[
    "Hi, my name is Max.",
    "I'm doing well, thanks. And you?",
    "Anyway, I have been busy with work and some cooking.",
    "Yes, I go running most mornings before work.",
    "I think so, yes.",
];
const INTRO_RETURNING: &[&str] = &[
    "I have been good, thanks for asking!",
    "Mostly work, and I started a painting class.",
    "Yes, I still run a few times a week.",
];
const HEALTH: &[&str] = &[
    "I try to eat healthy, lots of vegetables and not much sugar.",
    "I run three times a week and lift weights on the weekend.",
    "Honestly I work too much, but I love going on vacation to relax.",
    "Usually about seven hours, which is fine for me.",
    "A big salad with salmon, I guess. What about you?",
];
const TRAVEL: &[&str] = &[
    "I'm from Vienna, in Austria. Where are you from?",
    "I would love to live in Lisbon, by the sea.",
    "I also want to visit Japan someday.",
    "You should walk along the river and eat the pastries.",
    "Maybe, I think solo travel sounds fun but a bit scary.",
    "The best trip was hiking in Norway with friends.",
    "The mountains, definitely.",
    "I like planning, so I know what to expect.",
];
const ENTERTAINMENT: &[&str] = &[
    "My favorite movie is Inception.",
    "Probably Cobb, he is so driven.",
    "I mostly enjoy science fiction. Do you like it too?",
    "I listen to Bohemian Rhapsody all the time.",
    "Right now I really like Queen.",
    "Yes, that sounds good, I will watch it!",
    "Yes, I have heard it, it's great.",
    "I'm watching a detective show at the moment.",
    "Not lately, but I want to go soon.",
];
const GENERAL: &[&str] = &[
    "That is a good question, I'm not sure.",
    "I would say yes, mostly.",
];
const FEEDBACK: &[&str] = &["Yes, please tell me the details."];
const DETAIL: &[&str] = &["Thank you, that helps."];
const SURVEY: &[&str] = &[
    "No, I don't think so.",
    "Maybe ask more about my hobbies.",
    "4",
];

fn words(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// The golden user: deterministic given the state sequence.
#[derive(Debug)]
pub struct GoldenUser {
    used: BTreeMap<String, usize>,
    pub rating: String,
}

impl GoldenUser {
    pub fn new() -> Self {
        Self {
            used: BTreeMap::new(),
            rating: "4".into(),
        }
    }

    pub fn with_rating(rating: &str) -> Self {
        Self {
            rating: rating.into(),
            ..Self::new()
        }
    }

    /// Next reply and its speaking time (about 130 words per minute).
    pub fn reply(&mut self, state: &str) -> (String, u64) {
        let lines = match state {
            "IntroNewUser" => INTRO_NEW,
            "IntroReturning" => INTRO_RETURNING,
            "Health" => HEALTH,
            "Travel" => TRAVEL,
            "Entertainment" => ENTERTAINMENT,
            "FeedbackDelivery" => FEEDBACK,
            "FeedbackDetail" => DETAIL,
            "Survey" => SURVEY,
            _ => GENERAL,
        };
        let n = self.used.entry(state.to_string()).or_default();
        let mut text = lines[*n % lines.len()].to_string();
        *n += 1;
        if state == "Survey" && text == "4" {
            text = self.rating.clone();
        }
        let ms = words(&text) * 60_000 / 130;
        (text, ms)
    }
}

/// A running `parley serve`, killed on drop.
pub struct Server {
    child: Child,
    pub base: String,
}

impl Server {
    pub fn start(store: &Path) -> Self {
        Self::start_with(store, &[])
    }

    pub fn start_with(store: &Path, extra: &[&str]) -> Self {
        let mut child = Command::new(env!("CARGO_BIN_EXE_parley"))
            .args(["serve", "--port", "0", "--providers", "stub", "--store"])
            .arg(store)
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn parley serve");
        let stdout = child.stdout.take().unwrap();
        let mut line = String::new();
        BufReader::new(stdout).read_line(&mut line).unwrap();
        let base = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected startup line {line:?}"))
            .to_string();
        Self { child, base }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Result of driving one session over HTTP.
#[derive(Debug, Clone)]
pub struct Conversation {
    pub session_id: String,
    pub greeting: String,
    /// State after every bot turn, greeting included.
    pub states: Vec<String>,
    pub bot_texts: Vec<String>,
    pub user_texts: Vec<String>,
    pub report: Value,
}

/// Plays the golden user against a server until the session ends.
pub fn converse(
    client: &reqwest::blocking::Client,
    server: &Server,
    name_hint: Option<&str>,
    user: &mut GoldenUser,
) -> Conversation {
    let body = match name_hint {
        Some(name) => json!({ "name_hint": name }),
        None => json!({}),
    };
    let start: Value = client
        .post(server.url("/sessions"))
        .json(&body)
        .send()
        .unwrap()
        .error_for_status()
        .unwrap()
        .json()
        .unwrap();
    let id = start["session_id"].as_str().unwrap().to_string();
    let greeting = start["bot_text"].as_str().unwrap().to_string();
    let mut states = vec![start["state"].as_str().unwrap().to_string()];
    let mut bot_texts = vec![greeting.clone()];
    let mut user_texts = Vec::new();
    for _ in 0..120 {
        let state = states.last().unwrap().clone();
        let (text, ms) = user.reply(&state);
        user_texts.push(text.clone());
        let turn: Value = client
            .post(server.url(&format!("/sessions/{id}/turn")))
            .json(&json!({ "text": text, "duration_ms": ms }))
            .send()
            .unwrap()
            .error_for_status()
            .unwrap()
            .json()
            .unwrap();
        states.push(turn["state"].as_str().unwrap().to_string());
        bot_texts.push(turn["bot_text"].as_str().unwrap().to_string());
        if turn["done"].as_bool().unwrap() {
            break;
        }
    }
    let report: Value = client
        .get(server.url(&format!("/sessions/{id}/report")))
        .send()
        .unwrap()
        .error_for_status()
        .unwrap()
        .json()
        .unwrap();
    Conversation {
        session_id: id,
        greeting,
        states,
        bot_texts,
        user_texts,
        report,
    }
}
