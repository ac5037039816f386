//! Chat-completion backed [`Nlu`] for OpenAI-compatible endpoints.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::json;

use super::{Intent, Interpretation, Nlu, NluError, Polarity, TopicCue, QUESTION_ENTITY};
use crate::remote::{Gate, RemoteConfig};

const PROMPT: &str = include_str!("../../data/nlu_prompt.txt");

#[derive(Debug, Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Debug, Deserialize)]
struct Message {
    content: String,
}

#[derive(Debug, Deserialize)]
struct RawInterpretation {
    intent: Intent,
    #[serde(default = "neutral")]
    polarity: Polarity,
    #[serde(default)]
    entities: BTreeMap<String, String>,
    #[serde(default)]
    topic_cues: BTreeSet<TopicCue>,
}

fn neutral() -> Polarity {
    Polarity::Neutral
}

pub struct RemoteNlu {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl RemoteNlu {
    pub fn new(config: RemoteConfig) -> Self {
        Self {
            client: config.client(),
            gate: Gate::new(config.max_in_flight),
            config,
        }
    }

    fn complete(&self, text: &str, expected: &[&str]) -> Result<RawInterpretation, NluError> {
        let body = json!({
            "model": self.config.nlu_model,
            "temperature": 0,
            "response_format": { "type": "json_object" },
            "messages": [
                { "role": "system", "content": PROMPT },
                { "role": "user", "content": json!({ "reply": text, "expected_slots": expected }).to_string() },
            ],
        });
        let _permit = self.gate.acquire();
        let response = self
            .client
            .post(self.config.endpoint("chat/completions"))
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    NluError::Timeout(self.config.timeout)
                } else {
                    NluError::Transport(e.to_string())
                }
            })?;
        let status = response.status();
        if !status.is_success() {
            return Err(NluError::Transport(format!("HTTP {status}")));
        }
        let completion: Completion = response
            .json()
            .map_err(|e| NluError::BadResponse(e.to_string()))?;
        let content = completion
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| NluError::BadResponse("no choices".into()))?
            .message
            .content;
        serde_json::from_str(&content).map_err(|e| NluError::BadResponse(e.to_string()))
    }
}

/// Keeps only requested slots whose values actually occur in the reply.
fn validate(raw: RawInterpretation, text: &str, expected: &[&str]) -> Interpretation {
    let lower = text.to_lowercase();
    let entities = raw
        .entities
        .into_iter()
        .filter(|(slot, _)| slot == QUESTION_ENTITY || expected.contains(&slot.as_str()))
        .map(|(slot, value)| (slot, value.trim().to_string()))
        .filter(|(_, value)| !value.is_empty() && lower.contains(&value.to_lowercase()))
        .collect();
    Interpretation {
        intent: raw.intent,
        polarity: raw.polarity,
        entities,
        topic_cues: raw.topic_cues,
    }
    .normalized()
}

impl Nlu for RemoteNlu {
    fn name(&self) -> &str {
        "remote"
    }

    fn interpret(&self, text: &str, expected: &[&str]) -> Result<Interpretation, NluError> {
        Ok(validate(self.complete(text, expected)?, text, expected))
    }

    fn extract_name(&self, text: &str) -> Result<Option<String>, NluError> {
        let interp = self.interpret(text, &["user_name"])?;
        Ok(interp.entity("user_name").map(str::to_string))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlu::interpret_with_fallback;
    use crate::remote::mock;

    fn completion(content: &str) -> Vec<u8> {
        json!({ "choices": [ { "message": { "role": "assistant", "content": content } } ] })
            .to_string()
            .into_bytes()
    }

    #[test]
    fn parses_and_validates_completion() {
        let content = json!({
            "intent": "Answer",
            "polarity": "Positive",
            "entities": { "origin_place": "Austin", "user_mood": "happy", "dream_destination": "Mars" },
            "topic_cues": ["travel"],
        })
        .to_string();
        let (base, server) = mock::serve(vec![(200, "application/json", completion(&content))]);
        let nlu = RemoteNlu::new(RemoteConfig::new(base, "sk-test"));
        let interp = nlu
            .interpret("I'm from Austin and I love it", &["origin_place", "dream_destination"])
            .unwrap();
        assert_eq!(interp.entity("origin_place"), Some("Austin"));
        // Not requested, and not in the text: both dropped.
        assert_eq!(interp.entity("user_mood"), None);
        assert_eq!(interp.entity("dream_destination"), None);
        assert!(interp.topic_cues.contains(&TopicCue::Travel));

        let request: serde_json::Value = serde_json::from_slice(&server.join().unwrap()[0]).unwrap();
        assert_eq!(request["model"], "gpt-4o-mini");
    }

    #[test]
    fn malformed_content_is_bad_response() {
        let (base, _server) = mock::serve(vec![(200, "application/json", completion("not json"))]);
        let nlu = RemoteNlu::new(RemoteConfig::new(base, "sk-test"));
        assert!(matches!(nlu.interpret("hello", &[]), Err(NluError::BadResponse(_))));
    }

    #[test]
    fn unreachable_provider_falls_back_to_rules() {
        let nlu = RemoteNlu::new(RemoteConfig::new(mock::refused(), "sk-test"));
        let understood = interpret_with_fallback(&nlu, "Yes, I love hiking", &[]);
        assert_eq!(understood.interpretation.intent, Intent::YesReply);
        assert!(understood.fallback_reason.unwrap().contains("remote failed"));
    }

    #[test]
    fn server_error_is_transport_error() {
        let (base, _server) = mock::serve(vec![(500, "text/plain", b"boom".to_vec())]);
        let nlu = RemoteNlu::new(RemoteConfig::new(base, "sk-test"));
        assert!(matches!(nlu.interpret("hello", &[]), Err(NluError::Transport(_))));
    }
}
