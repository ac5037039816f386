//! End-of-session survey: fixed questions plus a 1–5 rating with one retry.

use super::script::SurveyScript;
use super::{DialogueState, TurnPlan};

/// Where the survey stands after a list of answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyStep {
    pub plan: TurnPlan,
    /// Parsed rating once the survey has ended; absent if never parseable.
    pub rating: Option<u8>,
}

/// Reads a 1–5 rating from free text: a digit or a number word.
pub fn parse_rating(text: &str) -> Option<u8> {
    const WORDS: [&str; 5] = ["one", "two", "three", "four", "five"];
    let lower = text.to_lowercase();
    let digits: Vec<u32> = lower.chars().filter_map(|c| c.to_digit(10)).collect();
    if let [d] = digits.as_slice() {
        return (1..=5).contains(d).then_some(*d as u8);
    }
    if !digits.is_empty() {
        return None;
    }
    let words: Vec<&str> = lower
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .collect();
    let found: Vec<u8> = words
        .iter()
        .filter_map(|w| WORDS.iter().position(|n| n == w))
        .map(|i| i as u8 + 1)
        .collect();
    match found.as_slice() {
        [n] => Some(*n),
        _ => None,
    }
}

/// The question each answer responded to, in order.
pub fn asked_questions(script: &SurveyScript, answers: usize) -> Vec<&str> {
    let mut asked: Vec<&str> = script.questions.iter().map(String::as_str).collect();
    asked.push(&script.rating);
    asked.push(&script.rating_retry);
    asked.truncate(answers);
    asked
}

/// Decides the next survey turn from the answers given so far. Pure: the
/// same answers always yield the same step.
pub fn run_survey(script: &SurveyScript, answers: &[String]) -> SurveyStep {
    let n = answers.len();
    let q = script.questions.len();
    let ask = |text: &str| SurveyStep {
        plan: TurnPlan {
            bot_text: text.to_string(),
            next_state: DialogueState::Survey,
            slots_to_set: Vec::new(),
            eligible_for_feedback: false,
        },
        rating: None,
    };
    let end = |rating: Option<u8>| SurveyStep {
        plan: TurnPlan {
            bot_text: String::new(),
            next_state: DialogueState::End,
            slots_to_set: rating
                .map(|r| vec![("survey_rating".to_string(), r.to_string())])
                .unwrap_or_default(),
            eligible_for_feedback: false,
        },
        rating,
    };

    if n < q {
        ask(&script.questions[n])
    } else if n == q {
        ask(&script.rating)
    } else if n == q + 1 {
        match parse_rating(&answers[q]) {
            Some(r) => end(Some(r)),
            None => ask(&script.rating_retry),
        }
    } else {
        end(parse_rating(&answers[q + 1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::script::Script;

    fn answers(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn first_question() {
        let s = Script::defaults().survey;
        let step = run_survey(&s, &[]);
        assert_eq!(step.plan.bot_text, "Did I say anything wrong during the conversation?");
        assert_eq!(step.plan.next_state, DialogueState::Survey);
    }

    #[test]
    fn rating_ends_survey() {
        let s = Script::defaults().survey;
        let step = run_survey(&s, &answers(&["no", "no", "5"]));
        assert_eq!(step.plan.next_state, DialogueState::End);
        assert_eq!(step.rating, Some(5));
    }

    #[test]
    fn unparseable_rating_retried_once() {
        let s = Script::defaults().survey;
        let retry = run_survey(&s, &answers(&["no", "no", "banana"]));
        assert_eq!(retry.plan.next_state, DialogueState::Survey);
        assert_eq!(retry.plan.bot_text, s.rating_retry);
        let done = run_survey(&s, &answers(&["no", "no", "banana", "banana"]));
        assert_eq!(done.plan.next_state, DialogueState::End);
        assert_eq!(done.rating, None);
        let fixed = run_survey(&s, &answers(&["no", "no", "banana", "four"]));
        assert_eq!(fixed.rating, Some(4));
    }

    #[test]
    fn rating_parser() {
        assert_eq!(parse_rating("5"), Some(5));
        assert_eq!(parse_rating("I'd say a 4."), Some(4));
        assert_eq!(parse_rating("Three"), Some(3));
        assert_eq!(parse_rating("7"), None);
        assert_eq!(parse_rating("45"), None);
        assert_eq!(parse_rating("banana"), None);
        assert_eq!(parse_rating("one or two"), None);
    }
}
