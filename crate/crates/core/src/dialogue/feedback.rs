//! Spoken rendering of a feedback report.

use crate::metrics::{ACKNOWLEDGMENT, AWKWARD, PACE, QUESTIONS, TICS};
use crate::types::{FeedbackReport, MetricVerdict, Verdict};

fn label(metric: &str) -> &'static str {
    match metric {
        AWKWARD => "your topic transitions",
        QUESTIONS => "how often you asked questions",
        PACE => "your speaking pace",
        TICS => "your repeated words",
        ACKNOWLEDGMENT => "how closely you matched my speaking style",
        _ => "one of the measures",
    }
}

fn detail_of(m: &MetricVerdict, key: &str) -> u64 {
    m.details
        .iter()
        .find(|(k, _)| k == key)
        .map_or(0, |(_, v)| *v)
}

/// Integral values print without a decimal point.
fn num(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.1}")
    }
}

/// "1 question", "3 questions".
fn count_of(n: impl std::fmt::Display, noun: &str) -> String {
    let n = n.to_string();
    if n == "1" {
        format!("{n} {noun}")
    } else {
        format!("{n} {noun}s")
    }
}

fn statistic(report: &FeedbackReport, m: &MetricVerdict) -> String {
    let t = &report.thresholds;
    if m.verdict == Verdict::Inconclusive {
        return format!("For {}, there was not enough data.", label(&m.metric_name));
    }
    match m.metric_name.as_str() {
        AWKWARD => format!(
            "You made {}; fewer than {} is the goal.",
            count_of(num(m.value), "awkward transition"),
            t.awkward_max
        ),
        QUESTIONS => format!(
            "You asked {} in {}, a ratio of {:.2}; {:.2} or more is the goal.",
            count_of(detail_of(m, "questions"), "question"),
            count_of(detail_of(m, "utterances"), "turn"),
            m.value,
            t.question_ratio_min
        ),
        PACE => format!(
            "You spoke at {} words per minute; the conversational range is {}–{}.",
            num(m.value),
            num(t.wpm_low),
            num(t.wpm_high)
        ),
        TICS => {
            let top: Vec<String> = m
                .details
                .iter()
                .take(3)
                .map(|(w, c)| format!("{w} ({c})"))
                .collect();
            format!(
                "Your most frequent words were {}. A word is flagged when used at least {} times and for {}% of your words.",
                top.join(", "),
                t.tic_min_count,
                num(t.tic_min_share * 100.0)
            )
        }
        ACKNOWLEDGMENT => format!(
            "Your style matching score was {:.2}; {} or more is the goal.",
            m.value,
            num(t.lsm_min)
        ),
        _ => format!("{}: {}.", m.metric_name, num(m.value)),
    }
}

/// One advice sentence per metric; with `detail`, each is followed by the
/// measured value and its threshold.
pub fn deliver_feedback(report: &FeedbackReport, detail: bool) -> String {
    let mut parts = Vec::new();
    for m in report.metrics() {
        if m.verdict == Verdict::Inconclusive {
            parts.push(format!("I could not compute {} this time.", label(&m.metric_name)));
        } else {
            parts.push(m.advice.clone());
        }
        if detail {
            parts.push(statistic(report, m));
        }
    }
    parts.join(" ")
}
