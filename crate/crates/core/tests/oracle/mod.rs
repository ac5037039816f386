//! Brute-force reference implementations of the five metrics.
//!
//! Deliberately shares no code with the library: its own tokenizer, its own
//! word-list file reader, and plain tuples instead of transcript types.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (is_user, text, start_ms, end_ms)
pub type Utt = (bool, String, u64, u64);
/// Frequency list plus flagged tokens.
pub type TicResult = (Vec<(String, u64)>, Vec<String>);

pub struct Lists {
    pub awkward: Vec<Vec<String>>,
    pub stopwords: HashSet<String>,
    pub categories: Vec<HashSet<String>>,
}

pub fn default_data_dir() -> PathBuf {
    // Works from this crate and from sibling crates that include this module.
    let here = Path::new(env!("CARGO_MANIFEST_DIR"));
    [here.join("data"), here.join("../core/data")]
        .into_iter()
        .find(|p| p.join("awkward.txt").exists())
        .expect("core data directory")
}

fn read_entries(path: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for raw in fs::read_to_string(path).unwrap().lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line.to_string());
    }
    out
}

pub fn load_lists(dir: &Path) -> Lists {
    let awkward = read_entries(&dir.join("awkward.txt"))
        .iter()
        .map(|p| tokens(p))
        .collect();
    let stopwords = read_entries(&dir.join("stopwords.txt")).into_iter().collect();
    let mut files: Vec<PathBuf> = fs::read_dir(dir.join("function_words"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    let categories = files
        .iter()
        .map(|f| read_entries(f).into_iter().collect())
        .collect();
    Lists {
        awkward,
        stopwords,
        categories,
    }
}

/// Character-at-a-time tokenizer: letters, digits and apostrophes form words;
/// apostrophes at word edges are dropped.
pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Vec<char> = Vec::new();
    let flush = |current: &mut Vec<char>, out: &mut Vec<String>| {
        while current.first() == Some(&'\'') {
            current.remove(0);
        }
        while current.last() == Some(&'\'') {
            current.pop();
        }
        if !current.is_empty() {
            let mut word = String::new();
            for c in current.iter() {
                for l in c.to_lowercase() {
                    word.push(l);
                }
            }
            out.push(word);
        }
        current.clear();
    };
    for c in text.chars() {
        if c == '\'' || c == '\u{2019}' {
            current.push('\'');
        } else if c.is_alphanumeric() {
            current.push(c);
        } else {
            flush(&mut current, &mut out);
        }
    }
    flush(&mut current, &mut out);
    out
}

fn user_texts(utts: &[Utt]) -> Vec<&Utt> {
    utts.iter().filter(|u| u.0 && !u.1.trim().is_empty()).collect()
}

fn bot_texts(utts: &[Utt]) -> Vec<&Utt> {
    utts.iter().filter(|u| !u.0 && !u.1.trim().is_empty()).collect()
}

/// Number of user utterances with an awkward phrase starting in the window.
pub fn awkward(utts: &[Utt], lists: &Lists, window: usize) -> Option<u64> {
    let users = user_texts(utts);
    if users.is_empty() {
        return None;
    }
    let mut count = 0;
    for u in users {
        let toks = tokens(&u.1);
        let mut hit = false;
        for phrase in &lists.awkward {
            for start in 0..window {
                if start + phrase.len() <= toks.len() && toks[start..start + phrase.len()] == phrase[..] {
                    hit = true;
                }
            }
        }
        if hit {
            count += 1;
        }
    }
    Some(count)
}

/// (questions, user utterances)
pub fn questions(utts: &[Utt]) -> Option<(u64, u64)> {
    let users = user_texts(utts);
    if users.is_empty() {
        return None;
    }
    let q = users.iter().filter(|u| u.1.contains('?')).count() as u64;
    Some((q, users.len() as u64))
}

pub fn wpm(utts: &[Utt]) -> Option<f64> {
    let users = user_texts(utts);
    let words: usize = users.iter().map(|u| tokens(&u.1).len()).sum();
    let ms: u64 = users.iter().map(|u| u.3 - u.2).sum();
    if ms == 0 {
        return None;
    }
    Some(words as f64 / (ms as f64 / 60_000.0))
}

/// Sorted frequency list and the flagged tokens.
pub fn tics(
    utts: &[Utt],
    lists: &Lists,
    min_count: u64,
    min_share: f64,
) -> Option<TicResult> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for u in user_texts(utts) {
        for t in tokens(&u.1) {
            if !lists.stopwords.contains(&t) {
                *counts.entry(t).or_insert(0) += 1;
                total += 1;
            }
        }
    }
    if total == 0 {
        return None;
    }
    let sorted = independent_sort(counts.into_iter().collect());
    let flagged = sorted
        .iter()
        .filter(|(_, c)| *c >= min_count && (*c as f64) / (total as f64) >= min_share)
        .map(|(t, _)| t.clone())
        .collect();
    Some((sorted, flagged))
}

/// Selection sort: highest count first, then lexicographically smallest.
pub fn independent_sort(mut items: Vec<(String, u64)>) -> Vec<(String, u64)> {
    let mut out = Vec::with_capacity(items.len());
    while !items.is_empty() {
        let mut best = 0;
        for i in 1..items.len() {
            let (a, b) = (&items[i], &items[best]);
            if a.1 > b.1 || (a.1 == b.1 && a.0 < b.0) {
                best = i;
            }
        }
        out.push(items.swap_remove(best));
    }
    out
}

pub fn lsm(utts: &[Utt], lists: &Lists) -> Option<f64> {
    let user: Vec<String> = user_texts(utts).iter().flat_map(|u| tokens(&u.1)).collect();
    let bot: Vec<String> = bot_texts(utts).iter().flat_map(|u| tokens(&u.1)).collect();
    if user.is_empty() || bot.is_empty() {
        return None;
    }
    let mut scores = Vec::new();
    for category in &lists.categories {
        let cu = user.iter().filter(|t| category.contains(*t)).count();
        let cb = bot.iter().filter(|t| category.contains(*t)).count();
        if cu + cb == 0 {
            continue;
        }
        let u = cu as f64 / user.len() as f64;
        let b = cb as f64 / bot.len() as f64;
        scores.push(1.0 - (u - b).abs() / (u + b + 0.0001));
    }
    if scores.is_empty() {
        return None;
    }
    Some(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Vocabulary for random transcripts: fillers, awkward openers, function
/// words, and content words.
pub const VOCAB: &[&str] = &[
    "anyway", "so", "yeah", "um", "uh", "moving", "on", "like", "basically", "movie", "music",
    "i", "you", "we", "it", "the", "a", "and", "but", "in", "at", "is", "was", "not", "never",
    "all", "some", "very", "really", "beach", "travel", "Austria", "I'm", "don't", "pizza",
    "run", "gym", "song", "what", "where", "whatever", "never", "mind",
];

/// A random transcript of at most 50 utterances with non-overlapping times.
pub fn random_transcript(seed: u64) -> Vec<Utt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=50);
    let mut t = 0u64;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let is_user = rng.gen_ratio(2, 3);
        let words = rng.gen_range(0..14);
        let mut text = String::new();
        for w in 0..words {
            if w > 0 {
                text.push_str(if rng.gen_ratio(1, 6) { ", " } else { " " });
            }
            text.push_str(VOCAB.choose(&mut rng).unwrap());
        }
        if rng.gen_ratio(1, 3) {
            text.push('?');
        } else if rng.gen_bool(0.5) {
            text.push('.');
        }
        let gap = rng.gen_range(0..500);
        let dur = if rng.gen_ratio(1, 10) { 0 } else { rng.gen_range(300..8300) };
        out.push((is_user, text, t + gap, t + gap + dur));
        t += gap + dur;
    }
    out
}
