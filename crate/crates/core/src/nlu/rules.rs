use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Intent, Interpretation, Nlu, NluError, Polarity, TopicCue, QUESTION_ENTITY};

/// How the rule-based provider extracts a value for a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Name,
    Mood,
    Frequency,
    YesNo,
    Place,
    Title,
    Free,
}

const FILLERS: &[&str] = &["oh", "um", "uh", "well", "hmm", "ah", "so", "like", "okay", "ok"];

const YES: &[&str] = &[
    "yes", "yeah", "yep", "yup", "yea", "sure", "definitely", "absolutely", "certainly", "totally",
    "ya", "affirmative", "course",
];

const NO: &[&str] = &["no", "nope", "nah", "never", "not"];

const DETAIL: &[&str] = &[
    "metrics", "metric", "statistics", "stats", "numbers", "details", "detail", "underlying",
    "breakdown", "specifics", "scores",
];

const QUESTION_OPENERS: &[&str] = &[
    "who", "what", "when", "where", "why", "how", "which", "whose", "do", "does", "did", "are",
    "is", "can", "could", "would", "will", "have", "has", "should",
];

const POSITIVE: &[&str] = &[
    "good", "great", "love", "loved", "like", "enjoy", "enjoyed", "awesome", "amazing", "fun",
    "happy", "nice", "fantastic", "wonderful", "excellent", "glad", "excited", "best", "favorite",
    "cool", "relaxing", "relaxed", "beautiful", "fine", "well", "perfect", "interesting",
];

const NEGATIVE: &[&str] = &[
    "bad", "terrible", "awful", "hate", "hated", "sad", "tired", "stressed", "stressful", "crying",
    "cry", "sick", "boring", "bored", "worst", "angry", "upset", "anxious", "lonely", "exhausted",
    "hard", "difficult", "depressed", "miserable", "annoying", "horrible", "sucks", "rough",
];

const NEGATORS: &[&str] = &[
    "not", "don't", "dont", "never", "no", "isn't", "wasn't", "didn't", "can't", "won't",
    "doesn't", "aren't",
];

const TRAVEL_CUES: &[&str] = &[
    "travel", "traveling", "travelling", "trip", "trips", "vacation", "vacations", "holiday",
    "visit", "visited", "visiting", "country", "countries", "city", "abroad", "flight", "fly",
    "beach", "beaches", "tourist", "backpacking", "destination", "passport", "explore",
];

const ENTERTAINMENT_CUES: &[&str] = &[
    "movie", "movies", "film", "films", "cinema", "song", "songs", "music", "album", "band",
    "artist", "singer", "show", "shows", "series", "netflix", "concert", "actor", "actress",
    "spotify", "playlist", "genre", "tv",
];

const HEALTH_CUES: &[&str] = &[
    "health", "healthy", "diet", "eat", "eating", "food", "exercise", "workout", "gym", "run",
    "running", "sleep", "yoga", "fitness", "vegetables", "nutrition", "sports", "walk", "hike",
];

const MOODS: &[&str] = &[
    "good", "great", "fine", "okay", "ok", "alright", "well", "tired", "stressed", "happy", "sad",
    "busy", "excited", "exhausted", "awesome", "bad", "amazing", "fantastic", "terrible",
    "wonderful", "relaxed", "sick", "meh",
];

const FREQUENCY_PHRASES: &[&str] = &[
    "every day",
    "every morning",
    "every night",
    "every evening",
    "every week",
    "most days",
    "on weekends",
    "once a week",
    "twice a week",
    "three times a week",
    "four times a week",
    "five times a week",
    "once a month",
    "daily",
    "weekly",
    "regularly",
    "sometimes",
    "often",
    "occasionally",
    "rarely",
    "never",
];

/// Words that follow "I'm" / "it's" but are not names.
const NOT_NAMES: &[&str] = &[
    "fine", "good", "great", "doing", "not", "so", "very", "from", "here", "okay", "ok", "well",
    "tired", "just", "going", "sorry", "sure", "happy", "busy", "a", "an", "the", "really",
    "hello", "hi", "hey", "yes", "no", "nope", "yeah", "thanks", "thank", "nobody", "none",
    "anonymous", "what", "why", "who", "bored", "alright", "excited", "pretty", "kind", "back",
    "new", "glad", "in", "at", "on", "also", "still", "nothing", "whatever",
];

const TITLE_PREFIXES: &[&[&str]] = &[
    &["i", "really", "love"],
    &["i", "really", "like"],
    &["i", "love"],
    &["i", "like"],
    &["i", "think"],
    &["i", "guess"],
    &["i'd", "say"],
    &["that", "would", "be"],
    &["it", "would", "be"],
    &["it's"],
    &["it", "is"],
    &["probably"],
    &["definitely"],
    &["maybe"],
    &["hmm"],
    &["um"],
    &["well"],
    &["right", "now"],
    &["these", "days"],
    &["at", "the", "moment"],
    &["lately"],
    &["currently"],
];

/// Adverbs allowed between "I" and a preference verb ("I mostly enjoy X").
const PREFERENCE_ADVERBS: &[&str] = &[
    "really", "mostly", "mainly", "usually", "just", "also", "definitely", "probably", "honestly",
    "absolutely", "totally", "still", "especially",
];

const PREFERENCE_VERBS: &[&[&str]] = &[
    &["love"],
    &["like"],
    &["enjoy"],
    &["prefer"],
    &["adore"],
    &["watch"],
    &["listen", "to"],
    &["think"],
    &["guess"],
];

/// Lowercase words that may sit inside a capitalized title.
const TITLE_CONNECTORS: &[&str] = &[
    "of", "the", "a", "an", "and", "by", "in", "on", "to", "with", "for", "from", "at",
];

const PLACE_MARKERS: &[&str] = &["from", "in", "to", "visit", "visiting", "near", "at"];

const PLACE_STOP: &[&str] = &[
    "someday", "eventually", "maybe", "too", "though", "probably", "definitely", "because",
    "for", "and", "but", "or", "with", "one", "day", "actually", "really", "i", "it", "the",
    "live", "go", "move", "travel", "see", "be", "stay", "a", "my", "there", "here",
];

const MAX_FREE_CHARS: usize = 120;

fn default_slot_kinds() -> HashMap<String, SlotKind> {
    let table = [
        ("user_name", SlotKind::Name),
        ("user_mood", SlotKind::Mood),
        ("exercises", SlotKind::Frequency),
        ("workout_routine", SlotKind::Frequency),
        ("eats_healthy", SlotKind::YesNo),
        ("solo_travel", SlotKind::YesNo),
        ("recommendation_satisfied", SlotKind::YesNo),
        ("origin_place", SlotKind::Place),
        ("dream_destination", SlotKind::Place),
        ("places_to_visit", SlotKind::Place),
    ];
    table
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

#[derive(Debug, Clone)]
struct Word<'a> {
    lower: String,
    raw: &'a str,
    start: usize,
    end: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}'
}

fn words(text: &str) -> Vec<Word<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (idx, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        match (start, is_word_char(c)) {
            (None, true) => start = Some(idx),
            (Some(s), false) => {
                let raw = text[s..idx].trim_matches(['\'', '\u{2019}']);
                if !raw.is_empty() {
                    let offset = text[s..idx].find(raw).unwrap_or(0);
                    out.push(Word {
                        lower: raw.replace('\u{2019}', "'").to_lowercase(),
                        raw,
                        start: s + offset,
                        end: s + offset + raw.len(),
                    });
                }
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn is_latin_letter(c: char) -> bool {
    c.is_ascii_alphabetic() || ('\u{00C0}'..='\u{024F}').contains(&c)
}

/// Noisy recognition output shows up as foreign-script characters or symbol soup.
fn looks_garbled(text: &str, words: &[Word<'_>]) -> bool {
    if words.is_empty() {
        return true;
    }
    if text.chars().any(|c| c.is_alphabetic() && !is_latin_letter(c)) {
        return true;
    }
    let visible = text.chars().filter(|c| !c.is_whitespace()).count();
    let junk = text
        .chars()
        .filter(|c| {
            !c.is_whitespace() && !is_word_char(*c) && !".,!?;:-\"()".contains(*c)
        })
        .count();
    junk * 4 > visible
}

fn skip_fillers(words: &[Word<'_>]) -> usize {
    words
        .iter()
        .take_while(|w| FILLERS.contains(&w.lower.as_str()))
        .count()
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn contains_seq(words: &[Word<'_>], seq: &[&str]) -> Option<usize> {
    if seq.is_empty() || words.len() < seq.len() {
        return None;
    }
    (0..=words.len() - seq.len()).find(|&i| {
        words[i..i + seq.len()]
            .iter()
            .zip(seq)
            .all(|(w, s)| w.lower == *s)
    })
}

/// Offline, deterministic understanding based on keyword lexicons and patterns.
#[derive(Debug, Clone)]
pub struct RuleBasedNlu {
    slot_kinds: HashMap<String, SlotKind>,
}

impl Default for RuleBasedNlu {
    fn default() -> Self {
        Self {
            slot_kinds: default_slot_kinds(),
        }
    }
}

impl RuleBasedNlu {
    pub fn with_slot_kind(mut self, slot: &str, kind: SlotKind) -> Self {
        self.slot_kinds.insert(slot.to_string(), kind);
        self
    }

    pub fn slot_kind(&self, slot: &str) -> SlotKind {
        if let Some(kind) = self.slot_kinds.get(slot) {
            return *kind;
        }
        if slot.starts_with("favorite_") {
            SlotKind::Title
        } else if slot.ends_with("_place") || slot.ends_with("_destination") {
            SlotKind::Place
        } else {
            SlotKind::Free
        }
    }

    pub fn interpret_text(&self, text: &str, expected: &[&str]) -> Interpretation {
        let words = words(text);
        if looks_garbled(text, &words) {
            return Interpretation::unclear();
        }

        let lead = skip_fillers(&words);
        let first = words.get(lead).map(|w| w.lower.as_str());
        let leading_yes = first.is_some_and(|w| YES.contains(&w))
            || contains_seq(&words[lead..], &["of", "course"]) == Some(0)
            || contains_seq(&words[lead..], &["i", "do"]) == Some(0)
                && words.len() <= lead + 3;
        let leading_no = first.is_some_and(|w| NO.contains(&w))
            || contains_seq(&words[lead..], &["i", "don't"]) == Some(0)
                && words.len() <= lead + 3;
        let question = question_clause(text, &words, lead);
        let wants_detail = words.iter().any(|w| DETAIL.contains(&w.lower.as_str()))
            || contains_seq(&words, &["tell", "me", "more"]).is_some();

        let intent = if leading_no {
            Intent::NoReply
        } else if wants_detail {
            Intent::RequestDetail
        } else if leading_yes {
            Intent::YesReply
        } else if question.is_some() {
            Intent::Question
        } else {
            Intent::Answer
        };

        let mut entities = BTreeMap::new();
        if let Some(q) = question {
            entities.insert(QUESTION_ENTITY.to_string(), q);
        }
        for slot in expected {
            if let Some(value) = self.extract_slot(slot, text, &words, lead, intent) {
                entities.insert((*slot).to_string(), value);
            }
        }

        Interpretation {
            intent,
            polarity: polarity(&words),
            entities,
            topic_cues: topic_cues(&words),
        }
    }

    fn extract_slot(
        &self,
        slot: &str,
        text: &str,
        words: &[Word<'_>],
        lead: usize,
        intent: Intent,
    ) -> Option<String> {
        match self.slot_kind(slot) {
            SlotKind::Name => self.name_from_words(words),
            SlotKind::Mood => words
                .iter()
                .find(|w| MOODS.contains(&w.lower.as_str()))
                .map(|w| w.lower.clone()),
            SlotKind::Frequency => frequency(text, words).or_else(|| yes_no_word(words, lead, intent)),
            SlotKind::YesNo => yes_no_word(words, lead, intent),
            SlotKind::Place => place(text, words, lead),
            SlotKind::Title => title(text, words, lead),
            SlotKind::Free => free_text(text),
        }
    }

    pub fn name_from_text(&self, text: &str) -> Option<String> {
        let words = words(text);
        if looks_garbled(text, &words) {
            return None;
        }
        self.name_from_words(&words)
    }

    fn name_from_words(&self, words: &[Word<'_>]) -> Option<String> {
        let candidate = |w: &Word<'_>| -> Option<String> {
            let ok = w.raw.chars().all(char::is_alphabetic)
                && !NOT_NAMES.contains(&w.lower.as_str())
                && !YES.contains(&w.lower.as_str())
                && !NO.contains(&w.lower.as_str());
            ok.then(|| capitalize(w.raw))
        };
        let patterns: &[&[&str]] = &[
            &["my", "name", "is"],
            &["name's"],
            &["call", "me"],
            &["i'm"],
            &["i", "am"],
            &["it's"],
            &["this", "is"],
            &["name", "is"],
        ];
        for pattern in patterns {
            if let Some(pos) = contains_seq(words, pattern) {
                if let Some(found) = words.get(pos + pattern.len()).and_then(candidate) {
                    return Some(found);
                }
            }
        }
        let lead = skip_fillers(words);
        let rest = &words[lead..];
        if rest.len() == 1 {
            return candidate(&rest[0]);
        }
        None
    }
}

fn question_clause(text: &str, words: &[Word<'_>], lead: usize) -> Option<String> {
    if let Some(q_end) = text.find('?') {
        let clause_start = text[..q_end]
            .rfind(['.', '!', '?', ','])
            .map_or(0, |i| i + 1);
        let clause = &text[clause_start..q_end];
        let normalized = words
            .iter()
            .filter(|w| w.start >= clause_start && w.end <= q_end)
            .map(|w| w.lower.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        if !normalized.is_empty() {
            return Some(normalized);
        }
        let trimmed = clause.trim();
        return (!trimmed.is_empty()).then(|| trimmed.to_lowercase());
    }
    let opener = words.get(lead)?;
    if QUESTION_OPENERS.contains(&opener.lower.as_str()) && words.len() - lead >= 3 {
        // ASR output often lacks punctuation.
        return Some(
            words[lead..]
                .iter()
                .map(|w| w.lower.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        );
    }
    let tail: Vec<&str> = words.iter().rev().take(3).map(|w| w.lower.as_str()).collect();
    if tail.len() == 3 && tail[0] == "you" && tail[1] == "about" && matches!(tail[2], "what" | "how")
    {
        return Some(format!("{} about you", tail[2]));
    }
    None
}

fn polarity(words: &[Word<'_>]) -> Polarity {
    let mut score = 0i32;
    for (i, w) in words.iter().enumerate() {
        let sign = if POSITIVE.contains(&w.lower.as_str()) {
            1
        } else if NEGATIVE.contains(&w.lower.as_str()) {
            -1
        } else {
            continue;
        };
        let negated = words[i.saturating_sub(2)..i]
            .iter()
            .any(|p| NEGATORS.contains(&p.lower.as_str()));
        score += if negated { -sign } else { sign };
    }
    match score.cmp(&0) {
        std::cmp::Ordering::Greater => Polarity::Positive,
        std::cmp::Ordering::Less => Polarity::Negative,
        std::cmp::Ordering::Equal => Polarity::Neutral,
    }
}

fn topic_cues(words: &[Word<'_>]) -> BTreeSet<TopicCue> {
    let mut cues = BTreeSet::new();
    for w in words {
        let lw = w.lower.as_str();
        if TRAVEL_CUES.contains(&lw) {
            cues.insert(TopicCue::Travel);
        }
        if ENTERTAINMENT_CUES.contains(&lw) {
            cues.insert(TopicCue::Entertainment);
        }
        if HEALTH_CUES.contains(&lw) {
            cues.insert(TopicCue::Health);
        }
    }
    cues
}

fn frequency(text: &str, words: &[Word<'_>]) -> Option<String> {
    let mut best: Option<(usize, String)> = None;
    for phrase in FREQUENCY_PHRASES {
        let seq: Vec<&str> = phrase.split(' ').collect();
        if let Some(pos) = contains_seq(words, &seq) {
            if best.as_ref().is_none_or(|(p, _)| pos < *p) {
                best = Some((pos, (*phrase).to_string()));
            }
        }
    }
    // "<n> times a week"
    for i in 0..words.len().saturating_sub(3) {
        if words[i].lower.chars().all(|c| c.is_ascii_digit())
            && words[i + 1].lower == "times"
            && words[i + 2].lower == "a"
            && matches!(words[i + 3].lower.as_str(), "week" | "day" | "month")
            && best.as_ref().is_none_or(|(p, _)| i < *p)
        {
            best = Some((i, text[words[i].start..words[i + 3].end].to_lowercase()));
        }
    }
    best.map(|(_, phrase)| phrase)
}

fn yes_no_word(words: &[Word<'_>], lead: usize, intent: Intent) -> Option<String> {
    match intent {
        Intent::YesReply | Intent::NoReply => words.get(lead).map(|w| w.lower.clone()),
        _ => None,
    }
}

fn place(text: &str, words: &[Word<'_>], lead: usize) -> Option<String> {
    let is_stop = |w: &Word<'_>| {
        PLACE_STOP.contains(&w.lower.as_str())
            || PLACE_MARKERS.contains(&w.lower.as_str())
            || YES.contains(&w.lower.as_str())
            || NO.contains(&w.lower.as_str())
    };
    let take_run = |from: usize| -> Option<String> {
        let capitalized = words
            .get(from)
            .is_some_and(|w| w.raw.chars().next().is_some_and(char::is_uppercase));
        let run: Vec<String> = words[from..]
            .iter()
            .enumerate()
            .take_while(|(k, w)| {
                let joined = *k == 0 || !text[words[from + k - 1].end..w.start].contains([',', '.', ';', '!', '?']);
                joined
                    && !is_stop(w)
                    && (!capitalized || w.raw.chars().next().is_some_and(char::is_uppercase))
            })
            .take(3)
            .map(|(_, w)| capitalize(w.raw))
            .collect();
        (!run.is_empty()).then(|| run.join(" "))
    };
    for (i, w) in words.iter().enumerate() {
        if PLACE_MARKERS.contains(&w.lower.as_str()) {
            if let Some(found) = take_run(i + 1) {
                return Some(found);
            }
        }
    }
    let start = lead + words[lead..].iter().take_while(|w| is_stop(w)).count();
    if words.len() - lead <= 3 {
        return take_run(start);
    }
    None
}

fn title(text: &str, words: &[Word<'_>], lead: usize) -> Option<String> {
    let mut start = lead;
    if words
        .get(start)
        .is_some_and(|w| YES.contains(&w.lower.as_str()))
    {
        start += 1;
    }
    // "my favorite movie is X"
    if let Some(fav) = contains_seq(&words[start..], &["favorite"]) {
        if let Some(is) = words[start + fav..].iter().position(|w| w.lower == "is") {
            start = start + fav + is + 1;
        }
    }
    loop {
        let before = start;
        for prefix in TITLE_PREFIXES {
            if contains_seq(&words[start..], prefix) == Some(0) {
                start += prefix.len();
                break;
            }
        }
        if start == before {
            start += preference_lead(&words[start..]);
        }
        if start == before {
            break;
        }
    }
    let first = words.get(start)?;
    let capitalized = |w: &Word<'_>| w.raw.chars().next().is_some_and(char::is_uppercase);
    let proper = capitalized(first);
    let mut end = first.end;
    let mut prev_end = first.end;
    for w in &words[start + 1..] {
        if w.lower == "because" || w.lower == "since" {
            break;
        }
        if text[prev_end..w.start].contains(['.', '!', '?', ',', ';']) {
            break;
        }
        if proper && !capitalized(w) && !TITLE_CONNECTORS.contains(&w.lower.as_str()) {
            break;
        }
        prev_end = w.end;
        // A capitalized title never ends on a connector.
        if !proper || capitalized(w) {
            end = w.end;
        }
        if text[first.start..prev_end].split_whitespace().count() >= 6 {
            break;
        }
    }
    Some(text[first.start..end].to_string())
}

/// Length of an "I [adverbs] <preference verb>" lead, or 0.
fn preference_lead(words: &[Word<'_>]) -> usize {
    if words.first().is_none_or(|w| w.lower != "i") {
        return 0;
    }
    let adverbs = words[1..]
        .iter()
        .take_while(|w| PREFERENCE_ADVERBS.contains(&w.lower.as_str()))
        .count();
    let rest = &words[1 + adverbs..];
    PREFERENCE_VERBS
        .iter()
        .find(|verb| contains_seq(rest, verb) == Some(0))
        .map_or(0, |verb| 1 + adverbs + verb.len())
}

fn free_text(text: &str) -> Option<String> {
    let sentence = text
        .split_inclusive(['.', '!', '?'])
        .next()
        .unwrap_or(text)
        .trim();
    if sentence.is_empty() {
        return None;
    }
    let cut = sentence
        .char_indices()
        .nth(MAX_FREE_CHARS)
        .map_or(sentence.len(), |(i, _)| i);
    Some(sentence[..cut].trim_end().to_string())
}

impl Nlu for RuleBasedNlu {
    fn name(&self) -> &str {
        "rules"
    }

    fn interpret(&self, text: &str, expected: &[&str]) -> Result<Interpretation, NluError> {
        Ok(self.interpret_text(text, expected))
    }

    fn extract_name(&self, text: &str) -> Result<Option<String>, NluError> {
        Ok(self.name_from_text(text))
    }
}
