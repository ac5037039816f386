use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::tokenize::tokenize;

#[derive(Debug, Error)]
pub enum WordListError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{list}: entry {entry:?} is not lowercase")]
    NotLowercase { list: String, entry: String },
    #[error("{list}: entry {entry:?} contains no word characters")]
    NoTokens { list: String, entry: String },
    #[error("function word {word:?} appears in both {first} and {second}")]
    OverlappingCategories {
        word: String,
        first: String,
        second: String,
    },
    #[error("no function-word categories found")]
    NoCategories,
}

const DEFAULT_AWKWARD: &str = include_str!("../../data/awkward.txt");
const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const DEFAULT_CATEGORIES: [(&str, &str); 9] = [
    (
        "personal_pronouns",
        include_str!("../../data/function_words/personal_pronouns.txt"),
    ),
    (
        "impersonal_pronouns",
        include_str!("../../data/function_words/impersonal_pronouns.txt"),
    ),
    ("articles", include_str!("../../data/function_words/articles.txt")),
    (
        "conjunctions",
        include_str!("../../data/function_words/conjunctions.txt"),
    ),
    (
        "prepositions",
        include_str!("../../data/function_words/prepositions.txt"),
    ),
    (
        "auxiliary_verbs",
        include_str!("../../data/function_words/auxiliary_verbs.txt"),
    ),
    ("negations", include_str!("../../data/function_words/negations.txt")),
    (
        "quantifiers",
        include_str!("../../data/function_words/quantifiers.txt"),
    ),
    (
        "common_adverbs",
        include_str!("../../data/function_words/common_adverbs.txt"),
    ),
];

/// Parses a word-list file: one entry per line, `#` starts a comment line,
/// blank lines ignored, surrounding whitespace trimmed.
pub fn parse_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Vocabulary the metrics match against.
#[derive(Debug, Clone)]
pub struct WordLists {
    awkward_transitions: Vec<String>,
    awkward_tokens: Vec<Vec<String>>,
    stopwords: HashSet<String>,
    function_word_categories: BTreeMap<String, BTreeSet<String>>,
    category_of: HashMap<String, usize>,
}

impl WordLists {
    pub fn new(
        awkward_transitions: Vec<String>,
        stopwords: impl IntoIterator<Item = String>,
        function_word_categories: BTreeMap<String, BTreeSet<String>>,
    ) -> Result<Self, WordListError> {
        let mut awkward_tokens = Vec::with_capacity(awkward_transitions.len());
        for phrase in &awkward_transitions {
            check_lowercase("awkward", phrase)?;
            let tokens = tokenize(phrase);
            if tokens.is_empty() {
                return Err(WordListError::NoTokens {
                    list: "awkward".into(),
                    entry: phrase.clone(),
                });
            }
            awkward_tokens.push(tokens);
        }

        let stopwords: HashSet<String> = stopwords.into_iter().collect();
        for word in &stopwords {
            check_lowercase("stopwords", word)?;
        }

        if function_word_categories.is_empty() {
            return Err(WordListError::NoCategories);
        }
        let names: Vec<&String> = function_word_categories.keys().collect();
        let mut category_of: HashMap<String, usize> = HashMap::new();
        for (idx, (name, words)) in function_word_categories.iter().enumerate() {
            for word in words {
                check_lowercase(name, word)?;
                if let Some(prev) = category_of.insert(word.clone(), idx) {
                    return Err(WordListError::OverlappingCategories {
                        word: word.clone(),
                        first: names[prev].clone(),
                        second: name.clone(),
                    });
                }
            }
        }

        Ok(Self {
            awkward_transitions,
            awkward_tokens,
            stopwords,
            function_word_categories,
            category_of,
        })
    }

    /// The bundled English lists.
    pub fn defaults() -> Self {
        let categories = DEFAULT_CATEGORIES
            .iter()
            .map(|(name, text)| (name.to_string(), parse_list(text).into_iter().collect()))
            .collect();
        Self::new(
            parse_list(DEFAULT_AWKWARD),
            parse_list(DEFAULT_STOPWORDS),
            categories,
        )
        .expect("bundled word lists are valid")
    }

    /// Loads lists from a directory laid out as `awkward.txt`, `stopwords.txt`
    /// and `function_words/<category>.txt`. Missing files fall back to the
    /// bundled defaults for that list.
    pub fn load_dir(dir: &Path) -> Result<Self, WordListError> {
        let defaults = Self::defaults();

        let awkward = match read_optional(&dir.join("awkward.txt"))? {
            Some(text) => parse_list(&text),
            None => defaults.awkward_transitions.clone(),
        };
        let stopwords: Vec<String> = match read_optional(&dir.join("stopwords.txt"))? {
            Some(text) => parse_list(&text),
            None => defaults.stopwords.iter().cloned().collect(),
        };

        let category_dir = dir.join("function_words");
        let categories = if category_dir.is_dir() {
            let mut categories = BTreeMap::new();
            let entries = fs::read_dir(&category_dir).map_err(|source| WordListError::Io {
                path: category_dir.clone(),
                source,
            })?;
            for entry in entries {
                let path = entry
                    .map_err(|source| WordListError::Io {
                        path: category_dir.clone(),
                        source,
                    })?
                    .path();
                if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                    continue;
                }
                let Some(name) = path.file_stem().and_then(|s| s.to_str()) else {
                    continue;
                };
                let text = read(&path)?;
                categories.insert(name.to_string(), parse_list(&text).into_iter().collect());
            }
            categories
        } else {
            defaults.function_word_categories.clone()
        };

        Self::new(awkward, stopwords, categories)
    }

    pub fn awkward_transitions(&self) -> &[String] {
        &self.awkward_transitions
    }

    /// Awkward phrases paired with their tokenization.
    pub fn awkward_phrases(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.awkward_transitions
            .iter()
            .map(String::as_str)
            .zip(self.awkward_tokens.iter().map(Vec::as_slice))
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    pub fn function_word_categories(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.function_word_categories
    }

    pub fn category_count(&self) -> usize {
        self.function_word_categories.len()
    }

    /// Index (in category-name order) of the category containing `token`.
    pub fn category_index(&self, token: &str) -> Option<usize> {
        self.category_of.get(token).copied()
    }
}

impl Default for WordLists {
    fn default() -> Self {
        Self::defaults()
    }
}

fn check_lowercase(list: &str, entry: &str) -> Result<(), WordListError> {
    if entry.to_lowercase() != entry {
        return Err(WordListError::NotLowercase {
            list: list.to_string(),
            entry: entry.to_string(),
        });
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, WordListError> {
    fs::read_to_string(path).map_err(|source| WordListError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_optional(path: &Path) -> Result<Option<String>, WordListError> {
    if path.exists() {
        read(path).map(Some)
    } else {
        Ok(None)
    }
}
