//! Movie and song recommendations.

use std::path::Path;

use serde::Deserialize;

use super::script::RecommendKind;
use super::DialogueError;

const DEFAULT_CATALOG: &str = include_str!("../../data/dialogue/catalog.toml");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recommendation {
    pub kind: RecommendKind,
    pub title: String,
    /// How the title is spoken, e.g. `"Dreams" by Fleetwood Mac`.
    pub spoken: String,
}

/// Source of recommendations; the bundled catalog is the default.
pub trait RecommendationSource: Send + Sync {
    /// Picks an item of `kind`, preferring ones matching `genre_hint` and
    /// skipping titles in `exclude`.
    fn recommend(
        &self,
        kind: RecommendKind,
        genre_hint: Option<&str>,
        exclude: &[String],
    ) -> Option<Recommendation>;
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Movie {
    title: String,
    year: u16,
    genres: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Song {
    title: String,
    artist: String,
    genres: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticCatalog {
    movies: Vec<Movie>,
    songs: Vec<Song>,
}

impl StaticCatalog {
    pub fn defaults() -> Self {
        Self::from_toml(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, DialogueError> {
        toml::from_str(text).map_err(|e| DialogueError::Data(format!("catalog: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, DialogueError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DialogueError::Data(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

fn genre_matches(genres: &[String], hint: &str) -> bool {
    let hint = hint.to_lowercase();
    genres.iter().any(|g| hint.contains(g.as_str()))
}

fn pick<'a, T>(
    items: &'a [T],
    title: impl Fn(&T) -> &str,
    genres: impl Fn(&T) -> &[String],
    hint: Option<&str>,
    exclude: &[String],
) -> Option<&'a T> {
    let open = |item: &&T| !exclude.iter().any(|e| e.eq_ignore_ascii_case(title(item)));
    hint.and_then(|h| items.iter().filter(open).find(|i| genre_matches(genres(i), h)))
        .or_else(|| items.iter().find(open))
}

impl RecommendationSource for StaticCatalog {
    fn recommend(
        &self,
        kind: RecommendKind,
        genre_hint: Option<&str>,
        exclude: &[String],
    ) -> Option<Recommendation> {
        match kind {
            RecommendKind::Movie => pick(&self.movies, |m| &m.title, |m| &m.genres, genre_hint, exclude)
                .map(|m| Recommendation {
                    kind,
                    title: m.title.clone(),
                    spoken: format!("{} from {}", m.title, m.year),
                }),
            RecommendKind::Song => pick(&self.songs, |s| &s.title, |s| &s.genres, genre_hint, exclude)
                .map(|s| Recommendation {
                    kind,
                    title: s.title.clone(),
                    spoken: format!("{} by {}", s.title, s.artist),
                }),
        }
    }
}
