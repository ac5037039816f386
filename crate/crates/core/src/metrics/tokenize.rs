/// Apostrophe variants folded to ASCII `'` inside tokens.
const APOSTROPHES: [char; 2] = ['\'', '\u{2019}'];

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || APOSTROPHES.contains(&c)
}

/// Splits text into lowercase tokens: maximal runs of letters, digits, and
/// apostrophes. Apostrophes at either end of a run are quote marks, not part of
/// the word, and are trimmed; runs made only of apostrophes are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !is_token_char(c))
        .map(|run| run.trim_matches(|c: char| APOSTROPHES.contains(&c)))
        .filter(|run| !run.is_empty())
        .map(|run| {
            run.chars()
                .map(|c| if APOSTROPHES.contains(&c) { '\'' } else { c })
                .flat_map(char::to_lowercase)
                .collect()
        })
        .collect()
}
