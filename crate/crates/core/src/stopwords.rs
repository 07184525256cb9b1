//! Stopword list and the token filters built on it.

use std::collections::BTreeSet;

/// NLTK English stopwords.
pub const ENGLISH: &[&str] = &[
    "i",
    "me",
    "my",
    "myself",
    "we",
    "our",
    "ours",
    "ourselves",
    "you",
    "you're",
    "you've",
    "you'll",
    "you'd",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "she's",
    "her",
    "hers",
    "herself",
    "it",
    "it's",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "what",
    "which",
    "who",
    "whom",
    "this",
    "that",
    "that'll",
    "these",
    "those",
    "am",
    "is",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "have",
    "has",
    "had",
    "having",
    "do",
    "does",
    "did",
    "doing",
    "a",
    "an",
    "the",
    "and",
    "but",
    "if",
    "or",
    "because",
    "as",
    "until",
    "while",
    "of",
    "at",
    "by",
    "for",
    "with",
    "about",
    "against",
    "between",
    "into",
    "through",
    "during",
    "before",
    "after",
    "above",
    "below",
    "to",
    "from",
    "up",
    "down",
    "in",
    "out",
    "on",
    "off",
    "over",
    "under",
    "again",
    "further",
    "then",
    "once",
    "here",
    "there",
    "when",
    "where",
    "why",
    "how",
    "all",
    "any",
    "both",
    "each",
    "few",
    "more",
    "most",
    "other",
    "some",
    "such",
    "no",
    "nor",
    "not",
    "only",
    "own",
    "same",
    "so",
    "than",
    "too",
    "very",
    "s",
    "t",
    "can",
    "will",
    "just",
    "don",
    "don't",
    "should",
    "should've",
    "now",
    "d",
    "ll",
    "m",
    "o",
    "re",
    "ve",
    "y",
    "ain",
    "aren",
    "aren't",
    "couldn",
    "couldn't",
    "didn",
    "didn't",
    "doesn",
    "doesn't",
    "hadn",
    "hadn't",
    "hasn",
    "hasn't",
    "haven",
    "haven't",
    "isn",
    "isn't",
    "ma",
    "mightn",
    "mightn't",
    "mustn",
    "mustn't",
    "needn",
    "needn't",
    "shan",
    "shan't",
    "shouldn",
    "shouldn't",
    "wasn",
    "wasn't",
    "weren",
    "weren't",
    "won",
    "won't",
    "wouldn",
    "wouldn't",
];

/// Universal POS tags that never count as content words.
pub const EXCLUDED_UPOS: &[&str] = &["X", "PUNCT", "CCONJ", "ADP", "PRON", "PART", "DET"];

pub fn is_stopword(word: &str) -> bool {
    let lower = word.to_lowercase();
    ENGLISH.contains(&lower.as_str())
}

/// True when a parsed token is dropped by the stopword list, its POS tag or
/// a `punct` dependency.
pub fn is_filtered_token(text: &str, upos: &str, dep: &str) -> bool {
    is_stopword(text) || EXCLUDED_UPOS.contains(&upos) || dep == "punct"
}

/// Lowercased non-stopword words of a set of phrases, in first-seen order.
pub fn content_words<'a>(phrases: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for phrase in phrases {
        for raw in phrase.split_whitespace() {
            let word = raw
                .trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .to_lowercase();
            if word.is_empty() || is_stopword(&word) {
                continue;
            }
            if seen.insert(word.clone()) {
                out.push(word);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_size() {
        assert_eq!(ENGLISH.len(), 179);
        let unique: BTreeSet<_> = ENGLISH.iter().collect();
        assert_eq!(unique.len(), 179);
    }

    #[test]
    fn case_insensitive() {
        assert!(is_stopword("The"));
        assert!(!is_stopword("divorced"));
        assert!(!is_stopword("became"));
    }

    #[test]
    fn token_filter() {
        assert!(is_filtered_token("and", "CCONJ", "cc"));
        assert!(is_filtered_token(".", "PUNCT", "punct"));
        assert!(is_filtered_token("1989", "NUM", "punct"));
        assert!(!is_filtered_token("divorced", "VERB", "ROOT"));
    }

    #[test]
    fn content_words_strip_stopwords() {
        let words = content_words(["member of sports team", "played for", "team"]);
        assert_eq!(words, ["member", "sports", "team", "played"]);
    }
}
