//! Tokenizers, stopwords and the noun lemmatizer shared by keyword
//! extraction, BM25, the hashing embedder and the fallback judge.

use std::sync::OnceLock;

use regex::Regex;

/// English stopwords, sorted for binary search.
const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "however",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "may",
    "me",
    "might",
    "more",
    "most",
    "must",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "thus",
    "to",
    "too",
    "under",
    "until",
    "up",
    "upon",
    "us",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "within",
    "without",
    "would",
    "yet",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

/// Words ending in `s` that are not plurals.
const SINGULAR_S: &[&str] = &["alias", "atlas", "bias", "canvas", "corpus", "gas", "lens", "news", "series", "species"];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\w\w+").expect("valid regex"))
}

/// Lowercased word tokens of two or more word characters.
pub fn word_tokens(text: &str) -> Vec<String> {
    word_re().find_iter(text).map(|m| m.as_str().to_lowercase()).collect()
}

/// Lowercased alphanumeric runs; no stemming or stopword removal.
pub fn alnum_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Alphanumeric tokens with stopwords removed.
pub fn content_tokens(text: &str) -> Vec<String> {
    alnum_tokens(text).into_iter().filter(|t| !is_stopword(t)).collect()
}

/// Noun lemmatization by suffix rules: plural and possessive forms are
/// reduced to the singular, everything else passes through unchanged.
///
/// Input is expected lowercase.
pub fn lemmatize(token: &str) -> String {
    let t = token.strip_suffix("'s").unwrap_or(token);
    if t.chars().count() <= 3 || SINGULAR_S.contains(&t) || !t.is_ascii() {
        return t.to_string();
    }
    if let Some(stem) = t.strip_suffix("yses") {
        return format!("{stem}ysis");
    }
    if let Some(stem) = t.strip_suffix("sses") {
        return format!("{stem}ss");
    }
    if let Some(stem) = t.strip_suffix("ies") {
        return format!("{stem}y");
    }
    for suffix in ["ches", "shes", "xes", "zzes"] {
        if t.ends_with(suffix) {
            return t[..t.len() - 2].to_string();
        }
    }
    if t.ends_with("ss") || t.ends_with("us") || t.ends_with("is") || t.ends_with("ous") {
        return t.to_string();
    }
    match t.strip_suffix('s') {
        Some(stem) => stem.to_string(),
        None => t.to_string(),
    }
}

/// Splits on terminal punctuation (`.`, `!`, `?`) followed by whitespace or
/// end of text. Empty pieces are dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if matches!(c, '.' | '!' | '?') {
            let at_boundary = chars.peek().is_none_or(|n| n.is_whitespace());
            if at_boundary {
                let s = current.trim();
                if !s.is_empty() {
                    out.push(s.to_string());
                }
                current.clear();
            }
        }
    }
    let rest = current.trim();
    if !rest.is_empty() {
        out.push(rest.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopwords_sorted() {
        let mut sorted = STOPWORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, STOPWORDS);
    }

    #[test]
    fn lemmatizer_rules() {
        assert_eq!(lemmatize("models"), "model");
        assert_eq!(lemmatize("studies"), "study");
        assert_eq!(lemmatize("classes"), "class");
        assert_eq!(lemmatize("approaches"), "approach");
        assert_eq!(lemmatize("analyses"), "analysis");
        assert_eq!(lemmatize("sepsis"), "sepsis");
        assert_eq!(lemmatize("virus"), "virus");
        assert_eq!(lemmatize("bias"), "bias");
        assert_eq!(lemmatize("prediction"), "prediction");
        assert_eq!(lemmatize("llms"), "llm");
        assert_eq!(lemmatize("gas"), "gas");
    }

    #[test]
    fn sentences() {
        let s = split_sentences("One fact. Version 2.5 holds! Why? trailing");
        assert_eq!(s, vec!["One fact.", "Version 2.5 holds!", "Why?", "trailing"]);
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn tokenizers() {
        assert_eq!(word_tokens("A GPT-4 model, x"), vec!["gpt", "model"]);
        assert_eq!(alnum_tokens("A GPT-4 model"), vec!["a", "gpt", "4", "model"]);
        assert_eq!(content_tokens("The model of a thing"), vec!["model", "thing"]);
    }
}
