//! TF-IDF keyword extraction over unigrams and bigrams.
//!
//! Tokens are lowercased, stopwords removed and each token lemmatized before
//! n-grams are formed, so the five returned terms are always distinct
//! lemmas. Weights follow the smoothed TF-IDF convention
//! `tf * (ln((1 + N) / (1 + df)) + 1)`, L2-normalized per document.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{BibRecord, IngestError};
use crate::text::{is_stopword, lemmatize, word_tokens};

pub const KEYWORDS_PER_DOCUMENT: usize = 5;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KeywordVector {
    pub terms: Vec<String>,
    pub weights: Vec<f64>,
}

impl KeywordVector {
    pub fn new(pairs: Vec<(String, f64)>) -> Self {
        let (terms, weights) = pairs.into_iter().unzip();
        Self { terms, weights }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.terms.iter().map(String::as_str).zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Unigram and bigram terms of `text` in order of occurrence.
pub fn ngram_terms(text: &str) -> Vec<String> {
    let tokens: Vec<String> =
        word_tokens(text).into_iter().filter(|t| !is_stopword(t)).map(|t| lemmatize(&t)).collect();
    let mut terms = tokens.clone();
    terms.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    terms
}

fn term_counts(text: &str) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for t in ngram_terms(text) {
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

/// Document frequencies fitted on a corpus.
#[derive(Debug, Clone)]
pub struct KeywordExtractor {
    doc_count: usize,
    doc_freq: HashMap<String, usize>,
}

impl KeywordExtractor {
    pub fn fit<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut doc_count = 0;
        let mut doc_freq = HashMap::new();
        for text in texts {
            doc_count += 1;
            for term in term_counts(text).into_keys() {
                *doc_freq.entry(term).or_insert(0) += 1;
            }
        }
        Self { doc_count, doc_freq }
    }

    pub fn fit_records(corpus: &[BibRecord]) -> Self {
        let texts: Vec<String> = corpus.iter().map(BibRecord::keyword_text).collect();
        Self::fit(texts.iter().map(String::as_str))
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    /// Keywords of a document that is part of the fitted corpus.
    pub fn keywords(&self, text: &str) -> Result<KeywordVector, IngestError> {
        self.top_terms(text, 0)
    }

    /// Keywords of a document that is *not* in the fitted corpus; it is
    /// counted as one extra document for the IDF statistics.
    pub fn keywords_for_new_document(&self, text: &str) -> Result<KeywordVector, IngestError> {
        self.top_terms(text, 1)
    }

    fn top_terms(&self, text: &str, extra_docs: usize) -> Result<KeywordVector, IngestError> {
        let counts = term_counts(text);
        if counts.is_empty() {
            return Err(IngestError::EmptyText);
        }
        let n = (self.doc_count + extra_docs) as f64;
        let mut scored: Vec<(String, usize, f64)> = counts
            .into_iter()
            .map(|(term, tf)| {
                let df = self.doc_freq.get(&term).copied().unwrap_or(0) + extra_docs;
                let idf = ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0;
                let w = tf as f64 * idf;
                (term, tf, w)
            })
            .collect();
        let norm = scored.iter().map(|(_, _, w)| w * w).sum::<f64>().sqrt();
        for s in &mut scored {
            s.2 /= norm;
        }
        scored.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| b.1.cmp(&a.1)).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(KEYWORDS_PER_DOCUMENT);
        Ok(KeywordVector::new(scored.into_iter().map(|(t, _, w)| (t, w)).collect()))
    }
}

/// Top-5 TF-IDF keywords of `record` with statistics fitted on `corpus`.
pub fn extract_keywords(record: &BibRecord, corpus: &[BibRecord]) -> Result<KeywordVector, IngestError> {
    if !corpus.contains(record) {
        return Err(IngestError::NotInCorpus);
    }
    KeywordExtractor::fit_records(corpus).keywords(&record.keyword_text())
}

fn field_tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[[^\]]*\]").expect("valid regex"))
}

/// Plain text of a boolean search query: field tags, quotes, parentheses
/// and the AND/OR/NOT operators are removed.
pub fn query_text(query: &str) -> String {
    let no_tags = field_tag_re().replace_all(query, " ");
    let cleaned: String =
        no_tags.chars().map(|c| if matches!(c, '(' | ')' | '"' | '\'' | '*') { ' ' } else { c }).collect();
    cleaned.split_whitespace().filter(|w| !matches!(*w, "AND" | "OR" | "NOT")).collect::<Vec<_>>().join(" ")
}

/// Keyword vector of the search query, treated as an extra corpus document.
pub fn query_keywords(query: &str, extractor: &KeywordExtractor) -> Result<KeywordVector, IngestError> {
    extractor.keywords_for_new_document(&query_text(query))
}
