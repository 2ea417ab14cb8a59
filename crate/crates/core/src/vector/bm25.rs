use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Hit, VectorError};
use crate::text::alnum_tokens;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.5, b: 0.75 }
    }
}

/// Inverted index with Okapi BM25 scoring over lowercased alphanumeric tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bm25Index {
    params: Bm25Params,
    doc_ids: Vec<String>,
    doc_len: Vec<u32>,
    avgdl: f64,
    /// term -> (doc index, term frequency), doc indices ascending.
    postings: BTreeMap<String, Vec<(u32, u32)>>,
}

impl Bm25Index {
    pub fn build<'a, I>(docs: I, params: Bm25Params) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut doc_ids = Vec::new();
        let mut doc_len = Vec::new();
        let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        for (i, (id, text)) in docs.into_iter().enumerate() {
            let tokens = alnum_tokens(text);
            doc_ids.push(id.to_string());
            doc_len.push(tokens.len() as u32);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in tokens {
                *tf.entry(t).or_default() += 1;
            }
            for (term, f) in tf {
                postings.entry(term).or_default().push((i as u32, f));
            }
        }
        let total: u64 = doc_len.iter().map(|&l| u64::from(l)).sum();
        let avgdl = if doc_ids.is_empty() { 0.0 } else { total as f64 / doc_ids.len() as f64 };
        Self { params, doc_ids, doc_len, avgdl, postings }
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.len() as f64;
        let df = self.doc_freq(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Scores every document; repeated query terms count once.
    pub fn scores(&self, query: &str) -> Vec<f64> {
        let Bm25Params { k1, b } = self.params;
        let mut scores = vec![0.0; self.len()];
        let terms: BTreeSet<String> = alnum_tokens(query).into_iter().collect();
        for term in &terms {
            let Some(list) = self.postings.get(term) else { continue };
            let idf = self.idf(term);
            for &(doc, tf) in list {
                let tf = f64::from(tf);
                let norm = if self.avgdl > 0.0 {
                    1.0 - b + b * f64::from(self.doc_len[doc as usize]) / self.avgdl
                } else {
                    1.0
                };
                scores[doc as usize] += idf * tf * (k1 + 1.0) / (tf + k1 * norm);
            }
        }
        scores
    }

    /// Top-k by descending score; ties broken by chunk id.
    pub fn search(&self, query: &str, k: usize) -> Result<Vec<Hit>, VectorError> {
        if self.is_empty() {
            return Err(VectorError::EmptyIndex);
        }
        let scores = self.scores(query);
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| self.doc_ids[a].cmp(&self.doc_ids[b])));
        Ok(order.into_iter().take(k).map(|i| Hit { chunk_id: self.doc_ids[i].clone(), score: scores[i] }).collect())
    }
}
