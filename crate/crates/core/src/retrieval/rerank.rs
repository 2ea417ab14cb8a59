use std::collections::BTreeMap;

use serde::Deserialize;

use super::RetrievalError;

/// Query-passage relevance scorer; higher is more relevant.
pub trait Reranker: Send + Sync {
    fn id(&self) -> String;
    /// One score per passage, in input order.
    fn score(&self, query: &str, passages: &[&str]) -> Result<Vec<f64>, RetrievalError>;
}

/// Reciprocal rank fusion: each item scores the sum of `1 / (k0 + rank)`
/// over the lists containing it (ranks 1-based). Sorted by score
/// descending, ties by id.
pub fn rrf_fuse(lists: &[&[&str]], k0: f64) -> Vec<(String, f64)> {
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for list in lists {
        for (i, id) in list.iter().enumerate() {
            *scores.entry(id).or_default() += 1.0 / (k0 + (i + 1) as f64);
        }
    }
    let mut out: Vec<(String, f64)> = scores.into_iter().map(|(id, s)| (id.to_string(), s)).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Hosted rerank endpoint. Request: `{"model", "query", "documents": [...]}`.
/// Response: `{"scores": [...]}` in input order, or the common
/// `{"results": [{"index", "relevance_score"}]}` shape.
#[derive(Debug, Clone)]
pub struct HttpReranker {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RerankResponse {
    Scores { scores: Vec<f64> },
    Results { results: Vec<RerankResult> },
}

#[derive(Deserialize)]
struct RerankResult {
    index: usize,
    relevance_score: f64,
}

impl Reranker for HttpReranker {
    fn id(&self) -> String {
        self.model.clone()
    }

    fn score(&self, query: &str, passages: &[&str]) -> Result<Vec<f64>, RetrievalError> {
        let unavailable = |e: &dyn std::fmt::Display| RetrievalError::RerankerUnavailable(e.to_string());
        let mut req = ureq::post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let body = serde_json::json!({ "model": self.model, "query": query, "documents": passages });
        let mut resp = req.send_json(&body).map_err(|e| unavailable(&e))?;
        let parsed: RerankResponse = resp.body_mut().read_json().map_err(|e| unavailable(&e))?;
        match parsed {
            RerankResponse::Scores { scores } => Ok(scores),
            RerankResponse::Results { results } => {
                let mut scores = vec![f64::NAN; passages.len()];
                for r in results {
                    let slot = scores
                        .get_mut(r.index)
                        .ok_or_else(|| unavailable(&format!("result index {} out of range", r.index)))?;
                    *slot = r.relevance_score;
                }
                Ok(scores)
            }
        }
    }
}
