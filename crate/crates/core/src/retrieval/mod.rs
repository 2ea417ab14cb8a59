//! VectorRAG ensemble: sparse and dense candidates are merged, then ordered
//! by a pluggable reranker or, when none is available, by reciprocal rank
//! fusion over the two source rankings.

mod rerank;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vector::{EmbeddingProvider, Hit, VectorError, VectorStore};

pub use rerank::{rrf_fuse, HttpReranker, Reranker};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrievalError {
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error("no candidates to rerank")]
    EmptyCandidates,
    #[error("reranker unavailable: {0}")]
    RerankerUnavailable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalConfig {
    /// Candidates requested from each retriever.
    pub k_each: usize,
    /// Contexts kept after reranking.
    pub context_size: usize,
    pub rrf_k0: f64,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self { k_each: 5, context_size: 5, rrf_k0: 60.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Dense,
    Sparse,
    Both,
}

/// A merged candidate with its 1-based rank in each source list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub chunk_id: String,
    pub dense_rank: Option<usize>,
    pub sparse_rank: Option<usize>,
}

impl Candidate {
    pub fn provenance(&self) -> Provenance {
        match (self.dense_rank, self.sparse_rank) {
            (Some(_), Some(_)) => Provenance::Both,
            (Some(_), None) => Provenance::Dense,
            _ => Provenance::Sparse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub dense_hits: Vec<Hit>,
    pub sparse_hits: Vec<Hit>,
    /// Union of both lists without duplicates, interleaved by rank
    /// (dense first at equal rank).
    pub merged: Vec<Candidate>,
}

impl CandidateSet {
    pub fn from_hits(dense_hits: Vec<Hit>, sparse_hits: Vec<Hit>) -> Self {
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut merged: Vec<Candidate> = Vec::new();
        let mut push = |id: &str, rank: usize, dense: bool| {
            let i = *index.entry(id.to_string()).or_insert_with(|| {
                merged.push(Candidate { chunk_id: id.to_string(), dense_rank: None, sparse_rank: None });
                merged.len() - 1
            });
            let slot = if dense { &mut merged[i].dense_rank } else { &mut merged[i].sparse_rank };
            slot.get_or_insert(rank);
        };
        for r in 0..dense_hits.len().max(sparse_hits.len()) {
            if let Some(h) = dense_hits.get(r) {
                push(&h.chunk_id, r + 1, true);
            }
            if let Some(h) = sparse_hits.get(r) {
                push(&h.chunk_id, r + 1, false);
            }
        }
        Self { dense_hits, sparse_hits, merged }
    }

    pub fn is_empty(&self) -> bool {
        self.merged.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub chunk_id: String,
    pub score: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedContext {
    pub items: Vec<RankedItem>,
    /// Reranker id, or `"rrf"` when fusion produced the order.
    pub ranked_by: String,
    pub fallback_used: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_reason: Option<String>,
}

/// Runs BM25 and dense search with `k_each` results each and merges them.
pub fn ensemble_retrieve(
    query: &str,
    store: &VectorStore,
    provider: &dyn EmbeddingProvider,
    k_each: usize,
) -> Result<CandidateSet, RetrievalError> {
    let sparse = store.sparse_search(query, k_each)?;
    let dense = store.dense_search(query, provider, k_each)?;
    Ok(CandidateSet::from_hits(dense, sparse))
}

/// Orders candidates with `reranker` when given and working, else by
/// reciprocal rank fusion, and keeps the top `context_size`.
pub fn rerank(
    query: &str,
    candidates: &CandidateSet,
    store: &VectorStore,
    reranker: Option<&dyn Reranker>,
    config: &RetrievalConfig,
) -> Result<RankedContext, RetrievalError> {
    if candidates.is_empty() {
        return Err(RetrievalError::EmptyCandidates);
    }
    let provenance: BTreeMap<&str, Provenance> =
        candidates.merged.iter().map(|c| (c.chunk_id.as_str(), c.provenance())).collect();

    let mut fallback_reason = None;
    if let Some(r) = reranker {
        let passages: Vec<&str> =
            candidates.merged.iter().map(|c| store.chunk(&c.chunk_id).map_or("", |ch| ch.text.as_str())).collect();
        match r.score(query, &passages) {
            Ok(scores) if scores.len() == passages.len() && scores.iter().all(|s| s.is_finite()) => {
                let mut order: Vec<usize> = (0..scores.len()).collect();
                order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
                let items = order
                    .into_iter()
                    .take(config.context_size)
                    .map(|i| {
                        let id = &candidates.merged[i].chunk_id;
                        RankedItem { chunk_id: id.clone(), score: scores[i], provenance: provenance[id.as_str()] }
                    })
                    .collect();
                return Ok(RankedContext { items, ranked_by: r.id(), fallback_used: false, fallback_reason: None });
            }
            Ok(scores) => {
                fallback_reason =
                    Some(format!("reranker returned {} scores for {} passages", scores.len(), passages.len()));
            }
            Err(e) => fallback_reason = Some(e.to_string()),
        }
        tracing::warn!(reason = fallback_reason.as_deref().unwrap_or(""), "reranker failed, using rank fusion");
    }

    let dense: Vec<&str> = candidates.dense_hits.iter().map(|h| h.chunk_id.as_str()).collect();
    let sparse: Vec<&str> = candidates.sparse_hits.iter().map(|h| h.chunk_id.as_str()).collect();
    let items = rrf_fuse(&[&dense, &sparse], config.rrf_k0)
        .into_iter()
        .take(config.context_size)
        .map(|(id, score)| RankedItem { provenance: provenance[id.as_str()], chunk_id: id, score })
        .collect();
    Ok(RankedContext { items, ranked_by: "rrf".into(), fallback_used: reranker.is_some(), fallback_reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{chunk_document, Bm25Params, ChunkingConfig, HashingEmbedder};

    fn hits(ids: &[&str]) -> Vec<Hit> {
        ids.iter().map(|id| Hit { chunk_id: id.to_string(), score: 0.0 }).collect()
    }

    struct Reverse;
    impl Reranker for Reverse {
        fn id(&self) -> String {
            "reverse".into()
        }
        fn score(&self, _q: &str, passages: &[&str]) -> Result<Vec<f64>, RetrievalError> {
            Ok((0..passages.len()).map(|i| i as f64).collect())
        }
    }

    struct Down;
    impl Reranker for Down {
        fn id(&self) -> String {
            "down".into()
        }
        fn score(&self, _q: &str, _p: &[&str]) -> Result<Vec<f64>, RetrievalError> {
            Err(RetrievalError::RerankerUnavailable("connection refused".into()))
        }
    }

    fn store() -> VectorStore {
        let mut chunks = Vec::new();
        for (i, text) in ["alpha beta", "beta gamma", "gamma delta", "delta epsilon"].iter().enumerate() {
            chunks.extend(chunk_document(text, &format!("d{i}"), &ChunkingConfig::default()).unwrap());
        }
        VectorStore::build(chunks, &HashingEmbedder::new(32), Bm25Params::default()).unwrap()
    }

    #[test]
    fn merge_dedups_and_tracks_provenance() {
        let set = CandidateSet::from_hits(hits(&["a", "b"]), hits(&["b", "c"]));
        let ids: Vec<&str> = set.merged.iter().map(|c| c.chunk_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(set.merged[1].provenance(), Provenance::Both);
        assert_eq!(set.merged[1].dense_rank, Some(2));
        assert_eq!(set.merged[1].sparse_rank, Some(1));
    }

    #[test]
    fn disjoint_lists_merge_to_ten() {
        let d: Vec<String> = (0..5).map(|i| format!("d{i}")).collect();
        let s: Vec<String> = (0..5).map(|i| format!("s{i}")).collect();
        let set = CandidateSet::from_hits(
            hits(&d.iter().map(String::as_str).collect::<Vec<_>>()),
            hits(&s.iter().map(String::as_str).collect::<Vec<_>>()),
        );
        assert_eq!(set.merged.len(), 10);
    }

    #[test]
    fn reranker_order_is_followed() {
        let store = store();
        let set = ensemble_retrieve("beta gamma", &store, &HashingEmbedder::new(32), 2).unwrap();
        let ctx = rerank("beta gamma", &set, &store, Some(&Reverse), &RetrievalConfig::default()).unwrap();
        let got: Vec<&str> = ctx.items.iter().map(|i| i.chunk_id.as_str()).collect();
        let mut expected: Vec<&str> = set.merged.iter().map(|c| c.chunk_id.as_str()).collect();
        expected.reverse();
        assert_eq!(got, expected);
        assert!(!ctx.fallback_used);
    }

    #[test]
    fn unavailable_reranker_falls_back_to_rrf() {
        let store = store();
        let set = ensemble_retrieve("beta", &store, &HashingEmbedder::new(32), 3).unwrap();
        let ctx = rerank("beta", &set, &store, Some(&Down), &RetrievalConfig::default()).unwrap();
        assert!(ctx.fallback_used);
        assert_eq!(ctx.ranked_by, "rrf");
        assert!(ctx.fallback_reason.unwrap().contains("connection refused"));
        let plain = rerank("beta", &set, &store, None, &RetrievalConfig::default()).unwrap();
        assert_eq!(plain.items, ctx.items);
        assert!(!plain.fallback_used);
    }

    #[test]
    fn empty_candidates_rejected() {
        let set = CandidateSet::from_hits(vec![], vec![]);
        assert_eq!(
            rerank("q", &set, &store(), None, &RetrievalConfig::default()),
            Err(RetrievalError::EmptyCandidates)
        );
    }

    #[test]
    fn context_truncated() {
        let store = store();
        let set = ensemble_retrieve("alpha delta", &store, &HashingEmbedder::new(32), 4).unwrap();
        let cfg = RetrievalConfig { context_size: 2, ..Default::default() };
        assert_eq!(rerank("alpha delta", &set, &store, None, &cfg).unwrap().items.len(), 2);
    }
}
