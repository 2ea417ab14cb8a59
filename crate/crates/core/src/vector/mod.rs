//! Full-text retrieval substrate: fixed-width character chunking, pluggable
//! embeddings, exact L2 search and an Okapi BM25 index.

mod bm25;
mod chunk;
mod dense;
mod embed;
mod store;

use thiserror::Error;

pub use bm25::{Bm25Index, Bm25Params};
pub use chunk::{chunk_document, Chunk, ChunkingConfig};
pub use dense::{l2_distance, DenseIndex};
pub use embed::{embed, EmbeddingProvider, EmbeddingVector, HashingEmbedder, HttpEmbeddingProvider};
pub use store::VectorStore;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorError {
    #[error("document text is empty")]
    EmptyDocument,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index is empty")]
    EmptyIndex,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Scored hit: chunk id and the retriever's raw score.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Hit {
    pub chunk_id: String,
    pub score: f64,
}
