use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{embed, Bm25Index, Bm25Params, Chunk, DenseIndex, EmbeddingProvider, EmbeddingVector, Hit, VectorError};

/// Chunks plus the dense and sparse indices built over them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "StoreData", into = "StoreData")]
pub struct VectorStore {
    provider_id: String,
    chunks: Vec<Chunk>,
    dense: DenseIndex,
    bm25: Bm25Index,
    by_id: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct StoreData {
    provider_id: String,
    chunks: Vec<Chunk>,
    dense: DenseIndex,
    bm25: Bm25Index,
}

impl From<StoreData> for VectorStore {
    fn from(d: StoreData) -> Self {
        let by_id = d.chunks.iter().enumerate().map(|(i, c)| (c.chunk_id.clone(), i)).collect();
        Self { provider_id: d.provider_id, chunks: d.chunks, dense: d.dense, bm25: d.bm25, by_id }
    }
}

impl From<VectorStore> for StoreData {
    fn from(s: VectorStore) -> Self {
        Self { provider_id: s.provider_id, chunks: s.chunks, dense: s.dense, bm25: s.bm25 }
    }
}

const EMBED_BATCH: usize = 64;

impl VectorStore {
    /// Chunks are sorted by id so index contents do not depend on input order.
    pub fn build(
        mut chunks: Vec<Chunk>,
        provider: &dyn EmbeddingProvider,
        params: Bm25Params,
    ) -> Result<Self, VectorError> {
        chunks.sort_by(|a, b| a.chunk_id.cmp(&b.chunk_id));
        chunks.dedup_by(|a, b| a.chunk_id == b.chunk_id);
        let mut dense = DenseIndex::new(provider.dim());
        for batch in chunks.chunks(EMBED_BATCH) {
            let texts: Vec<&str> = batch.iter().map(|c| c.text.as_str()).collect();
            for (c, v) in batch.iter().zip(embed(&texts, provider)?) {
                dense.add(c.chunk_id.clone(), &v)?;
            }
        }
        let bm25 = Bm25Index::build(chunks.iter().map(|c| (c.chunk_id.as_str(), c.text.as_str())), params);
        Ok(StoreData { provider_id: provider.id(), chunks, dense, bm25 }.into())
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn dim(&self) -> usize {
        self.dense.dim()
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    pub fn chunk(&self, id: &str) -> Option<&Chunk> {
        self.by_id.get(id).map(|&i| &self.chunks[i])
    }

    pub fn bm25(&self) -> &Bm25Index {
        &self.bm25
    }

    pub fn dense(&self) -> &DenseIndex {
        &self.dense
    }

    pub fn dense_search(
        &self,
        query: &str,
        provider: &dyn EmbeddingProvider,
        k: usize,
    ) -> Result<Vec<Hit>, VectorError> {
        let q = self.embed_query(query, provider)?;
        self.dense.search(&q, k)
    }

    pub fn sparse_search(&self, query: &str, k: usize) -> Result<Vec<Hit>, VectorError> {
        self.bm25.search(query, k)
    }

    pub fn embed_query(&self, query: &str, provider: &dyn EmbeddingProvider) -> Result<EmbeddingVector, VectorError> {
        if provider.dim() != self.dim() {
            return Err(VectorError::DimensionMismatch { expected: self.dim(), got: provider.dim() });
        }
        Ok(embed(&[query], provider)?.remove(0))
    }
}
