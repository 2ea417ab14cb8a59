use serde::{Deserialize, Serialize};

use super::VectorError;
use crate::text::alnum_tokens;

/// Dense embedding; all vectors of one index share a dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(pub Vec<f32>);

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
        for (a, b) in self.0.iter().zip(&other.0) {
            let (a, b) = (f64::from(*a), f64::from(*b));
            dot += a * b;
            na += a * a;
            nb += b * b;
        }
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        dot / (na.sqrt() * nb.sqrt())
    }
}

pub trait EmbeddingProvider: Send + Sync {
    /// Identifier recorded in index metadata.
    fn id(&self) -> String;
    fn dim(&self) -> usize;
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, VectorError>;
}

/// Embeds `texts`, checking that every text is nonempty and every returned
/// vector has the provider's dimension and finite values.
pub fn embed(texts: &[&str], provider: &dyn EmbeddingProvider) -> Result<Vec<EmbeddingVector>, VectorError> {
    if let Some(i) = texts.iter().position(|t| t.trim().is_empty()) {
        return Err(VectorError::InvalidInput(format!("text {i} is empty")));
    }
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let raw = provider.embed_batch(texts)?;
    if raw.len() != texts.len() {
        return Err(VectorError::ProviderUnavailable(format!(
            "provider returned {} vectors for {} texts",
            raw.len(),
            texts.len()
        )));
    }
    let dim = provider.dim();
    raw.into_iter()
        .map(|v| {
            if v.len() != dim {
                return Err(VectorError::DimensionMismatch { expected: dim, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(VectorError::ProviderUnavailable("non-finite embedding value".into()));
            }
            Ok(EmbeddingVector(v))
        })
        .collect()
}

/// Feature-hashing embedder over lowercased unigrams and bigrams, scaled to
/// unit norm. Offline and deterministic; values are nonnegative so cosine
/// similarities lie in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashingEmbedder {
    pub dim: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self { dim: 384 }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn embed_one(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0f32; self.dim];
        let tokens = alnum_tokens(text);
        let dim = self.dim as u64;
        for t in &tokens {
            v[(fnv1a(t.as_bytes()) % dim) as usize] += 1.0;
        }
        for w in tokens.windows(2) {
            let bigram = format!("{} {}", w[0], w[1]);
            v[(fnv1a(bigram.as_bytes()) % dim) as usize] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn id(&self) -> String {
        format!("hashing-{}", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, VectorError> {
        if self.dim == 0 {
            return Err(VectorError::InvalidConfig("embedding dimension is 0".into()));
        }
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// HTTP inference endpoint. Accepts OpenAI-style `{"data": [{"embedding": [...]}]}`
/// or a bare `[[...], ...]` response body.
#[derive(Debug, Clone)]
pub struct HttpEmbeddingProvider {
    pub endpoint: String,
    pub model: String,
    pub dim: usize,
    pub api_key: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EmbeddingResponse {
    OpenAi { data: Vec<EmbeddingItem> },
    Bare(Vec<Vec<f32>>),
}

#[derive(Deserialize)]
struct EmbeddingItem {
    embedding: Vec<f32>,
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn id(&self) -> String {
        self.model.clone()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, VectorError> {
        let unavailable = |e: &dyn std::fmt::Display| VectorError::ProviderUnavailable(e.to_string());
        let mut req = ureq::post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let body = serde_json::json!({ "model": self.model, "input": texts });
        let mut resp = req.send_json(&body).map_err(|e| unavailable(&e))?;
        let parsed: EmbeddingResponse = resp.body_mut().read_json().map_err(|e| unavailable(&e))?;
        Ok(match parsed {
            EmbeddingResponse::OpenAi { data } => data.into_iter().map(|d| d.embedding).collect(),
            EmbeddingResponse::Bare(v) => v,
        })
    }
}
