use serde::{Deserialize, Serialize};

use super::{EmbeddingVector, Hit, VectorError};

/// Euclidean distance, accumulated in f64.
pub fn l2_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = f64::from(*x) - f64::from(*y);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Flat exact-search index over row-major vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseIndex {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f32>,
}

impl DenseIndex {
    pub fn new(dim: usize) -> Self {
        Self { dim, ids: Vec::new(), data: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn add(&mut self, id: impl Into<String>, v: &EmbeddingVector) -> Result<(), VectorError> {
        if v.dim() != self.dim {
            return Err(VectorError::DimensionMismatch { expected: self.dim, got: v.dim() });
        }
        self.ids.push(id.into());
        self.data.extend_from_slice(v.as_slice());
        Ok(())
    }

    /// Exact top-k by ascending L2 distance; ties broken by id.
    pub fn search(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<Hit>, VectorError> {
        if self.is_empty() {
            return Err(VectorError::EmptyIndex);
        }
        if query.dim() != self.dim {
            return Err(VectorError::DimensionMismatch { expected: self.dim, got: query.dim() });
        }
        let mut scored: Vec<(f64, &str)> =
            (0..self.len()).map(|i| (l2_distance(query.as_slice(), self.vector(i)), self.ids[i].as_str())).collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        Ok(scored.into_iter().take(k).map(|(d, id)| Hit { chunk_id: id.to_string(), score: d }).collect())
    }
}
