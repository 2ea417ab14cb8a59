use serde::{Deserialize, Serialize};

use super::VectorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChunkingConfig {
    /// Window width in characters.
    pub size: usize,
    /// Characters shared by consecutive windows.
    pub overlap: usize,
}

impl Default for ChunkingConfig {
    fn default() -> Self {
        Self { size: 2024, overlap: 50 }
    }
}

impl ChunkingConfig {
    pub fn validate(&self) -> Result<(), VectorError> {
        if self.size == 0 || self.overlap >= self.size {
            return Err(VectorError::InvalidConfig(format!(
                "chunk overlap {} must be smaller than chunk size {}",
                self.overlap, self.size
            )));
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.size - self.overlap
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_doi: String,
    pub seq: usize,
    /// Character offsets into the source text, end exclusive.
    pub start_offset: usize,
    pub end_offset: usize,
    pub text: String,
}

pub fn chunk_id(doc_doi: &str, seq: usize) -> String {
    format!("{doc_doi}#{seq:04}")
}

/// Sliding character window: width `size`, stride `size - overlap`. The last
/// window ends at the end of the text and may be shorter.
pub fn chunk_document(text: &str, doc_doi: &str, config: &ChunkingConfig) -> Result<Vec<Chunk>, VectorError> {
    config.validate()?;
    if text.is_empty() {
        return Err(VectorError::EmptyDocument);
    }
    let mut bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    let n = bounds.len();
    bounds.push(text.len());

    let mut chunks = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + config.size).min(n);
        let seq = chunks.len();
        chunks.push(Chunk {
            chunk_id: chunk_id(doc_doi, seq),
            doc_doi: doc_doi.to_string(),
            seq,
            start_offset: start,
            end_offset: end,
            text: text[bounds[start]..bounds[end]].to_string(),
        });
        if end == n {
            break;
        }
        start += config.stride();
    }
    Ok(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn five_thousand_chars_three_windows() {
        let text: String = (0..5000).map(|i| char::from(b'a' + (i % 26) as u8)).collect();
        let chunks = chunk_document(&text, "10.1/x", &ChunkingConfig::default()).unwrap();
        let spans: Vec<(usize, usize)> = chunks.iter().map(|c| (c.start_offset, c.end_offset)).collect();
        assert_eq!(spans, vec![(0, 2024), (1974, 3998), (3948, 5000)]);
        assert_eq!(chunks[2].chunk_id, "10.1/x#0002");
    }

    #[test]
    fn short_text_single_chunk() {
        let text = "x".repeat(1000);
        let chunks = chunk_document(&text, "d", &ChunkingConfig::default()).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].text, text);
    }

    #[test]
    fn empty_text_rejected() {
        assert_eq!(chunk_document("", "d", &ChunkingConfig::default()), Err(VectorError::EmptyDocument));
    }

    #[test]
    fn overlap_must_be_smaller() {
        let cfg = ChunkingConfig { size: 10, overlap: 10 };
        assert!(matches!(chunk_document("abc", "d", &cfg), Err(VectorError::InvalidConfig(_))));
    }

    #[test]
    fn multibyte_offsets_are_characters() {
        let text = "é".repeat(3000);
        let chunks = chunk_document(&text, "d", &ChunkingConfig::default()).unwrap();
        assert_eq!(chunks[0].text.chars().count(), 2024);
        assert_eq!(chunks[1].start_offset, 1974);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn reconstruction(text in "[a-zé ]{1,6000}") {
            let cfg = ChunkingConfig::default();
            let chunks = chunk_document(&text, "d", &cfg).unwrap();
            let mut rebuilt = chunks[0].text.clone();
            for w in chunks.windows(2) {
                let prev: Vec<char> = w[0].text.chars().collect();
                let next: Vec<char> = w[1].text.chars().collect();
                prop_assert_eq!(&prev[prev.len() - cfg.overlap..], &next[..cfg.overlap]);
                rebuilt.extend(&next[cfg.overlap..]);
            }
            prop_assert!(chunks.iter().all(|c| c.text.chars().count() <= cfg.size));
            prop_assert_eq!(rebuilt, text);
        }
    }
}
