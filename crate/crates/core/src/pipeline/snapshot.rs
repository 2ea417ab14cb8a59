use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Corpus, IngestionReport, PipelineError};
use crate::graph::{GraphSnapshot, PropertyGraph};
use crate::ingest::ScoredRecord;
use crate::vector::VectorStore;

pub const SNAPSHOT_FORMAT: &str = "hybridrag-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Serializable corpus state. The file is a JSON header line followed by the
/// JSON payload; the header carries the payload checksum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSnapshot {
    pub config_hash: String,
    pub records: Vec<ScoredRecord>,
    pub graph: GraphSnapshot,
    pub store: VectorStore,
    pub cards: VectorStore,
    pub report: IngestionReport,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    checksum: String,
}

impl CorpusSnapshot {
    pub fn from_corpus(corpus: &Corpus, config_hash: &str) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            records: corpus.records.clone(),
            graph: corpus.graph.to_snapshot(),
            store: corpus.store.clone(),
            cards: corpus.cards.clone(),
            report: corpus.report.clone(),
        }
    }

    pub fn into_corpus(self) -> Result<Corpus, PipelineError> {
        Ok(Corpus {
            records: self.records,
            graph: PropertyGraph::from_snapshot(self.graph)?,
            store: self.store,
            cards: self.cards,
            report: self.report,
        })
    }

    fn payload(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("snapshot serializes")
    }

    /// Checksum of the payload; identifies the corpus in trace ids.
    pub fn id(&self) -> String {
        hex::encode(Sha256::digest(self.payload()))
    }
}

/// Writes to a temporary sibling and renames it into place.
pub fn save_snapshot(snapshot: &CorpusSnapshot, path: &Path) -> Result<String, PipelineError> {
    let io = |e: std::io::Error| PipelineError::Io(format!("{}: {e}", path.display()));
    let payload = snapshot.payload();
    let checksum = hex::encode(Sha256::digest(&payload));
    let header = Header { format: SNAPSHOT_FORMAT.into(), version: SNAPSHOT_VERSION, checksum: checksum.clone() };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(&serde_json::to_vec(&header).expect("header serializes")).map_err(io)?;
        f.write_all(b"\n").map_err(io)?;
        f.write_all(&payload).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)?;
    Ok(checksum)
}

pub fn load_snapshot(path: &Path) -> Result<CorpusSnapshot, PipelineError> {
    let bytes = std::fs::read(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    let split = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| PipelineError::CorruptSnapshot("missing header line".into()))?;
    let header: Header =
        serde_json::from_slice(&bytes[..split]).map_err(|e| PipelineError::CorruptSnapshot(format!("header: {e}")))?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(PipelineError::CorruptSnapshot(format!("unknown format {:?}", header.format)));
    }
    if header.version != SNAPSHOT_VERSION {
        return Err(PipelineError::VersionMismatch { found: header.version, expected: SNAPSHOT_VERSION });
    }
    let payload = &bytes[split + 1..];
    if hex::encode(Sha256::digest(payload)) != header.checksum {
        return Err(PipelineError::CorruptSnapshot("checksum mismatch".into()));
    }
    serde_json::from_slice(payload).map_err(|e| PipelineError::CorruptSnapshot(format!("payload: {e}")))
}
