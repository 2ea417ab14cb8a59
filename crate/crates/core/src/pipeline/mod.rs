//! End-to-end orchestration: configuration, ingestion into the graph and
//! vector stores, snapshots, the query engine and benchmark runs.

mod bench;
mod config;
pub(crate) mod engine;
pub mod fixtures;
mod snapshot;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bench::{build_benchmark, run_benchmark, BenchmarkRun};
pub use config::{Config, EmbeddingConfig, EvalConfig, LlmConfig, RerankerConfig, TransportConfig};
pub use engine::{BaselineAnswer, Engine};
pub use snapshot::{load_snapshot, save_snapshot, CorpusSnapshot, SNAPSHOT_FORMAT, SNAPSHOT_VERSION};

use crate::graph::{EdgeType, GraphError, Label, PropertyGraph};
use crate::ingest::{
    drop_incomplete, fetch_fulltext, fetch_records, normalize_and_dedup, query_keywords, relevance_filter,
    FixtureTransport, HttpTransport, IngestError, KeywordExtractor, KeywordVector, ScoredRecord, TextExtractor,
    UreqTransport,
};
use crate::vector::{chunk_document, Chunk, EmbeddingProvider, VectorError, VectorStore};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
    #[error(transparent)]
    Agent(#[from] crate::agent::AgentError),
    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("snapshot was embedded with {snapshot}, engine uses {engine}")]
    EmbedderMismatch { snapshot: String, engine: String },
    #[error("io: {0}")]
    Io(String),
}

/// Record counts after each ingestion stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestionReport {
    pub fetched: usize,
    pub source_failures: Vec<String>,
    pub complete: usize,
    pub deduplicated: usize,
    pub query_keywords: Vec<String>,
    pub retained: usize,
    pub fulltext_ok: usize,
    /// DOI to the reason its full text is missing.
    pub fulltext_missing: BTreeMap<String, String>,
    pub chunks: usize,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub warnings: Vec<String>,
}

/// Everything ingestion produces; the content of a snapshot.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<ScoredRecord>,
    pub graph: PropertyGraph,
    pub store: VectorStore,
    /// One text card per paper with its graph neighbourhood, searched by the
    /// non-agentic baseline.
    pub cards: VectorStore,
    pub report: IngestionReport,
}

pub fn transport_for(cfg: &Config) -> Result<Box<dyn HttpTransport>, PipelineError> {
    Ok(match &cfg.transport {
        TransportConfig::Live { timeout_secs } => {
            Box::new(UreqTransport::new(std::time::Duration::from_secs(*timeout_secs)))
        }
        TransportConfig::Fixture { dir } => {
            Box::new(FixtureTransport::from_dir(dir).map_err(|e| PipelineError::Config(e.to_string()))?)
        }
        TransportConfig::Demo => Box::new(fixtures::demo_transport(&cfg.endpoints)),
    })
}

/// Text card for a paper: its properties and 1-hop neighbours.
pub fn paper_card(graph: &PropertyGraph, doi: &str) -> Option<String> {
    let id = graph.find(Label::Paper, &doi.into())?;
    let paper = graph.node(id);
    let mut by_type: BTreeMap<EdgeType, Vec<String>> = BTreeMap::new();
    for (t, dst) in graph.outgoing(id) {
        by_type.entry(*t).or_default().push(graph.node(*dst).natural_key().to_string());
    }
    let list = |t: EdgeType| by_type.get(&t).map(|v| v.join(", ")).unwrap_or_default();
    Some(format!(
        "Paper: {}\nDOI: {}\nYear: {}\nAuthors: {}\nDatabase: {}\nKeywords: {}\nCites: {}\nAbstract: {}",
        paper.property("title"),
        doi,
        list(EdgeType::PublishedIn),
        list(EdgeType::HasAuthor),
        list(EdgeType::IndexedIn),
        list(EdgeType::HasKeyword),
        list(EdgeType::Cites),
        paper.property("abstract"),
    ))
}

pub fn run_ingestion(
    cfg: &Config,
    transport: &dyn HttpTransport,
    extractor: &dyn TextExtractor,
    embedder: &dyn EmbeddingProvider,
) -> Result<Corpus, PipelineError> {
    cfg.validate()?;
    let mut report = IngestionReport::default();
    let fetched = fetch_records(&cfg.search, transport, &cfg.endpoints)?;
    report.fetched = fetched.records.len();
    report.source_failures = fetched.failures.iter().map(|f| format!("{}: {}", f.source_db, f.message)).collect();
    report.complete = drop_incomplete(&fetched.records).len();
    let records = normalize_and_dedup(&fetched.records);
    report.deduplicated = records.len();
    tracing::info!(fetched = report.fetched, complete = report.complete, deduplicated = report.deduplicated, "records");

    if records.is_empty() {
        report.warnings.push("no complete records fetched; the corpus is empty".into());
        tracing::warn!("empty corpus");
        let store = VectorStore::build(Vec::new(), embedder, cfg.bm25)?;
        return Ok(Corpus { records: Vec::new(), graph: PropertyGraph::new(), cards: store.clone(), store, report });
    }

    let kw = KeywordExtractor::fit_records(&records);
    let mut vectors: Vec<(usize, KeywordVector)> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        match kw.keywords(&r.keyword_text()) {
            Ok(v) => vectors.push((i, v)),
            Err(e) => tracing::warn!(doi = %r.doi, error = %e, "no keywords; record skipped"),
        }
    }
    let query_kv = query_keywords(&cfg.search.query, &kw)?;
    report.query_keywords = query_kv.terms.clone();
    let mut retained = relevance_filter(vectors.iter().map(|(i, v)| (&records[*i], v)), &query_kv);
    report.retained = retained.len();
    let kv_of: BTreeMap<&str, &KeywordVector> = vectors.iter().map(|(i, v)| (records[*i].doi.as_str(), v)).collect();

    retained.sort_by(|a, b| a.record.doi.cmp(&b.record.doi));
    let mut graph = PropertyGraph::new();
    let mut chunks: Vec<Chunk> = Vec::new();
    for scored in &retained {
        let r = &scored.record;
        let cited = match fetch_fulltext(r, transport, extractor) {
            Ok(doc) => {
                report.fulltext_ok += 1;
                chunks.extend(chunk_document(&doc.text, &r.doi, &cfg.chunking)?);
                doc.cited_dois
            }
            Err(e) => {
                tracing::warn!(doi = %r.doi, error = %e, "full text unavailable");
                report.fulltext_missing.insert(r.doi.clone(), e.to_string());
                report.warnings.push(format!("{}: full text unavailable", r.doi));
                Vec::new()
            }
        };
        graph.upsert_paper(r, kv_of[r.doi.as_str()], &cited)?;
    }
    report.chunks = chunks.len();
    report.graph_nodes = graph.node_count();
    report.graph_edges = graph.edge_count();

    let store = VectorStore::build(chunks, embedder, cfg.bm25)?;
    let cards: Vec<Chunk> = retained
        .iter()
        .filter_map(|s| {
            let text = paper_card(&graph, &s.record.doi)?;
            Some(Chunk {
                chunk_id: format!("card:{}", s.record.doi),
                doc_doi: s.record.doi.clone(),
                seq: 0,
                start_offset: 0,
                end_offset: text.chars().count(),
                text,
            })
        })
        .collect();
    let cards = VectorStore::build(cards, embedder, cfg.bm25)?;
    retained.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.record.doi.cmp(&b.record.doi)));
    Ok(Corpus { records: retained, graph, store, cards, report })
}
