//! Agentic hybrid retrieval-augmented QA over scientific literature.
//!
//! The crate is organised along the data flow of the engine:
//!
//! - [`ingest`]: bibliometric API clients, normalization, TF-IDF keywords and
//!   cosine-quartile relevance filtering, full-text download and DOI harvesting.
//! - [`graph`]: the embedded property graph (Paper, Author, Year, Database,
//!   Keyword and Citation nodes) with a Cypher-subset parser and executor.
//! - [`vector`]: character chunking, pluggable embeddings, exact L2 search and
//!   an Okapi BM25 index.
//! - [`retrieval`]: the sparse + dense ensemble and reranking with a reciprocal
//!   rank fusion fallback.
//! - [`agent`]: tool routing, NL to Cypher translation, grounded answering and
//!   preference-pair export.
//! - [`eval`]: synthetic benchmark generation, RAGAS-style metrics and the
//!   bootstrap margin of error.
//! - [`pipeline`]: configuration, end-to-end ingestion, snapshots and benchmark
//!   runs that the service binary drives.

pub mod agent;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod llm;
pub mod offline;
pub mod pipeline;
pub mod prompts;
pub mod retrieval;
pub mod text;
pub mod vector;

pub use graph::PropertyGraph;
pub use ingest::BibRecord;
