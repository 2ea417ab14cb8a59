//! Bibliometric ingestion: fetching from PubMed, ArXiv and a scholar-style
//! JSON API, normalization, keyword extraction and relevance filtering.

mod filter;
mod fulltext;
mod keywords;
pub mod sources;
pub mod transport;

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{cosine_similarity, quantile_linear, relevance_filter, ScoredRecord};
pub use fulltext::{fetch_fulltext, harvest_dois, FullTextDocument, PlainTextExtractor, TextExtractor};
pub use keywords::{extract_keywords, query_keywords, query_text, KeywordExtractor, KeywordVector};
pub use sources::{SourceAdapter, SourceEndpoints};
pub use transport::{FixtureTransport, HttpTransport, TransportError, UreqTransport};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid search request: {0}")]
    InvalidRequest(String),
    #[error("every requested source failed: {0:?}")]
    AllSourcesFailed(Vec<SourceFailure>),
    #[error("{source_db} response could not be parsed: {message}")]
    Parse { source_db: SourceDb, message: String },
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("document text tokenizes to nothing")]
    EmptyText,
    #[error("record is not part of the corpus")]
    NotInCorpus,
    #[error("full text not available: {0}")]
    NotAvailable(String),
    #[error("text extraction failed: {0}")]
    ExtractionFailed(String),
    #[error("corpus file error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus line {line}: {message}")]
    CorpusFormat { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceDb {
    Pubmed,
    Arxiv,
    Scholar,
}

impl SourceDb {
    pub const ALL: [SourceDb; 3] = [SourceDb::Pubmed, SourceDb::Arxiv, SourceDb::Scholar];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceDb::Pubmed => "pubmed",
            SourceDb::Arxiv => "arxiv",
            SourceDb::Scholar => "scholar",
        }
    }
}

impl fmt::Display for SourceDb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SourceDb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pubmed" => Ok(SourceDb::Pubmed),
            "arxiv" => Ok(SourceDb::Arxiv),
            "scholar" | "google_scholar" => Ok(SourceDb::Scholar),
            other => Err(format!("unknown source database '{other}'")),
        }
    }
}

/// One publication as returned by a source. Raw records may have empty
/// fields; [`normalize_and_dedup`] drops those.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibRecord {
    pub doi: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub year: Option<i32>,
    pub authors: Vec<String>,
    pub pdf_url: String,
    pub source_db: SourceDb,
}

impl BibRecord {
    /// Title and abstract joined, the text keywords are extracted from.
    pub fn keyword_text(&self) -> String {
        format!("{} {}", self.title, self.abstract_text)
    }

    fn is_complete(&self) -> bool {
        !self.doi.is_empty()
            && !self.title.is_empty()
            && !self.abstract_text.is_empty()
            && self.year.is_some()
            && !self.authors.is_empty()
            && !self.pdf_url.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    #[serde(default)]
    pub date_from: Option<i32>,
    #[serde(default)]
    pub date_to: Option<i32>,
    pub sources: Vec<SourceDb>,
}

impl SearchRequest {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.query.trim().is_empty() {
            return Err(IngestError::InvalidRequest("query is empty".into()));
        }
        if self.sources.is_empty() {
            return Err(IngestError::InvalidRequest("no sources selected".into()));
        }
        if let (Some(from), Some(to)) = (self.date_from, self.date_to) {
            if from > to {
                return Err(IngestError::InvalidRequest(format!("date_from {from} is after date_to {to}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFailure {
    pub source_db: SourceDb,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchOutcome {
    pub records: Vec<BibRecord>,
    pub failures: Vec<SourceFailure>,
}

/// Queries every requested source. A failing source is logged and reported
/// in [`FetchOutcome::failures`]; only when all of them fail is it an error.
pub fn fetch_records(
    req: &SearchRequest,
    transport: &dyn HttpTransport,
    endpoints: &SourceEndpoints,
) -> Result<FetchOutcome, IngestError> {
    req.validate()?;
    let mut requested: Vec<SourceDb> = req.sources.clone();
    requested.sort();
    requested.dedup();

    let mut outcome = FetchOutcome::default();
    for source in requested {
        let adapter = endpoints.adapter(source);
        match adapter.fetch(req, transport) {
            Ok(mut records) => {
                tracing::info!(%source, count = records.len(), "fetched records");
                outcome.records.append(&mut records);
            }
            Err(err) => {
                tracing::warn!(%source, error = %err, "source failed");
                outcome.failures.push(SourceFailure { source_db: source, message: err.to_string() });
            }
        }
    }
    if outcome.records.is_empty() && outcome.failures.len() == req_source_count(req) {
        return Err(IngestError::AllSourcesFailed(outcome.failures));
    }
    Ok(outcome)
}

fn req_source_count(req: &SearchRequest) -> usize {
    req.sources.iter().collect::<HashSet<_>>().len()
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Canonical DOI form: lowercase, without resolver prefix.
pub fn normalize_doi(doi: &str) -> String {
    let d = doi.trim();
    let lower = d.to_ascii_lowercase();
    let stripped = ["https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/", "doi:"]
        .iter()
        .find_map(|p| lower.strip_prefix(p))
        .unwrap_or(&lower);
    stripped.trim().to_string()
}

fn normalize_one(r: &BibRecord) -> BibRecord {
    BibRecord {
        doi: normalize_doi(&r.doi),
        title: collapse_ws(&r.title),
        abstract_text: collapse_ws(&r.abstract_text),
        year: r.year.filter(|y| *y > 0),
        authors: r.authors.iter().map(|a| collapse_ws(a)).filter(|a| !a.is_empty()).collect(),
        pdf_url: r.pdf_url.trim().to_string(),
        source_db: r.source_db,
    }
}

/// Normalizes whitespace and DOIs and drops records with any missing field.
pub fn drop_incomplete(records: &[BibRecord]) -> Vec<BibRecord> {
    records.iter().map(normalize_one).filter(BibRecord::is_complete).collect()
}

/// Drops records with any missing field, then collapses duplicate
/// (doi, title) pairs keeping the first occurrence.
pub fn normalize_and_dedup(records: &[BibRecord]) -> Vec<BibRecord> {
    let mut seen = HashSet::new();
    drop_incomplete(records).into_iter().filter(|r| seen.insert((r.doi.clone(), r.title.to_lowercase()))).collect()
}

/// Writes records as JSON lines.
pub fn write_jsonl<W: Write>(mut out: W, records: &[BibRecord]) -> Result<(), IngestError> {
    for r in records {
        let line =
            serde_json::to_string(r).map_err(|e| IngestError::CorpusFormat { line: 0, message: e.to_string() })?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<BibRecord>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| IngestError::CorpusFormat { line: i + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn record(doi: &str, title: &str, abstract_text: &str) -> BibRecord {
        BibRecord {
            doi: doi.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            year: Some(2024),
            authors: vec!["Ada Lovelace".into()],
            pdf_url: format!("https://example.org/{doi}.pdf"),
            source_db: SourceDb::Arxiv,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::record;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicate_pair_collapses_to_first() {
        let mut a = record("10.1/a", "Title", "first");
        a.source_db = SourceDb::Pubmed;
        let b = record("10.1/A", "Title", "second");
        let out = normalize_and_dedup(&[a, b]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].abstract_text, "first");
    }

    #[test]
    fn missing_fields_are_dropped() {
        let mut no_abstract = record("10.1/a", "T", "");
        let out = normalize_and_dedup(std::slice::from_ref(&no_abstract));
        assert!(out.is_empty());
        no_abstract.abstract_text = "x".into();
        no_abstract.year = None;
        assert!(normalize_and_dedup(&[no_abstract]).is_empty());
        assert!(normalize_and_dedup(&[]).is_empty());
    }

    #[test]
    fn doi_prefixes_stripped() {
        assert_eq!(normalize_doi(" https://doi.org/10.1000/ABC "), "10.1000/abc");
        assert_eq!(normalize_doi("doi:10.1/x"), "10.1/x");
    }

    #[test]
    fn request_validation() {
        let mut req =
            SearchRequest { query: "llm".into(), date_from: Some(2023), date_to: Some(2025), sources: vec![] };
        assert!(matches!(req.validate(), Err(IngestError::InvalidRequest(_))));
        req.sources = vec![SourceDb::Arxiv];
        assert!(req.validate().is_ok());
        req.date_from = Some(2026);
        assert!(matches!(req.validate(), Err(IngestError::InvalidRequest(_))));
    }

    #[test]
    fn jsonl_round_trip_uses_interchange_keys() {
        let recs = vec![record("10.1/a", "T", "A"), record("10.1/b", "U", "B")];
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        for key in ["doi", "title", "abstract", "year", "authors", "pdf_url", "source_db"] {
            assert!(first.get(key).is_some(), "missing key {key}");
        }
        assert!(text.ends_with('\n'));
        assert_eq!(read_jsonl(buf.as_slice()).unwrap(), recs);
    }

    fn arb_record() -> impl Strategy<Value = BibRecord> {
        (
            "10\\.[0-9]{1,2}/[a-c]{1,2}",
            "[A-C ]{0,4}",
            "[a-b ]{0,3}",
            proptest::option::of(2020i32..2026),
            proptest::collection::vec("[A-B ]{0,3}", 0..3),
        )
            .prop_map(|(doi, title, abs, year, authors)| BibRecord {
                doi,
                title,
                abstract_text: abs,
                year,
                authors,
                pdf_url: "u".into(),
                source_db: SourceDb::Scholar,
            })
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(recs in proptest::collection::vec(arb_record(), 0..20)) {
            let once = normalize_and_dedup(&recs);
            let twice = normalize_and_dedup(&once);
            prop_assert_eq!(&once, &twice);
            let mut keys = HashSet::new();
            for r in &once {
                prop_assert!(r.is_complete());
                prop_assert!(keys.insert((r.doi.clone(), r.title.to_lowercase())));
            }
        }
    }
}
