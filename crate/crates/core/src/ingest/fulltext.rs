//! Full-text download, text extraction and DOI harvesting from the
//! references region.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::transport::HttpTransport;
use super::{normalize_doi, BibRecord, IngestError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullTextDocument {
    pub doi: String,
    pub text: String,
    pub cited_dois: Vec<String>,
}

/// Turns downloaded bytes into plain text.
pub trait TextExtractor: Send + Sync {
    fn extract(&self, bytes: &[u8]) -> Result<String, IngestError>;
}

/// Accepts UTF-8 text (HTML tags stripped). Binary PDF payloads without a
/// text layer are rejected with `ExtractionFailed`; plug in a PDF extractor
/// for those.
#[derive(Debug, Default, Clone, Copy)]
pub struct PlainTextExtractor;

impl TextExtractor for PlainTextExtractor {
    fn extract(&self, bytes: &[u8]) -> Result<String, IngestError> {
        if bytes.starts_with(b"%PDF") {
            return Err(IngestError::ExtractionFailed("binary PDF payload needs a PDF extractor".into()));
        }
        let text =
            std::str::from_utf8(bytes).map_err(|e| IngestError::ExtractionFailed(format!("not UTF-8 text: {e}")))?;
        let text = if text.trim_start().starts_with('<') { strip_tags(text) } else { text.to_string() };
        if text.trim().is_empty() {
            return Err(IngestError::ExtractionFailed("no text content".into()));
        }
        Ok(text)
    }
}

fn strip_tags(html: &str) -> String {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(?s)<[^>]*>").expect("valid regex"));
    re.replace_all(html, " ").into_owned()
}

fn doi_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"10\.\d{4,9}/[-._;()/:A-Za-z0-9]+").expect("valid regex"))
}

/// Fraction of the document, counted from the end, scanned for references.
const REFERENCES_TAIL: f64 = 0.30;

fn scan_dois(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for m in doi_re().find_iter(text) {
        let doi = normalize_doi(m.as_str().trim_end_matches(['.', ',', ';', ':', ')']));
        if !out.contains(&doi) {
            out.push(doi);
        }
    }
    out
}

/// DOIs cited in the last 30% of the text, in order of first appearance;
/// falls back to the whole text when the tail has none.
pub fn harvest_dois(text: &str) -> Vec<String> {
    let total = text.chars().count();
    let skip = total - (total as f64 * REFERENCES_TAIL).round() as usize;
    let tail_start = text.char_indices().nth(skip).map_or(text.len(), |(i, _)| i);
    let tail = scan_dois(&text[tail_start..]);
    if tail.is_empty() {
        scan_dois(text)
    } else {
        tail
    }
}

pub fn fetch_fulltext(
    record: &BibRecord,
    transport: &dyn HttpTransport,
    extractor: &dyn TextExtractor,
) -> Result<FullTextDocument, IngestError> {
    if record.pdf_url.trim().is_empty() {
        return Err(IngestError::NotAvailable(format!("{} has no pdf_url", record.doi)));
    }
    let bytes = transport.get(&record.pdf_url, &[]).map_err(|e| IngestError::NotAvailable(e.to_string()))?;
    let text = extractor.extract(&bytes)?;
    let own = normalize_doi(&record.doi);
    let cited_dois = harvest_dois(&text).into_iter().filter(|d| *d != own).collect();
    Ok(FullTextDocument { doi: record.doi.clone(), text, cited_dois })
}
