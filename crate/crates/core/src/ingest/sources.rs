//! Source adapters: PubMed E-utilities (esearch JSON + efetch XML), the
//! ArXiv Atom feed and a Semantic-Scholar-style JSON search endpoint.

use serde::{Deserialize, Serialize};

use super::keywords::query_text;
use super::transport::HttpTransport;
use super::{BibRecord, IngestError, SearchRequest, SourceDb};

pub trait SourceAdapter {
    fn source(&self) -> SourceDb;
    fn fetch(&self, req: &SearchRequest, transport: &dyn HttpTransport) -> Result<Vec<BibRecord>, IngestError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourceEndpoints {
    pub pubmed_base: String,
    pub arxiv_base: String,
    pub scholar_base: String,
    pub max_results: usize,
}

impl Default for SourceEndpoints {
    fn default() -> Self {
        Self {
            pubmed_base: "https://eutils.ncbi.nlm.nih.gov/entrez/eutils".into(),
            arxiv_base: "https://export.arxiv.org/api".into(),
            scholar_base: "https://api.semanticscholar.org/graph/v1".into(),
            max_results: 100,
        }
    }
}

impl SourceEndpoints {
    pub fn adapter(&self, source: SourceDb) -> Box<dyn SourceAdapter + '_> {
        match source {
            SourceDb::Pubmed => Box::new(PubMed { ep: self }),
            SourceDb::Arxiv => Box::new(Arxiv { ep: self }),
            SourceDb::Scholar => Box::new(Scholar { ep: self }),
        }
    }

    pub fn pubmed_esearch_url(&self) -> String {
        format!("{}/esearch.fcgi", self.pubmed_base)
    }

    pub fn pubmed_efetch_url(&self) -> String {
        format!("{}/efetch.fcgi", self.pubmed_base)
    }

    pub fn arxiv_query_url(&self) -> String {
        format!("{}/query", self.arxiv_base)
    }

    pub fn scholar_search_url(&self) -> String {
        format!("{}/paper/search", self.scholar_base)
    }
}

fn parse_err(source_db: SourceDb, message: impl ToString) -> IngestError {
    IngestError::Parse { source_db, message: message.to_string() }
}

fn descendant_text(node: roxmltree::Node<'_, '_>) -> String {
    node.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect::<String>()
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(name))
}

fn leading_year(s: &str) -> Option<i32> {
    s.trim().get(..4).and_then(|y| y.parse().ok())
}

struct PubMed<'a> {
    ep: &'a SourceEndpoints,
}

#[derive(Deserialize)]
struct ESearch {
    esearchresult: ESearchResult,
}

#[derive(Deserialize)]
struct ESearchResult {
    #[serde(default)]
    idlist: Vec<String>,
}

impl SourceAdapter for PubMed<'_> {
    fn source(&self) -> SourceDb {
        SourceDb::Pubmed
    }

    fn fetch(&self, req: &SearchRequest, transport: &dyn HttpTransport) -> Result<Vec<BibRecord>, IngestError> {
        let mut params = vec![
            ("db", "pubmed".to_string()),
            ("term", req.query.clone()),
            ("retmode", "json".to_string()),
            ("retmax", self.ep.max_results.to_string()),
        ];
        if req.date_from.is_some() || req.date_to.is_some() {
            params.push(("datetype", "pdat".into()));
            params.push(("mindate", req.date_from.unwrap_or(1800).to_string()));
            params.push(("maxdate", req.date_to.unwrap_or(3000).to_string()));
        }
        let body = transport.get(&self.ep.pubmed_esearch_url(), &params)?;
        let search: ESearch = serde_json::from_slice(&body).map_err(|e| parse_err(SourceDb::Pubmed, e))?;
        if search.esearchresult.idlist.is_empty() {
            return Ok(Vec::new());
        }
        let fetch_params = [
            ("db", "pubmed".to_string()),
            ("id", search.esearchresult.idlist.join(",")),
            ("retmode", "xml".to_string()),
        ];
        let xml = transport.get(&self.ep.pubmed_efetch_url(), &fetch_params)?;
        parse_pubmed_xml(&String::from_utf8_lossy(&xml))
    }
}

/// Parses an efetch `PubmedArticleSet`. Articles with a PMC id get the PMC
/// PDF link; others get an empty `pdf_url`.
pub fn parse_pubmed_xml(xml: &str) -> Result<Vec<BibRecord>, IngestError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| parse_err(SourceDb::Pubmed, e))?;
    let mut out = Vec::new();
    for article in doc.descendants().filter(|n| n.has_tag_name("PubmedArticle")) {
        let title =
            article.descendants().find(|n| n.has_tag_name("ArticleTitle")).map(descendant_text).unwrap_or_default();
        let abstract_text = article
            .descendants()
            .filter(|n| n.has_tag_name("AbstractText"))
            .map(descendant_text)
            .collect::<Vec<_>>()
            .join(" ");
        let year = article
            .descendants()
            .find(|n| n.has_tag_name("PubDate"))
            .and_then(|d| {
                child(d, "Year").and_then(|y| y.text()).or_else(|| child(d, "MedlineDate").and_then(|m| m.text()))
            })
            .and_then(leading_year);
        let authors = article
            .descendants()
            .filter(|n| n.has_tag_name("Author"))
            .filter_map(|a| {
                if let Some(c) = child(a, "CollectiveName") {
                    return Some(descendant_text(c));
                }
                let last = child(a, "LastName").and_then(|n| n.text())?;
                match child(a, "ForeName").and_then(|n| n.text()) {
                    Some(fore) => Some(format!("{fore} {last}")),
                    None => Some(last.to_string()),
                }
            })
            .collect();
        let id_of = |kind: &str| {
            article
                .descendants()
                .filter(|n| n.has_tag_name("ArticleId"))
                .find(|n| n.attribute("IdType") == Some(kind))
                .and_then(|n| n.text())
                .map(str::trim)
                .map(String::from)
        };
        let pdf_url =
            id_of("pmc").map(|pmc| format!("https://www.ncbi.nlm.nih.gov/pmc/articles/{pmc}/pdf/")).unwrap_or_default();
        out.push(BibRecord {
            doi: id_of("doi").unwrap_or_default(),
            title,
            abstract_text,
            year,
            authors,
            pdf_url,
            source_db: SourceDb::Pubmed,
        });
    }
    Ok(out)
}

struct Arxiv<'a> {
    ep: &'a SourceEndpoints,
}

impl SourceAdapter for Arxiv<'_> {
    fn source(&self) -> SourceDb {
        SourceDb::Arxiv
    }

    fn fetch(&self, req: &SearchRequest, transport: &dyn HttpTransport) -> Result<Vec<BibRecord>, IngestError> {
        let mut search = format!("({})", req.query);
        if req.date_from.is_some() || req.date_to.is_some() {
            search.push_str(&format!(
                " AND submittedDate:[{}01010000 TO {}12312359]",
                req.date_from.unwrap_or(1991),
                req.date_to.unwrap_or(2999)
            ));
        }
        let params =
            [("search_query", search), ("start", "0".to_string()), ("max_results", self.ep.max_results.to_string())];
        let body = transport.get(&self.ep.arxiv_query_url(), &params)?;
        parse_arxiv_atom(&String::from_utf8_lossy(&body))
    }
}

const ARXIV_NS: &str = "http://arxiv.org/schemas/atom";

/// Parses an ArXiv Atom feed. Entries without a journal DOI get the
/// DataCite DOI ArXiv assigns (`10.48550/arXiv.<id>`).
pub fn parse_arxiv_atom(xml: &str) -> Result<Vec<BibRecord>, IngestError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| parse_err(SourceDb::Arxiv, e))?;
    let mut out = Vec::new();
    for entry in doc.root_element().children().filter(|n| n.has_tag_name("entry")) {
        let text = |name: &str| child(entry, name).map(descendant_text).unwrap_or_default();
        let raw_id = text("id");
        let arxiv_id = strip_version(raw_id.rsplit("/abs/").next().unwrap_or_default().trim());
        let doi = entry
            .children()
            .find(|n| n.has_tag_name((ARXIV_NS, "doi")))
            .and_then(|n| n.text())
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| if arxiv_id.is_empty() { String::new() } else { format!("10.48550/arXiv.{arxiv_id}") });
        let authors = entry
            .children()
            .filter(|n| n.has_tag_name("author"))
            .filter_map(|a| child(a, "name").map(descendant_text))
            .collect();
        let pdf_url = entry
            .children()
            .filter(|n| n.has_tag_name("link"))
            .find(|l| l.attribute("title") == Some("pdf") || l.attribute("type") == Some("application/pdf"))
            .and_then(|l| l.attribute("href"))
            .unwrap_or_default()
            .to_string();
        out.push(BibRecord {
            doi,
            title: text("title"),
            abstract_text: text("summary"),
            year: leading_year(&text("published")),
            authors,
            pdf_url,
            source_db: SourceDb::Arxiv,
        });
    }
    Ok(out)
}

fn strip_version(id: &str) -> String {
    match id.rfind('v') {
        Some(pos) if pos + 1 < id.len() && id[pos + 1..].chars().all(|c| c.is_ascii_digit()) => id[..pos].to_string(),
        _ => id.to_string(),
    }
}

struct Scholar<'a> {
    ep: &'a SourceEndpoints,
}

#[derive(Deserialize)]
struct ScholarPage {
    #[serde(default)]
    data: Vec<ScholarPaper>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ScholarPaper {
    #[serde(default)]
    title: Option<String>,
    #[serde(default, rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    year: Option<i32>,
    #[serde(default)]
    authors: Vec<ScholarAuthor>,
    #[serde(default)]
    external_ids: Option<ScholarIds>,
    #[serde(default)]
    open_access_pdf: Option<ScholarPdf>,
}

#[derive(Deserialize)]
struct ScholarAuthor {
    #[serde(default)]
    name: Option<String>,
}

#[derive(Deserialize)]
struct ScholarIds {
    #[serde(default, rename = "DOI")]
    doi: Option<String>,
}

#[derive(Deserialize)]
struct ScholarPdf {
    #[serde(default)]
    url: Option<String>,
}

impl SourceAdapter for Scholar<'_> {
    fn source(&self) -> SourceDb {
        SourceDb::Scholar
    }

    fn fetch(&self, req: &SearchRequest, transport: &dyn HttpTransport) -> Result<Vec<BibRecord>, IngestError> {
        let mut params = vec![
            ("query", query_text(&req.query)),
            ("fields", "title,abstract,year,authors,externalIds,openAccessPdf".to_string()),
            ("limit", self.ep.max_results.to_string()),
        ];
        if req.date_from.is_some() || req.date_to.is_some() {
            let from = req.date_from.map(|y| y.to_string()).unwrap_or_default();
            let to = req.date_to.map(|y| y.to_string()).unwrap_or_default();
            params.push(("year", format!("{from}-{to}")));
        }
        let body = transport.get(&self.ep.scholar_search_url(), &params)?;
        parse_scholar_json(&body)
    }
}

pub fn parse_scholar_json(body: &[u8]) -> Result<Vec<BibRecord>, IngestError> {
    let page: ScholarPage = serde_json::from_slice(body).map_err(|e| parse_err(SourceDb::Scholar, e))?;
    Ok(page
        .data
        .into_iter()
        .map(|p| BibRecord {
            doi: p.external_ids.and_then(|i| i.doi).unwrap_or_default(),
            title: p.title.unwrap_or_default(),
            abstract_text: p.abstract_text.unwrap_or_default(),
            year: p.year,
            authors: p.authors.into_iter().filter_map(|a| a.name).collect(),
            pdf_url: p.open_access_pdf.and_then(|o| o.url).unwrap_or_default(),
            source_db: SourceDb::Scholar,
        })
        .collect())
}
