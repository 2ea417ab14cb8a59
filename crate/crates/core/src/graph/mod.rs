//! Embedded property graph for bibliometric metadata.
//!
//! Every ingested paper becomes a `Paper` node (doi, title, abstract) with
//! edges to shared `Author`, `Year`, `Database`, `Keyword` and `Citation`
//! nodes. Shared nodes are keyed by their natural key so they are created
//! once and reused across papers.

pub mod cypher;
mod exec;
mod value;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{BibRecord, KeywordVector, SourceDb};

pub use cypher::{parse_cypher, CypherError, Query};
pub use exec::{display_value, execute, ResultTable};
pub use value::Value;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("unknown label '{0}'")]
    UnknownLabel(String),
    #[error("unknown relationship type '{0}'")]
    UnknownEdgeType(String),
    #[error("corrupt graph snapshot: {0}")]
    CorruptSnapshot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Paper,
    Author,
    Year,
    Database,
    Keyword,
    Citation,
}

impl Label {
    pub const ALL: [Label; 6] =
        [Label::Paper, Label::Author, Label::Year, Label::Database, Label::Keyword, Label::Citation];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Paper => "Paper",
            Label::Author => "Author",
            Label::Year => "Year",
            Label::Database => "Database",
            Label::Keyword => "Keyword",
            Label::Citation => "Citation",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        Label::ALL.into_iter().find(|l| l.as_str() == s)
    }

    /// Property holding the natural key.
    pub fn key_property(self) -> &'static str {
        match self {
            Label::Paper | Label::Citation => "doi",
            Label::Author | Label::Database => "name",
            Label::Year => "value",
            Label::Keyword => "term",
        }
    }

    pub fn properties(self) -> &'static [&'static str] {
        match self {
            Label::Paper => &["doi", "title", "abstract"],
            Label::Author | Label::Database => &["name"],
            Label::Year => &["value"],
            Label::Keyword => &["term"],
            Label::Citation => &["doi"],
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeType {
    #[serde(rename = "HAS_AUTHOR")]
    HasAuthor,
    #[serde(rename = "PUBLISHED_IN")]
    PublishedIn,
    #[serde(rename = "INDEXED_IN")]
    IndexedIn,
    #[serde(rename = "HAS_KEYWORD")]
    HasKeyword,
    #[serde(rename = "CITES")]
    Cites,
}

impl EdgeType {
    pub const ALL: [EdgeType; 5] =
        [EdgeType::HasAuthor, EdgeType::PublishedIn, EdgeType::IndexedIn, EdgeType::HasKeyword, EdgeType::Cites];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeType::HasAuthor => "HAS_AUTHOR",
            EdgeType::PublishedIn => "PUBLISHED_IN",
            EdgeType::IndexedIn => "INDEXED_IN",
            EdgeType::HasKeyword => "HAS_KEYWORD",
            EdgeType::Cites => "CITES",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeType> {
        EdgeType::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Label required at the target end; the source is always a Paper.
    pub fn target(self) -> Label {
        match self {
            EdgeType::HasAuthor => Label::Author,
            EdgeType::PublishedIn => Label::Year,
            EdgeType::IndexedIn => Label::Database,
            EdgeType::HasKeyword => Label::Keyword,
            EdgeType::Cites => Label::Citation,
        }
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub label: Label,
    pub properties: BTreeMap<String, Value>,
}

impl NodeRecord {
    pub fn property(&self, key: &str) -> &Value {
        self.properties.get(key).unwrap_or(&Value::Null)
    }

    pub fn natural_key(&self) -> &Value {
        self.property(self.label.key_property())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: NodeId,
    #[serde(rename = "type")]
    pub edge_type: EdgeType,
    pub dst: NodeId,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationReport {
    pub nodes_created: usize,
    pub edges_created: usize,
}

/// In-memory property graph with natural-key indexes and adjacency lists.
#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    nodes: Vec<NodeRecord>,
    edges: BTreeSet<EdgeRecord>,
    keys: HashMap<(Label, Value), NodeId>,
    outgoing: Vec<Vec<(EdgeType, NodeId)>>,
    incoming: Vec<Vec<(EdgeType, NodeId)>>,
}

/// Display name of a source database node.
pub fn database_name(source: SourceDb) -> &'static str {
    match source {
        SourceDb::Pubmed => "PubMed",
        SourceDb::Arxiv => "ArXiv",
        SourceDb::Scholar => "Google Scholar",
    }
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &NodeRecord {
        &self.nodes[id.0 as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeRecord> {
        self.edges.iter()
    }

    pub fn has_edge(&self, src: NodeId, edge_type: EdgeType, dst: NodeId) -> bool {
        self.edges.contains(&EdgeRecord { src, edge_type, dst })
    }

    pub fn outgoing(&self, id: NodeId) -> &[(EdgeType, NodeId)] {
        &self.outgoing[id.0 as usize]
    }

    pub fn incoming(&self, id: NodeId) -> &[(EdgeType, NodeId)] {
        &self.incoming[id.0 as usize]
    }

    pub fn find(&self, label: Label, key: &Value) -> Option<NodeId> {
        self.keys.get(&(label, key.clone())).copied()
    }

    pub fn nodes_with_label(&self, label: Label) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.iter().filter(move |n| n.label == label)
    }

    /// Nodes of a label sorted by natural key.
    pub fn sorted_nodes(&self, label: Label) -> Vec<&NodeRecord> {
        let mut v: Vec<&NodeRecord> = self.nodes_with_label(label).collect();
        v.sort_by(|a, b| a.natural_key().cmp(b.natural_key()));
        v
    }

    fn get_or_create(
        &mut self,
        label: Label,
        properties: BTreeMap<String, Value>,
        report: &mut MutationReport,
    ) -> Result<NodeId, GraphError> {
        let key = properties.get(label.key_property()).cloned().unwrap_or(Value::Null);
        if key.is_empty() {
            return Err(GraphError::SchemaViolation(format!("{label} node without {}", label.key_property())));
        }
        if let Some(id) = self.find(label, &key) {
            return Ok(id);
        }
        let id = NodeId(u32::try_from(self.nodes.len()).expect("node count fits u32"));
        self.nodes.push(NodeRecord { id, label, properties });
        self.outgoing.push(Vec::new());
        self.incoming.push(Vec::new());
        self.keys.insert((label, key), id);
        report.nodes_created += 1;
        Ok(id)
    }

    fn link(&mut self, src: NodeId, edge_type: EdgeType, dst: NodeId, report: &mut MutationReport) {
        if self.edges.insert(EdgeRecord { src, edge_type, dst }) {
            self.outgoing[src.0 as usize].push((edge_type, dst));
            self.incoming[dst.0 as usize].push((edge_type, src));
            report.edges_created += 1;
        }
    }

    /// Inserts a paper with its metadata nodes and the five edge families.
    /// Repeating the call is a no-op.
    pub fn upsert_paper(
        &mut self,
        record: &BibRecord,
        keywords: &KeywordVector,
        cited_dois: &[String],
    ) -> Result<MutationReport, GraphError> {
        for (field, value) in [("doi", &record.doi), ("title", &record.title), ("abstract", &record.abstract_text)] {
            if value.trim().is_empty() {
                return Err(GraphError::SchemaViolation(format!("paper {field} is empty")));
            }
        }
        let year = record.year.ok_or_else(|| GraphError::SchemaViolation("paper year is missing".into()))?;

        let mut report = MutationReport::default();
        let paper = self.upsert_paper_node(record, &mut report)?;

        let year_node = self.get_or_create(Label::Year, props("value", Value::Int(year.into())), &mut report)?;
        self.link(paper, EdgeType::PublishedIn, year_node, &mut report);

        let db = self.get_or_create(
            Label::Database,
            props("name", Value::from(database_name(record.source_db))),
            &mut report,
        )?;
        self.link(paper, EdgeType::IndexedIn, db, &mut report);

        for author in &record.authors {
            let a = self.get_or_create(Label::Author, props("name", Value::from(author.as_str())), &mut report)?;
            self.link(paper, EdgeType::HasAuthor, a, &mut report);
        }
        for term in &keywords.terms {
            let k = self.get_or_create(Label::Keyword, props("term", Value::from(term.as_str())), &mut report)?;
            self.link(paper, EdgeType::HasKeyword, k, &mut report);
        }
        for doi in cited_dois {
            let c = self.get_or_create(Label::Citation, props("doi", Value::from(doi.as_str())), &mut report)?;
            self.link(paper, EdgeType::Cites, c, &mut report);
        }
        Ok(report)
    }

    fn upsert_paper_node(&mut self, record: &BibRecord, report: &mut MutationReport) -> Result<NodeId, GraphError> {
        let mut properties = props("doi", Value::from(record.doi.as_str()));
        properties.insert("title".into(), Value::from(record.title.as_str()));
        properties.insert("abstract".into(), Value::from(record.abstract_text.as_str()));
        let id = self.get_or_create(Label::Paper, properties.clone(), report)?;
        // Conflicting metadata for one DOI resolves to the smaller
        // (title, abstract) so the result does not depend on insertion order.
        let node = &mut self.nodes[id.0 as usize];
        let current = (node.property("title").clone(), node.property("abstract").clone());
        let incoming = (properties["title"].clone(), properties["abstract"].clone());
        if incoming < current {
            node.properties = properties;
        }
        Ok(id)
    }

    /// Serializable snapshot with node and edge arrays.
    pub fn to_snapshot(&self) -> GraphSnapshot {
        GraphSnapshot { nodes: self.nodes.clone(), edges: self.edges.iter().copied().collect() }
    }

    pub fn from_snapshot(snapshot: GraphSnapshot) -> Result<Self, GraphError> {
        let mut g = PropertyGraph::new();
        for (i, node) in snapshot.nodes.into_iter().enumerate() {
            if node.id.0 as usize != i {
                return Err(GraphError::CorruptSnapshot(format!("node {i} has id {}", node.id.0)));
            }
            let key = (node.label, node.natural_key().clone());
            if key.1.is_empty() || g.keys.insert(key, node.id).is_some() {
                return Err(GraphError::CorruptSnapshot(format!("duplicate or missing natural key for node {i}")));
            }
            g.nodes.push(node);
            g.outgoing.push(Vec::new());
            g.incoming.push(Vec::new());
        }
        let mut report = MutationReport::default();
        for e in snapshot.edges {
            let n = g.nodes.len() as u32;
            if e.src.0 >= n || e.dst.0 >= n {
                return Err(GraphError::CorruptSnapshot("edge endpoint out of range".into()));
            }
            if g.node(e.src).label != Label::Paper || g.node(e.dst).label != e.edge_type.target() {
                return Err(GraphError::CorruptSnapshot(format!("{} edge between wrong labels", e.edge_type)));
            }
            g.link(e.src, e.edge_type, e.dst, &mut report);
        }
        Ok(g)
    }
}

fn props(key: &str, value: Value) -> BTreeMap<String, Value> {
    BTreeMap::from([(key.to_string(), value)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

/// Schema rendering for prompts. The schema is static, so the text does not
/// depend on the graph's contents.
pub fn schema_text(_graph: &PropertyGraph) -> String {
    let mut out = String::from("Node labels and properties:\n");
    for label in Label::ALL {
        out.push_str(&format!("  (:{}) {{{}}}\n", label, label.properties().join(", ")));
    }
    out.push_str("Relationship types:\n");
    for t in EdgeType::ALL {
        out.push_str(&format!("  (:Paper)-[:{}]->(:{})\n", t, t.target()));
    }
    out.push_str("Year.value is an integer; all other properties are strings.\n");
    out
}
