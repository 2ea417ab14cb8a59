use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::agent::Tool;
use crate::graph::cypher::quote;
use crate::graph::{execute, parse_cypher, EdgeType, Label, NodeRecord, PropertyGraph, Value};
use crate::llm::LlmClient;
use crate::prompts;
use crate::vector::Chunk;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QType {
    SubjectCentered,
    ObjectDiscovery,
    PredicateDiscovery,
    FactCheck,
    IndirectRelationship,
    VectorChunk,
}

impl QType {
    pub const GRAPH: [QType; 5] = [
        QType::SubjectCentered,
        QType::ObjectDiscovery,
        QType::PredicateDiscovery,
        QType::FactCheck,
        QType::IndirectRelationship,
    ];

    pub fn target_tool(self) -> Tool {
        if self == QType::VectorChunk {
            Tool::Vector
        } else {
            Tool::Graph
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QType::SubjectCentered => "subject_centered",
            QType::ObjectDiscovery => "object_discovery",
            QType::PredicateDiscovery => "predicate_discovery",
            QType::FactCheck => "fact_check",
            QType::IndirectRelationship => "indirect_relationship",
            QType::VectorChunk => "vector_chunk",
        }
    }
}

impl fmt::Display for QType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ItemProvenance {
    Chunk { chunk_id: String },
    Graph { template: String, nodes: Vec<String>, cypher: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub id: String,
    pub question: String,
    pub ground_truth: String,
    pub target_tool: Tool,
    pub qtype: QType,
    pub provenance: ItemProvenance,
}

impl BenchmarkItem {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.ground_truth.trim().is_empty() {
            return Err(EvalError::InvalidItem(format!("{}: empty ground truth", self.id)));
        }
        if self.target_tool != self.qtype.target_tool() {
            return Err(EvalError::InvalidItem(format!("{}: target tool does not match {}", self.id, self.qtype)));
        }
        Ok(())
    }
}

/// First nonempty reply line with a leading `Question:` label removed.
fn clean_question(reply: &str) -> Option<String> {
    let line = reply.lines().map(str::trim).find(|l| !l.is_empty())?;
    let line = line.strip_prefix("Question:").unwrap_or(line).trim();
    (!line.is_empty()).then(|| line.to_string())
}

/// Samples `n` distinct chunks and asks the LLM for one question per chunk;
/// the chunk text is the ground truth.
pub fn gen_vs_questions(
    chunks: &[Chunk],
    n: usize,
    llm: &dyn LlmClient,
    seed: u64,
) -> Result<Vec<BenchmarkItem>, EvalError> {
    if chunks.len() < n {
        return Err(EvalError::InsufficientChunks { needed: n, available: chunks.len() });
    }
    let mut sorted: Vec<&Chunk> = chunks.iter().collect();
    sorted.sort_by(|a, b| a.chunk_id.cmp(&b.chunk_id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, sorted.len(), n);
    let mut items = Vec::with_capacity(n);
    for (i, idx) in picks.into_iter().enumerate() {
        let chunk = sorted[idx];
        let reply = llm.complete(&prompts::question_prompt(&chunk.text)).map_err(EvalError::Llm)?;
        let question = clean_question(&reply)
            .ok_or_else(|| EvalError::GenerationFailed(format!("empty question for {}", chunk.chunk_id)))?;
        items.push(BenchmarkItem {
            id: format!("vs-{i:02}"),
            question,
            ground_truth: chunk.text.clone(),
            target_tool: Tool::Vector,
            qtype: QType::VectorChunk,
            provenance: ItemProvenance::Chunk { chunk_id: chunk.chunk_id.clone() },
        });
    }
    Ok(items)
}

/// A bound template: question text, Cypher and the nodes it names.
struct Binding {
    template: &'static str,
    question: String,
    cypher: String,
    nodes: Vec<String>,
}

fn node_ref(n: &NodeRecord) -> String {
    format!("{}:{}", n.label, n.natural_key())
}

fn title(n: &NodeRecord) -> String {
    n.property("title").to_string()
}

fn target_of<'g>(g: &'g PropertyGraph, paper: &NodeRecord, t: EdgeType) -> Vec<&'g NodeRecord> {
    let mut v: Vec<&NodeRecord> =
        g.outgoing(paper.id).iter().filter(|(et, _)| *et == t).map(|(_, id)| g.node(*id)).collect();
    v.sort_by(|a, b| a.natural_key().cmp(b.natural_key()));
    v
}

fn subject_centered(g: &PropertyGraph) -> Vec<Binding> {
    g.sorted_nodes(Label::Paper)
        .into_iter()
        .map(|p| Binding {
            template: "subject_centered",
            question: format!("What is the paper '{}' about?", title(p)),
            cypher: format!("MATCH (p:Paper {{title: {}}}) RETURN p.abstract", quote(&title(p))),
            nodes: vec![node_ref(p)],
        })
        .collect()
}

fn object_discovery(g: &PropertyGraph) -> Vec<Binding> {
    let forms: [(EdgeType, &str, &str); 5] = [
        (EdgeType::PublishedIn, "In which year was the paper '{}' published?", "y:Year) RETURN y.value"),
        (EdgeType::HasAuthor, "Who are the authors of the paper '{}'?", "a:Author) RETURN a.name"),
        (EdgeType::IndexedIn, "Which database indexes the paper '{}'?", "d:Database) RETURN d.name"),
        (EdgeType::HasKeyword, "Which keywords represent the paper '{}'?", "k:Keyword) RETURN k.term"),
        (EdgeType::Cites, "Which DOIs does the paper '{}' cite?", "c:Citation) RETURN c.doi"),
    ];
    let mut out = Vec::new();
    for p in g.sorted_nodes(Label::Paper) {
        for (t, nl, tail) in forms {
            if target_of(g, p, t).is_empty() {
                continue;
            }
            out.push(Binding {
                template: "object_discovery",
                question: nl.replace("{}", &title(p)),
                cypher: format!("MATCH (p:Paper {{title: {}}})-[:{t}]->({tail}", quote(&title(p))),
                nodes: vec![node_ref(p)],
            });
        }
    }
    out
}

fn entity_phrase(n: &NodeRecord) -> Option<(String, String)> {
    let key = n.natural_key();
    let pattern = |prop: &str| format!("(n:{} {{{prop}: {}}})", n.label, cypher_literal(key));
    match n.label {
        Label::Database => Some((format!("the database '{key}'"), pattern("name"))),
        Label::Author => Some((format!("the author '{key}'"), pattern("name"))),
        Label::Keyword => Some((format!("the keyword '{key}'"), pattern("term"))),
        Label::Year => Some((format!("the year {key}"), pattern("value"))),
        _ => None,
    }
}

fn cypher_literal(v: &Value) -> String {
    match v {
        Value::Str(s) => quote(s),
        other => other.to_string(),
    }
}

fn predicate_discovery(g: &PropertyGraph) -> Vec<Binding> {
    let mut out = Vec::new();
    for p in g.sorted_nodes(Label::Paper) {
        for t in [EdgeType::IndexedIn, EdgeType::PublishedIn, EdgeType::HasAuthor, EdgeType::HasKeyword] {
            for n in target_of(g, p, t) {
                let Some((phrase, pattern)) = entity_phrase(n) else { continue };
                out.push(Binding {
                    template: "predicate_discovery",
                    question: format!("How is {phrase} related to the paper '{}'?", title(p)),
                    cypher: format!("MATCH (p:Paper {{title: {}}})-[r]->{pattern} RETURN type(r)", quote(&title(p))),
                    nodes: vec![node_ref(p), node_ref(n)],
                });
            }
        }
    }
    out
}

/// Positive and negative (paper, keyword) pairs.
fn fact_check(g: &PropertyGraph) -> (Vec<Binding>, Vec<Binding>) {
    let keywords = g.sorted_nodes(Label::Keyword);
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for p in g.sorted_nodes(Label::Paper) {
        for k in &keywords {
            let term = k.natural_key().to_string();
            let b = Binding {
                template: "fact_check",
                question: format!("Is the paper '{}' represented by the keyword '{term}'?", title(p)),
                cypher: format!(
                    "MATCH (p:Paper {{title: {}}})-[:HAS_KEYWORD]->(k:Keyword {{term: {}}}) RETURN exists(*)",
                    quote(&title(p)),
                    quote(&term)
                ),
                nodes: vec![node_ref(p), node_ref(k)],
            };
            if g.has_edge(p.id, EdgeType::HasKeyword, k.id) {
                pos.push(b);
            } else {
                neg.push(b);
            }
        }
    }
    (pos, neg)
}

/// Positive and negative (keyword, year) pairs joined through some paper.
fn indirect(g: &PropertyGraph) -> (Vec<Binding>, Vec<Binding>) {
    let mut linked: BTreeSet<(Value, Value)> = BTreeSet::new();
    for p in g.nodes_with_label(Label::Paper) {
        for k in target_of(g, p, EdgeType::HasKeyword) {
            for y in target_of(g, p, EdgeType::PublishedIn) {
                linked.insert((k.natural_key().clone(), y.natural_key().clone()));
            }
        }
    }
    let years = g.sorted_nodes(Label::Year);
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for k in g.sorted_nodes(Label::Keyword) {
        for y in &years {
            let term = k.natural_key().to_string();
            let b = Binding {
                template: "indirect_relationship",
                question: format!(
                    "Is the keyword '{term}' associated with any paper published in {}?",
                    y.natural_key()
                ),
                cypher: format!(
                    "MATCH (k:Keyword {{term: {}}})<-[:HAS_KEYWORD]-(p:Paper)-[:PUBLISHED_IN]->(y:Year {{value: {}}}) RETURN exists(*)",
                    quote(&term),
                    y.natural_key()
                ),
                nodes: vec![node_ref(k), node_ref(y)],
            };
            if linked.contains(&(k.natural_key().clone(), y.natural_key().clone())) {
                pos.push(b);
            } else {
                neg.push(b);
            }
        }
    }
    (pos, neg)
}

fn pick(rng: &mut ChaCha8Rng, mut pool: Vec<Binding>, n: usize) -> Vec<Binding> {
    let idx = sample(rng, pool.len(), n.min(pool.len())).into_vec();
    let mut slots: Vec<Option<Binding>> = pool.drain(..).map(Some).collect();
    idx.into_iter().filter_map(|i| slots[i].take()).collect()
}

/// Half positive, half negative where possible; the other group fills any
/// shortfall.
fn pick_balanced(
    rng: &mut ChaCha8Rng,
    qtype: QType,
    (pos, neg): (Vec<Binding>, Vec<Binding>),
    n: usize,
) -> Result<Vec<Binding>, EvalError> {
    let available = pos.len() + neg.len();
    if available < n {
        return Err(EvalError::InsufficientGraph { qtype, needed: n, available });
    }
    let want_pos = n.div_ceil(2).min(pos.len()).max(n.saturating_sub(neg.len()));
    let mut out = pick(rng, pos, want_pos);
    out.extend(pick(rng, neg, n - want_pos));
    Ok(out)
}

/// Instantiates the five graph question templates `per_type` times each.
/// Ground truths come from executing each item's Cypher on `graph`.
pub fn gen_kg_questions(graph: &PropertyGraph, per_type: usize, seed: u64) -> Result<Vec<BenchmarkItem>, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(per_type * 5);
    for qtype in QType::GRAPH {
        let chosen = match qtype {
            QType::FactCheck => pick_balanced(&mut rng, qtype, fact_check(graph), per_type)?,
            QType::IndirectRelationship => pick_balanced(&mut rng, qtype, indirect(graph), per_type)?,
            _ => {
                let pool = match qtype {
                    QType::SubjectCentered => subject_centered(graph),
                    QType::ObjectDiscovery => object_discovery(graph),
                    _ => predicate_discovery(graph),
                };
                if pool.len() < per_type {
                    return Err(EvalError::InsufficientGraph { qtype, needed: per_type, available: pool.len() });
                }
                pick(&mut rng, pool, per_type)
            }
        };
        for b in chosen {
            let ground_truth = ground_truth_for(&b.cypher, graph)?;
            items.push(BenchmarkItem {
                id: format!("kg-{:02}", items.len()),
                question: b.question,
                ground_truth,
                target_tool: Tool::Graph,
                qtype,
                provenance: ItemProvenance::Graph { template: b.template.into(), nodes: b.nodes, cypher: b.cypher },
            });
        }
    }
    Ok(items)
}

/// Executes a stored template and renders its answer text.
pub fn ground_truth_for(cypher: &str, graph: &PropertyGraph) -> Result<String, EvalError> {
    let q = parse_cypher(cypher).map_err(|e| EvalError::InvalidItem(format!("{cypher}: {e}")))?;
    let table = execute(&q, graph).map_err(|e| EvalError::InvalidItem(e.to_string()))?;
    Ok(table.answer_text())
}

pub fn write_benchmark<W: Write>(mut out: W, items: &[BenchmarkItem]) -> Result<(), EvalError> {
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| EvalError::Io(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| EvalError::Io(e.to_string()))?;
    }
    Ok(())
}

pub fn read_benchmark<R: BufRead>(input: R) -> Result<Vec<BenchmarkItem>, EvalError> {
    let mut items = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| EvalError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let item: BenchmarkItem =
            serde_json::from_str(&line).map_err(|e| EvalError::Io(format!("line {}: {e}", n + 1)))?;
        item.validate()?;
        items.push(item);
    }
    Ok(items)
}
