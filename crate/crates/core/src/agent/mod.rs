//! Tool-routing agent: picks GraphRAG or VectorRAG per question, runs the
//! tool and asks the generator for an answer grounded in what came back.

mod fewshot;
mod preference;
mod route;
mod translate;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{execute, schema_text, GraphError, PropertyGraph};
use crate::llm::{LlmClient, LlmError};
use crate::prompts;
use crate::retrieval::{ensemble_retrieve, rerank, Provenance, Reranker, RetrievalConfig, RetrievalError};
use crate::vector::{EmbeddingProvider, VectorError, VectorStore};

pub use fewshot::{
    CypherBundle, CypherExample, FewShotBundles, FewShotExample, RoutingBundle, CYPHER_EXAMPLES, ROUTING_EXAMPLES,
};
pub use preference::{export_preference_pairs, load_preference_pairs, PreferencePair};
pub use route::{heuristic_route, parse_tool_reply, route, routing_prompt};
pub use translate::{cypher_prompt, extract_cypher, rule_translate, translate_to_cypher, Translation};

pub const ABSTENTION: &str = "No supporting context was retrieved for this question.";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("invalid few-shot bundle: {0}")]
    InvalidBundle(String),
    #[error("routing failed: {0}")]
    RoutingFailed(String),
    #[error("cypher translation failed after {} attempts: {}", raw_outputs.len(), errors.join("; "))]
    TranslationFailed { raw_outputs: Vec<String>, errors: Vec<String> },
    #[error("LLM call failed during {stage}: {source}")]
    Llm { stage: String, source: LlmError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tool {
    Graph,
    Vector,
}

impl fmt::Display for Tool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tool::Graph => "graph",
            Tool::Vector => "vector",
        })
    }
}

impl std::str::FromStr for Tool {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "graph" => Ok(Tool::Graph),
            "vector" => Ok(Tool::Vector),
            other => Err(format!("unknown tool {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecidedBy {
    Llm,
    HeuristicFallback,
    Forced,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolChoice {
    pub tool: Tool,
    pub rationale: String,
    pub decided_by: DecidedBy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextSource {
    Graph,
    Dense,
    Sparse,
    Both,
    /// Knowledge-graph card found by the non-agentic baseline.
    Card,
}

impl From<Provenance> for ContextSource {
    fn from(p: Provenance) -> Self {
        match p {
            Provenance::Dense => ContextSource::Dense,
            Provenance::Sparse => ContextSource::Sparse,
            Provenance::Both => ContextSource::Both,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextItem {
    /// Chunk id, card id, or `"cypher"` for a rendered result table.
    pub id: String,
    pub text: String,
    pub source: ContextSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedAnswer {
    pub trace_id: String,
    pub question: String,
    pub choice: ToolChoice,
    pub contexts: Vec<ContextItem>,
    pub answer: String,
    pub generator_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cypher: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranked_by: Option<String>,
    #[serde(default)]
    pub rerank_fallback: bool,
}

impl RoutedAnswer {
    pub fn is_abstention(&self) -> bool {
        self.answer == ABSTENTION && self.contexts.is_empty()
    }
}

/// One prompt/reply exchange recorded in a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmCall {
    pub stage: String,
    pub model: String,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl LlmCall {
    /// Calls `llm`, recording the exchange in `calls`.
    pub fn run(calls: &mut Vec<LlmCall>, stage: &str, llm: &dyn LlmClient, prompt: &str) -> Result<String, AgentError> {
        let result = llm.complete(prompt);
        calls.push(LlmCall {
            stage: stage.to_string(),
            model: llm.id(),
            prompt: prompt.to_string(),
            reply: result.as_ref().ok().cloned(),
            error: result.as_ref().err().map(ToString::to_string),
        });
        result.map_err(|source| AgentError::Llm { stage: stage.to_string(), source })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub trace_id: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice: Option<ToolChoice>,
    pub calls: Vec<LlmCall>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cypher: Option<String>,
    pub contexts: Vec<ContextItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock milliseconds per stage; the only nondeterministic field.
    pub timings_ms: BTreeMap<String, u64>,
}

/// Stable id for a question asked against one snapshot.
pub fn trace_id(snapshot_id: &str, question: &str) -> String {
    let mut h = Sha256::new();
    h.update(snapshot_id.as_bytes());
    h.update([0]);
    h.update(question.as_bytes());
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub retrieval: RetrievalConfig,
    /// Use the cue-word router when no LLM router is configured or its
    /// replies are unreadable.
    pub heuristic_fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub force_tool: Option<Tool>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self { retrieval: RetrievalConfig::default(), heuristic_fallback: true, force_tool: None }
    }
}

pub struct AgentDeps<'a> {
    pub graph: &'a PropertyGraph,
    pub store: &'a VectorStore,
    pub embedder: &'a dyn EmbeddingProvider,
    pub reranker: Option<&'a dyn Reranker>,
    pub router: Option<&'a dyn LlmClient>,
    pub translator: &'a dyn LlmClient,
    pub generator: &'a dyn LlmClient,
    pub bundles: &'a FewShotBundles,
    pub config: &'a AgentConfig,
    /// Identifies the loaded corpus in trace ids.
    pub snapshot_id: &'a str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerOutcome {
    pub answer: RoutedAnswer,
    pub trace: Trace,
}

/// Error with the trace recorded up to the failure.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{error}")]
pub struct AgentFailure {
    pub error: AgentError,
    pub trace: Trace,
}

struct Retrieved {
    contexts: Vec<ContextItem>,
    cypher: Option<String>,
    ranked_by: Option<String>,
    rerank_fallback: bool,
}

/// Asks the generator to answer from `contexts` only; abstains without
/// calling it when there are none.
pub fn generate(
    question: &str,
    contexts: &[ContextItem],
    generator: &dyn LlmClient,
    calls: &mut Vec<LlmCall>,
) -> Result<String, AgentError> {
    if contexts.is_empty() {
        return Ok(ABSTENTION.to_string());
    }
    let texts: Vec<&str> = contexts.iter().map(|c| c.text.as_str()).collect();
    let prompt = prompts::answer_prompt(question, &texts);
    Ok(LlmCall::run(calls, "generate", generator, &prompt)?.trim().to_string())
}

fn elapsed_ms(t: Instant) -> u64 {
    u64::try_from(t.elapsed().as_millis()).unwrap_or(u64::MAX)
}

pub fn answer(question: &str, deps: &AgentDeps<'_>) -> Result<AnswerOutcome, Box<AgentFailure>> {
    let question = question.trim();
    let mut trace =
        Trace { trace_id: trace_id(deps.snapshot_id, question), question: question.to_string(), ..Trace::default() };
    let fail = |mut trace: Trace, error: AgentError| {
        trace.error = Some(error.to_string());
        Box::new(AgentFailure { error, trace })
    };
    if question.is_empty() {
        return Err(fail(trace, AgentError::EmptyQuestion));
    }

    let t = Instant::now();
    let choice = match deps.config.force_tool {
        Some(tool) => ToolChoice { tool, rationale: "tool forced by request".into(), decided_by: DecidedBy::Forced },
        None => {
            match route(question, deps.router, &deps.bundles.routing, deps.config.heuristic_fallback, &mut trace.calls)
            {
                Ok(c) => c,
                Err(e) => return Err(fail(trace, e)),
            }
        }
    };
    trace.timings_ms.insert("route".into(), elapsed_ms(t));
    trace.choice = Some(choice.clone());

    let t = Instant::now();
    let retrieved = match choice.tool {
        Tool::Graph => graph_tool(question, deps, &mut trace),
        Tool::Vector => vector_tool(question, deps),
    };
    trace.timings_ms.insert("retrieve".into(), elapsed_ms(t));
    let retrieved = match retrieved {
        Ok(r) => r,
        Err(e) => return Err(fail(trace, e)),
    };
    trace.cypher = retrieved.cypher.clone();
    trace.contexts = retrieved.contexts.clone();

    let t = Instant::now();
    let text = match generate(question, &retrieved.contexts, deps.generator, &mut trace.calls) {
        Ok(a) => a,
        Err(e) => return Err(fail(trace, e)),
    };
    trace.timings_ms.insert("generate".into(), elapsed_ms(t));
    trace.answer = Some(text.clone());

    let generator_id = if retrieved.contexts.is_empty() { "abstention".to_string() } else { deps.generator.id() };
    let answer = RoutedAnswer {
        trace_id: trace.trace_id.clone(),
        question: question.to_string(),
        choice,
        contexts: retrieved.contexts,
        answer: text,
        generator_id,
        cypher: retrieved.cypher,
        ranked_by: retrieved.ranked_by,
        rerank_fallback: retrieved.rerank_fallback,
    };
    Ok(AnswerOutcome { answer, trace })
}

fn graph_tool(question: &str, deps: &AgentDeps<'_>, trace: &mut Trace) -> Result<Retrieved, AgentError> {
    let schema = schema_text(deps.graph);
    let translation = translate_to_cypher(question, &schema, deps.translator, &deps.bundles.cypher, &mut trace.calls)?;
    trace.cypher = Some(translation.cypher.clone());
    let table = execute(&translation.query, deps.graph)?;
    let contexts = if table.is_empty() {
        Vec::new()
    } else {
        vec![ContextItem { id: "cypher".into(), text: table.to_context(), source: ContextSource::Graph, score: None }]
    };
    Ok(Retrieved { contexts, cypher: Some(translation.cypher), ranked_by: None, rerank_fallback: false })
}

fn vector_tool(question: &str, deps: &AgentDeps<'_>) -> Result<Retrieved, AgentError> {
    let empty = Retrieved { contexts: Vec::new(), cypher: None, ranked_by: None, rerank_fallback: false };
    if deps.store.is_empty() {
        return Ok(empty);
    }
    let cfg = &deps.config.retrieval;
    let candidates = match ensemble_retrieve(question, deps.store, deps.embedder, cfg.k_each) {
        Ok(c) => c,
        Err(RetrievalError::Vector(VectorError::EmptyIndex)) => return Ok(empty),
        Err(e) => return Err(e.into()),
    };
    if candidates.is_empty() {
        return Ok(empty);
    }
    let ranked = rerank(question, &candidates, deps.store, deps.reranker, cfg)?;
    let contexts = ranked
        .items
        .iter()
        .filter_map(|item| {
            deps.store.chunk(&item.chunk_id).map(|c| ContextItem {
                id: item.chunk_id.clone(),
                text: c.text.clone(),
                source: item.provenance.into(),
                score: Some(item.score),
            })
        })
        .collect();
    Ok(Retrieved { contexts, cypher: None, ranked_by: Some(ranked.ranked_by), rerank_fallback: ranked.fallback_used })
}
