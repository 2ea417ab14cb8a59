use serde::{Deserialize, Serialize};

use super::{Config, Corpus, CorpusSnapshot, PipelineError};
use crate::agent::{
    self, generate, trace_id, AgentConfig, AgentDeps, AgentFailure, AnswerOutcome, ContextItem, ContextSource,
    FewShotBundles, Tool, Trace,
};
use crate::graph::schema_text;
use crate::llm::LlmClient;
use crate::retrieval::{rrf_fuse, Reranker};
use crate::vector::{EmbeddingProvider, VectorError};

/// Answer of the non-agentic baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineAnswer {
    pub trace_id: String,
    pub question: String,
    pub contexts: Vec<ContextItem>,
    pub answer: String,
}

/// A loaded corpus plus the models that answer questions over it.
pub struct Engine {
    pub corpus: Corpus,
    pub snapshot_id: String,
    pub config_hash: String,
    pub generator: Box<dyn LlmClient>,
    pub router: Option<Box<dyn LlmClient>>,
    pub embedder: Box<dyn EmbeddingProvider>,
    pub reranker: Option<Box<dyn Reranker>>,
    pub bundles: FewShotBundles,
    pub agent: AgentConfig,
}

impl Engine {
    pub fn new(snapshot: CorpusSnapshot, cfg: &Config) -> Result<Self, PipelineError> {
        let embedder = cfg.embedding.build();
        if snapshot.store.provider_id() != embedder.id() {
            return Err(PipelineError::EmbedderMismatch {
                snapshot: snapshot.store.provider_id().to_string(),
                engine: embedder.id(),
            });
        }
        let bundles = FewShotBundles::load(cfg.routing_examples.as_deref(), cfg.cypher_examples.as_deref())?;
        let snapshot_id = snapshot.id();
        let config_hash = snapshot.config_hash.clone();
        Ok(Self {
            corpus: snapshot.into_corpus()?,
            snapshot_id,
            config_hash,
            generator: cfg.llm.build(),
            router: cfg.router.as_ref().map(|r| r.build()),
            embedder,
            reranker: cfg.reranker.as_ref().map(|r| r.build()),
            bundles,
            agent: cfg.agent.clone(),
        })
    }

    pub fn schema(&self) -> String {
        schema_text(&self.corpus.graph)
    }

    /// Routed answer. `force_tool` bypasses the router; `generator`
    /// overrides the configured answer model.
    pub fn answer_with(
        &self,
        question: &str,
        force_tool: Option<Tool>,
        generator: Option<&dyn LlmClient>,
    ) -> Result<AnswerOutcome, Box<AgentFailure>> {
        let mut config = self.agent.clone();
        if force_tool.is_some() {
            config.force_tool = force_tool;
        }
        let deps = AgentDeps {
            graph: &self.corpus.graph,
            store: &self.corpus.store,
            embedder: self.embedder.as_ref(),
            reranker: self.reranker.as_deref(),
            router: self.router.as_deref(),
            translator: self.generator.as_ref(),
            generator: generator.unwrap_or(self.generator.as_ref()),
            bundles: &self.bundles,
            config: &config,
            snapshot_id: &self.snapshot_id,
        };
        agent::answer(question, &deps)
    }

    pub fn answer(&self, question: &str) -> Result<AnswerOutcome, Box<AgentFailure>> {
        self.answer_with(question, None, None)
    }

    /// Non-agentic baseline: dense search over full-text chunks and graph
    /// cards, fused by reciprocal rank, answered by the generator.
    pub fn baseline(&self, question: &str) -> Result<(BaselineAnswer, Trace), Box<AgentFailure>> {
        let question = question.trim();
        let mut trace = Trace {
            trace_id: trace_id(&self.snapshot_id, &format!("baseline\0{question}")),
            question: question.to_string(),
            ..Trace::default()
        };
        let fail = |mut trace: Trace, error: agent::AgentError| {
            trace.error = Some(error.to_string());
            Box::new(AgentFailure { error, trace })
        };
        if question.is_empty() {
            return Err(fail(trace, agent::AgentError::EmptyQuestion));
        }
        let k = self.agent.retrieval.k_each;
        let search = |store: &crate::vector::VectorStore| match store.dense_search(question, self.embedder.as_ref(), k)
        {
            Ok(h) => Ok(h),
            Err(VectorError::EmptyIndex) => Ok(Vec::new()),
            Err(e) => Err(e),
        };
        let (chunks, cards) = match (search(&self.corpus.store), search(&self.corpus.cards)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return Err(fail(trace, crate::retrieval::RetrievalError::from(e).into())),
        };
        let a: Vec<&str> = chunks.iter().map(|h| h.chunk_id.as_str()).collect();
        let b: Vec<&str> = cards.iter().map(|h| h.chunk_id.as_str()).collect();
        let contexts: Vec<ContextItem> = rrf_fuse(&[&a, &b], self.agent.retrieval.rrf_k0)
            .into_iter()
            .take(self.agent.retrieval.context_size)
            .filter_map(|(id, score)| {
                let (chunk, source) = match self.corpus.store.chunk(&id) {
                    Some(c) => (c, ContextSource::Dense),
                    None => (self.corpus.cards.chunk(&id)?, ContextSource::Card),
                };
                Some(ContextItem { id, text: chunk.text.clone(), source, score: Some(score) })
            })
            .collect();
        trace.contexts = contexts.clone();
        let answer = match generate(question, &contexts, self.generator.as_ref(), &mut trace.calls) {
            Ok(a) => a,
            Err(e) => return Err(fail(trace, e)),
        };
        trace.answer = Some(answer.clone());
        let out = BaselineAnswer { trace_id: trace.trace_id.clone(), question: question.to_string(), contexts, answer };
        Ok((out, trace))
    }
}
