use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::agent::AgentConfig;
use crate::eval::BootstrapConfig;
use crate::ingest::{SearchRequest, SourceDb, SourceEndpoints};
use crate::llm::{HttpChatClient, LlmClient};
use crate::offline::OfflineLlm;
use crate::retrieval::{HttpReranker, Reranker};
use crate::vector::{Bm25Params, ChunkingConfig, EmbeddingProvider, HashingEmbedder, HttpEmbeddingProvider};

/// Where HTTP responses come from during ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransportConfig {
    Live {
        timeout_secs: u64,
    },
    /// A directory with `manifest.json` mapping URLs to files.
    Fixture {
        dir: PathBuf,
    },
    /// The built-in demo corpus.
    Demo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "provider", rename_all = "snake_case")]
pub enum LlmConfig {
    Offline,
    Http {
        endpoint: String,
        model: String,
        /// Environment variable holding the API key.
        #[serde(default)]
        api_key_env: Option<String>,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
    },
}

fn default_timeout() -> u64 {
    60
}

fn api_key(env: &Option<String>) -> Option<String> {
    env.as_deref().and_then(|v| std::env::var(v).ok())
}

impl LlmConfig {
    pub fn build(&self) -> Box<dyn LlmClient> {
        match self {
            LlmConfig::Offline => Box::new(OfflineLlm::new()),
            LlmConfig::Http { endpoint, model, api_key_env, timeout_secs } => Box::new(HttpChatClient {
                endpoint: endpoint.clone(),
                model: model.clone(),
                api_key: api_key(api_key_env),
                timeout: Duration::from_secs(*timeout_secs),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "provider", rename_all = "snake_case")]
pub enum EmbeddingConfig {
    Hashing {
        dim: usize,
    },
    Http {
        endpoint: String,
        model: String,
        dim: usize,
        #[serde(default)]
        api_key_env: Option<String>,
    },
}

impl EmbeddingConfig {
    pub fn build(&self) -> Box<dyn EmbeddingProvider> {
        match self {
            EmbeddingConfig::Hashing { dim } => Box::new(HashingEmbedder::new(*dim)),
            EmbeddingConfig::Http { endpoint, model, dim, api_key_env } => Box::new(HttpEmbeddingProvider {
                endpoint: endpoint.clone(),
                model: model.clone(),
                dim: *dim,
                api_key: api_key(api_key_env),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RerankerConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
}

impl RerankerConfig {
    pub fn build(&self) -> Box<dyn Reranker> {
        Box::new(HttpReranker {
            endpoint: self.endpoint.clone(),
            model: self.model.clone(),
            api_key: api_key(&self.api_key_env),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub kg_per_type: usize,
    pub vs_questions: usize,
    pub n_aux: usize,
    pub bootstrap: BootstrapConfig,
    /// Judge model; the fallback overlap judge when absent.
    pub judge: Option<LlmConfig>,
    /// Model for benchmark question generation and auxiliary questions.
    pub question_llm: LlmConfig,
    /// Optional preference-tuned generator evaluated as a third system.
    pub tuned_generator: Option<LlmConfig>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            kg_per_type: 4,
            vs_questions: 20,
            n_aux: crate::eval::DEFAULT_N_AUX,
            bootstrap: BootstrapConfig::default(),
            judge: None,
            question_llm: LlmConfig::Offline,
            tuned_generator: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub seed: u64,
    pub search: SearchRequest,
    pub endpoints: SourceEndpoints,
    pub transport: TransportConfig,
    pub chunking: ChunkingConfig,
    pub bm25: Bm25Params,
    pub embedding: EmbeddingConfig,
    pub llm: LlmConfig,
    /// Router model; the cue-word router when absent.
    pub router: Option<LlmConfig>,
    pub reranker: Option<RerankerConfig>,
    pub agent: AgentConfig,
    pub eval: EvalConfig,
    pub routing_examples: Option<PathBuf>,
    pub cypher_examples: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 42,
            search: SearchRequest {
                query: "language model agents AND healthcare".into(),
                date_from: None,
                date_to: None,
                sources: SourceDb::ALL.to_vec(),
            },
            endpoints: SourceEndpoints::default(),
            transport: TransportConfig::Demo,
            chunking: ChunkingConfig::default(),
            bm25: Bm25Params::default(),
            embedding: EmbeddingConfig::Hashing { dim: 384 },
            llm: LlmConfig::Offline,
            router: Some(LlmConfig::Offline),
            reranker: None,
            agent: AgentConfig::default(),
            eval: EvalConfig::default(),
            routing_examples: None,
            cypher_examples: None,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: Config = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.search.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.chunking.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.agent.retrieval.k_each == 0 || self.agent.retrieval.context_size == 0 {
            return Err(PipelineError::Config("k_each and context_size must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 over the JSON form; recorded in snapshots and reports.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
