//! Synthetic benchmark generation, RAGAS-style metrics and the bootstrap
//! margin of error.

mod bench;
mod bootstrap;
mod judge;
mod metrics;
mod report;

use thiserror::Error;

pub use bench::{
    gen_kg_questions, gen_vs_questions, ground_truth_for, read_benchmark, write_benchmark, BenchmarkItem,
    ItemProvenance, QType,
};
pub use bootstrap::{bootstrap, student_t_quantile, BootstrapConfig, BootstrapReport, MetricSummary, Scope};
pub use judge::{FallbackJudge, Judge, LlmJudge};
pub use metrics::{
    answer_relevance, context_precision, context_precision_from_relevance, context_recall, faithfulness,
    mean_clamped_cosine, DEFAULT_N_AUX,
};
pub use report::{score_item, ItemResult, Metric, MetricScores, RunReport, ScoringDeps};

use crate::llm::LlmError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("text yields no statements")]
    NoStatements,
    #[error("llm call failed: {0}")]
    Llm(LlmError),
    #[error("judge reply unusable: {0}")]
    JudgeFailed(String),
    #[error("generation failed: {0}")]
    GenerationFailed(String),
    #[error("need {needed} chunks, only {available} available")]
    InsufficientChunks { needed: usize, available: usize },
    #[error("need {needed} {qtype} candidates, only {available} available")]
    InsufficientGraph { qtype: QType, needed: usize, available: usize },
    #[error("need {needed} scored items per tool, {tool} has {available}")]
    InsufficientResults { tool: String, needed: usize, available: usize },
    #[error("invalid benchmark item: {0}")]
    InvalidItem(String),
    #[error("invalid bootstrap config: {0}")]
    InvalidConfig(String),
    #[error("io: {0}")]
    Io(String),
}
