use std::collections::BTreeSet;

use super::EvalError;
use crate::llm::LlmClient;
use crate::prompts;
use crate::text::{alnum_tokens, content_tokens, split_sentences};

/// Semantic judgments behind the metrics.
pub trait Judge: Send + Sync {
    fn id(&self) -> String;
    /// Decomposes text into standalone statements.
    fn statements(&self, text: &str) -> Result<Vec<String>, EvalError>;
    /// Whether the statement follows from at least one context.
    fn supported(&self, statement: &str, contexts: &[&str]) -> Result<bool, EvalError>;
    /// Whether a retrieved context helps arrive at the ground truth.
    fn relevant(&self, context: &str, ground_truth: &str) -> Result<bool, EvalError>;
}

/// Deterministic judge: statements are sentences; a statement is supported
/// when at least `threshold` of its distinct content tokens occur in one
/// context. A context is relevant when it supports some ground-truth
/// statement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FallbackJudge {
    pub threshold: f64,
}

impl Default for FallbackJudge {
    fn default() -> Self {
        Self { threshold: 0.6 }
    }
}

/// Distinct content tokens; statements made only of stopwords ("No.")
/// keep all their tokens.
fn statement_tokens(s: &str) -> BTreeSet<String> {
    let content: BTreeSet<String> = content_tokens(s).into_iter().collect();
    if content.is_empty() {
        alnum_tokens(s).into_iter().collect()
    } else {
        content
    }
}

impl FallbackJudge {
    pub fn overlap(&self, statement: &str, context: &str) -> f64 {
        let s = statement_tokens(statement);
        if s.is_empty() {
            return 0.0;
        }
        let c: BTreeSet<String> = alnum_tokens(context).into_iter().collect();
        s.iter().filter(|t| c.contains(*t)).count() as f64 / s.len() as f64
    }
}

impl Judge for FallbackJudge {
    fn id(&self) -> String {
        format!("fallback-overlap-{}", self.threshold)
    }

    fn statements(&self, text: &str) -> Result<Vec<String>, EvalError> {
        Ok(split_sentences(text).into_iter().filter(|s| !alnum_tokens(s).is_empty()).collect())
    }

    fn supported(&self, statement: &str, contexts: &[&str]) -> Result<bool, EvalError> {
        Ok(contexts.iter().any(|c| self.overlap(statement, c) >= self.threshold))
    }

    fn relevant(&self, context: &str, ground_truth: &str) -> Result<bool, EvalError> {
        for s in self.statements(ground_truth)? {
            if self.supported(&s, &[context])? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Judge backed by an LLM with yes/no verdict prompts.
pub struct LlmJudge<'a> {
    pub llm: &'a dyn LlmClient,
}

impl LlmJudge<'_> {
    fn ask(&self, prompt: &str) -> Result<String, EvalError> {
        self.llm.complete(prompt).map_err(EvalError::Llm)
    }

    fn verdict(&self, prompt: &str) -> Result<bool, EvalError> {
        let reply = self.ask(prompt)?;
        prompts::parse_verdict(&reply)
            .ok_or_else(|| EvalError::JudgeFailed(format!("unreadable verdict {:?}", reply.trim())))
    }
}

impl Judge for LlmJudge<'_> {
    fn id(&self) -> String {
        format!("llm-{}", self.llm.id())
    }

    fn statements(&self, text: &str) -> Result<Vec<String>, EvalError> {
        Ok(prompts::reply_lines(&self.ask(&prompts::statements_prompt(text))?))
    }

    fn supported(&self, statement: &str, contexts: &[&str]) -> Result<bool, EvalError> {
        if contexts.is_empty() {
            return Ok(false);
        }
        self.verdict(&prompts::support_prompt(statement, contexts))
    }

    fn relevant(&self, context: &str, ground_truth: &str) -> Result<bool, EvalError> {
        self.verdict(&prompts::relevance_prompt(context, ground_truth))
    }
}
