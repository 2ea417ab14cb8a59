use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    answer_relevance, context_precision, context_recall, faithfulness, BenchmarkItem, BootstrapReport, Judge,
    MetricSummary, QType, Scope,
};
use crate::agent::Tool;
use crate::llm::LlmClient;
use crate::vector::EmbeddingProvider;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Faithfulness,
    AnswerRelevance,
    ContextPrecision,
    ContextRecall,
}

impl Metric {
    pub const ALL: [Metric; 4] =
        [Metric::Faithfulness, Metric::AnswerRelevance, Metric::ContextPrecision, Metric::ContextRecall];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Faithfulness => "faithfulness",
            Metric::AnswerRelevance => "answer_relevance",
            Metric::ContextPrecision => "context_precision",
            Metric::ContextRecall => "context_recall",
        }
    }
}

/// Per-item scores; `None` when the metric could not be computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub faithfulness: Option<f64>,
    pub answer_relevance: Option<f64>,
    pub context_precision: Option<f64>,
    pub context_recall: Option<f64>,
}

impl MetricScores {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Faithfulness => self.faithfulness,
            Metric::AnswerRelevance => self.answer_relevance,
            Metric::ContextPrecision => self.context_precision,
            Metric::ContextRecall => self.context_recall,
        }
    }

    fn slot(&mut self, m: Metric) -> &mut Option<f64> {
        match m {
            Metric::Faithfulness => &mut self.faithfulness,
            Metric::AnswerRelevance => &mut self.answer_relevance,
            Metric::ContextPrecision => &mut self.context_precision,
            Metric::ContextRecall => &mut self.context_recall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub item_id: String,
    pub qtype: QType,
    pub target_tool: Tool,
    pub chosen_tool: Option<Tool>,
    pub question: String,
    pub ground_truth: String,
    pub answer: String,
    pub contexts: Vec<String>,
    pub scores: MetricScores,
    /// Metric name or `answer` to the failure message.
    pub errors: BTreeMap<String, String>,
}

pub struct ScoringDeps<'a> {
    pub judge: &'a dyn Judge,
    pub question_llm: &'a dyn LlmClient,
    pub embedder: &'a dyn EmbeddingProvider,
    pub n_aux: usize,
}

/// Scores one answered item. Metric failures are recorded on the result
/// rather than aborting the run.
pub fn score_item(
    item: &BenchmarkItem,
    answer: &str,
    contexts: &[String],
    chosen_tool: Option<Tool>,
    deps: &ScoringDeps<'_>,
) -> ItemResult {
    let ctx: Vec<&str> = contexts.iter().map(String::as_str).collect();
    let mut scores = MetricScores::default();
    let mut errors = BTreeMap::new();
    for m in Metric::ALL {
        let r = match m {
            Metric::Faithfulness => faithfulness(answer, &ctx, deps.judge),
            Metric::AnswerRelevance => {
                answer_relevance(&item.question, answer, deps.question_llm, deps.embedder, deps.n_aux)
            }
            Metric::ContextPrecision => context_precision(&ctx, &item.ground_truth, deps.judge),
            Metric::ContextRecall => context_recall(&ctx, &item.ground_truth, deps.judge),
        };
        match r {
            Ok(v) => *scores.slot(m) = Some(v),
            Err(e) => {
                errors.insert(m.as_str().to_string(), e.to_string());
            }
        }
    }
    ItemResult {
        item_id: item.id.clone(),
        qtype: item.qtype,
        target_tool: item.target_tool,
        chosen_tool,
        question: item.question.clone(),
        ground_truth: item.ground_truth.clone(),
        answer: answer.to_string(),
        contexts: contexts.to_vec(),
        scores,
        errors,
    }
}

/// One benchmark run of a single system configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: String,
    pub generator_id: String,
    pub judge_id: String,
    pub seed: u64,
    pub items: Vec<ItemResult>,
    pub routing_accuracy: Option<f64>,
    pub bootstrap: Option<BootstrapReport>,
    pub bootstrap_error: Option<String>,
}

impl RunReport {
    /// Plain per-metric means over all items with a score.
    pub fn item_means(&self) -> BTreeMap<Metric, f64> {
        let mut out = BTreeMap::new();
        for m in Metric::ALL {
            let v: Vec<f64> = self.items.iter().filter_map(|r| r.scores.get(m)).collect();
            if !v.is_empty() {
                out.insert(m, v.iter().sum::<f64>() / v.len() as f64);
            }
        }
        out
    }

    /// Bootstrap summaries in scope, metric order.
    pub fn summaries(&self) -> Vec<(Scope, Metric, &MetricSummary)> {
        let Some(b) = &self.bootstrap else { return Vec::new() };
        b.scopes.iter().flat_map(|(scope, ms)| ms.iter().map(move |(m, s)| (*scope, *m, s))).collect()
    }

    /// `mode scope metric mean std df t me` rows from the bootstrap.
    pub fn summary_tsv(&self) -> String {
        let mut out = String::from("mode\tscope\tmetric\tmean\tstd\tdf\tt_critical\tmargin_of_error\n");
        for (scope, m, s) in self.summaries() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{:.6}\t{:.6}",
                self.mode,
                scope.as_str(),
                m.as_str(),
                s.mean,
                s.std,
                s.df,
                s.t_critical,
                s.margin_of_error
            );
        }
        out
    }

    /// Every resample mean, one row each.
    pub fn bootstrap_tsv(&self) -> String {
        let mut out = String::from("mode\tscope\tmetric\tresample\tmean\n");
        for (scope, m, s) in self.summaries() {
            for (i, v) in s.resample_means.iter().enumerate() {
                let _ = writeln!(out, "{}\t{}\t{}\t{i}\t{v:.6}", self.mode, scope.as_str(), m.as_str());
            }
        }
        out
    }
}
