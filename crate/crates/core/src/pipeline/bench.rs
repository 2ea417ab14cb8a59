use std::path::Path;

use super::{Config, Engine, LlmConfig, PipelineError};
use crate::agent::{Trace, ABSTENTION};
use crate::eval::{
    bootstrap, gen_kg_questions, gen_vs_questions, score_item, write_benchmark, BenchmarkItem, FallbackJudge,
    ItemResult, Judge, LlmJudge, RunReport, ScoringDeps,
};
use crate::llm::LlmClient;

/// Reports for every evaluated system plus their traces.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRun {
    pub items: Vec<BenchmarkItem>,
    pub reports: Vec<RunReport>,
    pub traces: Vec<(String, Trace)>,
}

/// Graph items from the templates followed by chunk-derived items.
pub fn build_benchmark(engine: &Engine, cfg: &Config) -> Result<Vec<BenchmarkItem>, PipelineError> {
    let mut items = gen_kg_questions(&engine.corpus.graph, cfg.eval.kg_per_type, cfg.seed)?;
    let question_llm = cfg.eval.question_llm.build();
    items.extend(gen_vs_questions(
        engine.corpus.store.chunks(),
        cfg.eval.vs_questions,
        question_llm.as_ref(),
        cfg.seed.wrapping_add(1),
    )?);
    Ok(items)
}

enum System<'a> {
    Baseline,
    Agentic(Option<&'a dyn LlmClient>),
}

fn write(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
}

/// Answers and scores every item with the baseline, the agentic pipeline
/// and, when configured, the agentic pipeline with a tuned generator.
/// Agent failures are scored as abstentions and the error kept on the item.
pub fn run_benchmark(
    engine: &Engine,
    cfg: &Config,
    items: &[BenchmarkItem],
    out_dir: Option<&Path>,
) -> Result<BenchmarkRun, PipelineError> {
    let judge_llm = cfg.eval.judge.as_ref().map(LlmConfig::build);
    let fallback = FallbackJudge::default();
    let llm_judge = judge_llm.as_deref().map(|llm| LlmJudge { llm });
    let judge: &dyn Judge = match &llm_judge {
        Some(j) => j,
        None => &fallback,
    };
    let question_llm = cfg.eval.question_llm.build();
    let deps = ScoringDeps {
        judge,
        question_llm: question_llm.as_ref(),
        embedder: engine.embedder.as_ref(),
        n_aux: cfg.eval.n_aux,
    };
    let tuned = cfg.eval.tuned_generator.as_ref().map(LlmConfig::build);

    let mut systems: Vec<(&str, System<'_>, String)> = vec![
        ("baseline", System::Baseline, engine.generator.id()),
        ("agentic", System::Agentic(None), engine.generator.id()),
    ];
    if let Some(t) = &tuned {
        systems.push(("agentic_tuned", System::Agentic(Some(t.as_ref())), t.id()));
    }

    let mut reports = Vec::new();
    let mut traces = Vec::new();
    for (mode, system, generator_id) in systems {
        let mut results: Vec<ItemResult> = Vec::with_capacity(items.len());
        for item in items {
            let (answer, contexts, chosen, trace, error) = match &system {
                System::Baseline => match engine.baseline(&item.question) {
                    Ok((a, t)) => (a.answer, a.contexts, None, t, None),
                    Err(f) => (ABSTENTION.to_string(), vec![], None, f.trace, Some(f.error.to_string())),
                },
                System::Agentic(generator) => match engine.answer_with(&item.question, None, *generator) {
                    Ok(o) => (o.answer.answer, o.answer.contexts, Some(o.answer.choice.tool), o.trace, None),
                    Err(f) => {
                        let chosen = f.trace.choice.as_ref().map(|c| c.tool);
                        (ABSTENTION.to_string(), vec![], chosen, f.trace, Some(f.error.to_string()))
                    }
                },
            };
            let texts: Vec<String> = contexts.into_iter().map(|c| c.text).collect();
            let mut r = score_item(item, &answer, &texts, chosen, &deps);
            if let Some(e) = error {
                r.errors.insert("answer".into(), e);
            }
            results.push(r);
            traces.push((mode.to_string(), trace));
        }
        let routing_accuracy = matches!(system, System::Agentic(_)).then(|| {
            results.iter().filter(|r| r.chosen_tool == Some(r.target_tool)).count() as f64 / results.len().max(1) as f64
        });
        let mut bcfg = cfg.eval.bootstrap;
        bcfg.seed = cfg.seed;
        let (boot, boot_err) = match bootstrap(&results, &bcfg) {
            Ok(b) => (Some(b), None),
            Err(e) => (None, Some(e.to_string())),
        };
        reports.push(RunReport {
            mode: mode.to_string(),
            generator_id,
            judge_id: judge.id(),
            seed: cfg.seed,
            items: results,
            routing_accuracy,
            bootstrap: boot,
            bootstrap_error: boot_err,
        });
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::Io(format!("{}: {e}", dir.display())))?;
        let mut jsonl = Vec::new();
        write_benchmark(&mut jsonl, items)?;
        write(&dir.join("benchmark.jsonl"), &String::from_utf8_lossy(&jsonl))?;
        let mut summary = String::new();
        let mut boot = String::new();
        for (i, r) in reports.iter().enumerate() {
            let json = serde_json::to_string_pretty(r).map_err(|e| PipelineError::Io(e.to_string()))?;
            write(&dir.join(format!("report_{}.json", r.mode)), &json)?;
            let skip = usize::from(i > 0);
            summary.extend(r.summary_tsv().lines().skip(skip).map(|l| format!("{l}\n")));
            boot.extend(r.bootstrap_tsv().lines().skip(skip).map(|l| format!("{l}\n")));
        }
        write(&dir.join("summary.tsv"), &summary)?;
        write(&dir.join("bootstrap.tsv"), &boot)?;
        let mut lines = String::new();
        for (mode, t) in &traces {
            let mut v = serde_json::to_value(t).map_err(|e| PipelineError::Io(e.to_string()))?;
            v["mode"] = serde_json::Value::String(mode.clone());
            lines.push_str(&v.to_string());
            lines.push('\n');
        }
        write(&dir.join("traces.jsonl"), &lines)?;
    }
    Ok(BenchmarkRun { items: items.to_vec(), reports, traces })
}
