use super::{EvalError, Judge};
use crate::llm::LlmClient;
use crate::prompts;
use crate::vector::{embed, EmbeddingProvider, EmbeddingVector};

/// Auxiliary questions generated per answer for answer relevance.
pub const DEFAULT_N_AUX: usize = 3;

/// Share of answer statements supported by the contexts.
pub fn faithfulness(answer: &str, contexts: &[&str], judge: &dyn Judge) -> Result<f64, EvalError> {
    let statements = judge.statements(answer)?;
    if statements.is_empty() {
        return Err(EvalError::NoStatements);
    }
    let mut supported = 0usize;
    for s in &statements {
        if judge.supported(s, contexts)? {
            supported += 1;
        }
    }
    Ok(supported as f64 / statements.len() as f64)
}

/// Share of ground-truth statements supported by the contexts.
pub fn context_recall(contexts: &[&str], ground_truth: &str, judge: &dyn Judge) -> Result<f64, EvalError> {
    let statements = judge.statements(ground_truth)?;
    if statements.is_empty() {
        return Err(EvalError::NoStatements);
    }
    let mut supported = 0usize;
    for s in &statements {
        if judge.supported(s, contexts)? {
            supported += 1;
        }
    }
    Ok(supported as f64 / statements.len() as f64)
}

/// Rank-weighted precision: the mean of Precision@k over the ranks k that
/// hold a relevant context. No relevant context gives 0.
pub fn context_precision_from_relevance(relevant: &[bool]) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &r) in relevant.iter().enumerate() {
        if r {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

pub fn context_precision(contexts: &[&str], ground_truth: &str, judge: &dyn Judge) -> Result<f64, EvalError> {
    let relevance = contexts.iter().map(|c| judge.relevant(c, ground_truth)).collect::<Result<Vec<bool>, _>>()?;
    Ok(context_precision_from_relevance(&relevance))
}

/// Mean cosine between `question` and each generated question, each
/// clamped to [0, 1].
pub fn mean_clamped_cosine(question: &EmbeddingVector, generated: &[EmbeddingVector]) -> f64 {
    if generated.is_empty() {
        return 0.0;
    }
    generated.iter().map(|g| question.cosine(g).clamp(0.0, 1.0)).sum::<f64>() / generated.len() as f64
}

/// Questions are regenerated from the answer alone and compared with the
/// original question in embedding space.
pub fn answer_relevance(
    question: &str,
    answer: &str,
    llm: &dyn LlmClient,
    embedder: &dyn EmbeddingProvider,
    n_aux: usize,
) -> Result<f64, EvalError> {
    let reply = llm.complete(&prompts::aux_questions_prompt(answer, n_aux)).map_err(EvalError::Llm)?;
    let generated: Vec<String> = prompts::reply_lines(&reply).into_iter().take(n_aux).collect();
    if generated.len() < n_aux {
        return Err(EvalError::GenerationFailed(format!(
            "expected {n_aux} auxiliary questions, got {}",
            generated.len()
        )));
    }
    let mut texts: Vec<&str> = vec![question];
    texts.extend(generated.iter().map(String::as_str));
    let vectors = embed(&texts, embedder).map_err(|e| EvalError::GenerationFailed(e.to_string()))?;
    Ok(mean_clamped_cosine(&vectors[0], &vectors[1..]))
}
