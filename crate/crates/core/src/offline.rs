//! Deterministic stand-in for a hosted LLM. Replies are derived from the
//! prompt alone, so runs without network access are reproducible.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use regex::Regex;

use crate::agent::{heuristic_route, rule_translate};
use crate::eval::{FallbackJudge, Judge};
use crate::llm::{LlmClient, LlmError};
use crate::prompts::{self, section};
use crate::text::{alnum_tokens, content_tokens, split_sentences};

/// Dispatches on the prompt's task line: rule-based routing and Cypher,
/// extractive answers, token-based question generation and overlap verdicts.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineLlm {
    pub judge: FallbackJudge,
}

impl OfflineLlm {
    pub fn new() -> Self {
        Self::default()
    }
}

fn first_line(s: &str) -> &str {
    s.lines().next().unwrap_or("").trim()
}

fn need<'a>(prompt: &'a str, name: &str) -> Result<&'a str, LlmError> {
    section(prompt, name).ok_or_else(|| LlmError::BadResponse(format!("prompt has no {name} section")))
}

/// Tokens that make useful question words: content tokens of 3+ chars that
/// are not bare numbers, ordered by frequency then first occurrence.
fn salient_tokens(text: &str) -> Vec<String> {
    let mut first: Vec<String> = Vec::new();
    let mut freq: HashMap<String, usize> = HashMap::new();
    for t in content_tokens(text) {
        if t.chars().count() < 3 || t.chars().all(|c| c.is_ascii_digit()) {
            continue;
        }
        let n = freq.entry(t.clone()).or_insert(0);
        if *n == 0 {
            first.push(t);
        }
        *n += 1;
    }
    let mut order: Vec<(usize, String)> = first.into_iter().enumerate().collect();
    order.sort_by(|(ia, a), (ib, b)| freq[b].cmp(&freq[a]).then(ia.cmp(ib)));
    order.into_iter().map(|(_, t)| t).collect()
}

fn join_terms(terms: &[String]) -> String {
    match terms {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^[A-Za-z_][\w.]*(\([^)\t]*\))?(\t[A-Za-z_][\w.]*(\([^)\t]*\))?)*$").expect("valid regex")
    })
}

/// Graph results arrive as TSV with a column header line; rendered as
/// `a, b; c, d` like the benchmark ground truths.
fn table_answer(context: &str) -> Option<String> {
    let mut lines = context.lines();
    if !header_re().is_match(lines.next()?.trim()) {
        return None;
    }
    let rows: Vec<String> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split('\t').map(str::trim).collect::<Vec<_>>().join(", "))
        .collect();
    Some(if rows.is_empty() { "none".into() } else { rows.join("; ") })
}

fn extractive_answer(question: &str, contexts: &[String]) -> String {
    if let Some(t) = contexts.iter().find_map(|c| table_answer(c)) {
        return t;
    }
    let q: BTreeSet<String> = content_tokens(question).into_iter().collect();
    let mut best: Option<(usize, &str)> = None;
    let sentences: Vec<String> = contexts.iter().flat_map(|c| split_sentences(c)).collect();
    for s in &sentences {
        let tokens: BTreeSet<String> = content_tokens(s).into_iter().collect();
        let score = tokens.intersection(&q).count();
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, s));
        }
    }
    match best {
        Some((_, s)) => s.replace('\n', " "),
        None => crate::agent::ABSTENTION.to_string(),
    }
}

fn generated_question(chunk: &str) -> String {
    let top: Vec<String> = salient_tokens(chunk).into_iter().take(3).collect();
    if top.is_empty() {
        return "What is described in this passage?".into();
    }
    format!("What does the text report about {}?", join_terms(&top))
}

fn aux_questions(answer: &str, n: usize) -> String {
    let mut tokens = salient_tokens(answer);
    if tokens.is_empty() {
        tokens = alnum_tokens(answer);
    }
    if tokens.is_empty() {
        return (0..n).map(|_| "What is the answer?").collect::<Vec<_>>().join("\n");
    }
    (0..n)
        .map(|k| {
            let window: Vec<String> =
                (0..tokens.len().min(3)).map(|j| tokens[(k + j) % tokens.len()].clone()).collect();
            format!("What is known about {}?", join_terms(&window))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn aux_count(prompt: &str) -> usize {
    prompt
        .lines()
        .nth(1)
        .and_then(|l| l.strip_prefix("Write "))
        .and_then(|l| l.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .unwrap_or(3)
}

fn verdict(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

impl LlmClient for OfflineLlm {
    fn id(&self) -> String {
        "offline-extractive".into()
    }

    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let task = prompts::task_of(prompt).ok_or_else(|| LlmError::BadResponse("prompt has no task line".into()))?;
        match task {
            prompts::TASK_ROUTE => {
                let q = first_line(need(prompt, "Question")?);
                Ok(format!("Tool: {}", heuristic_route(q).tool))
            }
            prompts::TASK_CYPHER => {
                let q = first_line(need(prompt, "Question")?);
                Ok(rule_translate(q).unwrap_or_else(|| "No query pattern matches this question.".into()))
            }
            prompts::TASK_ANSWER => {
                let contexts = prompts::split_numbered(need(prompt, "Context")?);
                Ok(extractive_answer(need(prompt, "Question")?, &contexts))
            }
            prompts::TASK_QUESTION => Ok(format!("Question: {}", generated_question(need(prompt, "Context")?))),
            prompts::TASK_AUX_QUESTIONS => Ok(aux_questions(need(prompt, "Answer")?, aux_count(prompt))),
            prompts::TASK_STATEMENTS => Ok(split_sentences(need(prompt, "Text")?).join("\n")),
            prompts::TASK_SUPPORT => {
                let contexts = prompts::split_numbered(need(prompt, "Context")?);
                let ctx: Vec<&str> = contexts.iter().map(String::as_str).collect();
                let ok = self
                    .judge
                    .supported(need(prompt, "Statement")?, &ctx)
                    .map_err(|e| LlmError::BadResponse(e.to_string()))?;
                Ok(verdict(ok))
            }
            prompts::TASK_RELEVANCE => {
                let ok = self
                    .judge
                    .relevant(need(prompt, "Context")?, need(prompt, "Reference answer")?)
                    .map_err(|e| LlmError::BadResponse(e.to_string()))?;
                Ok(verdict(ok))
            }
            other => Err(LlmError::BadResponse(format!("unknown task {other:?}"))),
        }
    }
}
