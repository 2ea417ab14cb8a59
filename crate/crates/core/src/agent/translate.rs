use std::sync::OnceLock;

use regex::{Captures, Regex};

use super::fewshot::CypherBundle;
use super::{AgentError, LlmCall};
use crate::graph::cypher::quote;
use crate::graph::{parse_cypher, Query};
use crate::llm::LlmClient;
use crate::prompts;

const CYPHER_INSTRUCTION: &str = "Translate the question into one Cypher query over the graph schema below. \
Use only MATCH, WHERE, RETURN and LIMIT; at most two relationships per path; property comparisons joined by AND. \
Reply with the query only.";

pub fn cypher_prompt(question: &str, schema: &str, bundle: &CypherBundle) -> String {
    let examples = bundle
        .examples
        .iter()
        .map(|e| format!("Question: {}\nCypher: {}", e.question, e.cypher))
        .collect::<Vec<_>>()
        .join("\n\n");
    prompts::build(
        prompts::TASK_CYPHER,
        CYPHER_INSTRUCTION,
        &[("Schema", schema), ("Examples", &examples), ("Question", question)],
    )
}

fn repair_prompt(first_prompt: &str, raw: &str, error: &str) -> String {
    format!(
        "{first_prompt}\nYour previous query was rejected.\nQuery: {}\nError: {error}\nReply with a corrected query only.\n",
        raw.trim()
    )
}

/// Query text from a reply: code fences and a leading `Cypher:` label are
/// dropped and the text starts at the first MATCH.
pub fn extract_cypher(reply: &str) -> String {
    let mut text = reply.trim();
    if let Some(start) = text.find("```") {
        let after = &text[start + 3..];
        let after = after.strip_prefix("cypher").unwrap_or(after);
        text = after.split("```").next().unwrap_or(after);
    }
    let upper = text.to_ascii_uppercase();
    let from = upper.find("MATCH").unwrap_or(0);
    let text = &text[from..];
    text.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub query: Query,
    pub cypher: String,
    pub raw_outputs: Vec<String>,
}

/// Few-shot translation with one repair round; the returned AST always
/// passed `parse_cypher`.
pub fn translate_to_cypher(
    question: &str,
    schema: &str,
    llm: &dyn LlmClient,
    bundle: &CypherBundle,
    calls: &mut Vec<LlmCall>,
) -> Result<Translation, AgentError> {
    let first = cypher_prompt(question, schema, bundle);
    let mut prompt = first.clone();
    let mut raw_outputs = Vec::new();
    let mut errors = Vec::new();
    for _ in 0..2 {
        let reply = LlmCall::run(calls, "cypher", llm, &prompt)?;
        raw_outputs.push(reply.clone());
        let cypher = extract_cypher(&reply);
        match parse_cypher(&cypher) {
            Ok(query) => return Ok(Translation { query, cypher, raw_outputs }),
            Err(e) => {
                errors.push(e.to_string());
                prompt = repair_prompt(&first, &reply, &e.to_string());
            }
        }
    }
    Err(AgentError::TranslationFailed { raw_outputs, errors })
}

struct Rule {
    re: Regex,
    build: fn(&Captures<'_>) -> String,
}

fn rules() -> &'static [Rule] {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    RULES.get_or_init(|| {
        let r = |pattern: &str, build: fn(&Captures<'_>) -> String| Rule {
            re: Regex::new(&format!("(?i)^{pattern}$")).expect("valid rule regex"),
            build,
        };
        vec![
            r(r"what is the paper '(.+)' about\??", |c| {
                format!("MATCH {} RETURN p.abstract", paper_pat(&c[1]))
            }),
            r(r"in which year was the paper '(.+)' published\??", |c| {
                format!("MATCH {}-[:PUBLISHED_IN]->(y:Year) RETURN y.value", paper_pat(&c[1]))
            }),
            r(r"who (?:are the authors of|wrote) the paper '(.+)'\??", |c| {
                format!("MATCH {}-[:HAS_AUTHOR]->(a:Author) RETURN a.name", paper_pat(&c[1]))
            }),
            r(r"which databases? index(?:es)? the paper '(.+)'\??", |c| {
                format!("MATCH {}-[:INDEXED_IN]->(d:Database) RETURN d.name", paper_pat(&c[1]))
            }),
            r(r"which keywords represent the paper '(.+)'\??", |c| {
                format!("MATCH {}-[:HAS_KEYWORD]->(k:Keyword) RETURN k.term", paper_pat(&c[1]))
            }),
            r(r"which dois does the paper '(.+)' cite\??", |c| {
                format!("MATCH {}-[:CITES]->(c:Citation) RETURN c.doi", paper_pat(&c[1]))
            }),
            r(r"how is the (database|author|keyword) '(.+)' related to the paper '(.+)'\??", |c| {
                let (label, key) = match c[1].to_ascii_lowercase().as_str() {
                    "database" => ("Database", "name"),
                    "author" => ("Author", "name"),
                    _ => ("Keyword", "term"),
                };
                format!(
                    "MATCH {}-[r]->(n:{label} {{{key}: {}}}) RETURN type(r)",
                    paper_pat(&c[3]),
                    quote(&c[2])
                )
            }),
            r(r"how is the year (\d{1,4}) related to the paper '(.+)'\??", |c| {
                format!("MATCH {}-[r]->(n:Year {{value: {}}}) RETURN type(r)", paper_pat(&c[2]), &c[1])
            }),
            r(r"is the paper '(.+)' represented by the keyword '(.+)'\??", |c| {
                format!(
                    "MATCH {}-[:HAS_KEYWORD]->(k:Keyword {{term: {}}}) RETURN exists(*)",
                    paper_pat(&c[1]),
                    quote(&c[2])
                )
            }),
            r(r"is the keyword '(.+)' associated with any paper published in (\d{1,4})\??", |c| {
                format!(
                    "MATCH (k:Keyword {{term: {}}})<-[:HAS_KEYWORD]-(p:Paper)-[:PUBLISHED_IN]->(y:Year {{value: {}}}) RETURN exists(*)",
                    quote(&c[1]),
                    &c[2]
                )
            }),
            r(r"which papers were published in (\d{1,4})\??", |c| {
                format!("MATCH (p:Paper)-[:PUBLISHED_IN]->(y:Year {{value: {}}}) RETURN p.title", &c[1])
            }),
            r(r"how many papers were published in (\d{1,4})\??", |c| {
                format!("MATCH (p:Paper)-[:PUBLISHED_IN]->(y:Year {{value: {}}}) RETURN count(*) AS papers", &c[1])
            }),
            r(r"which papers were written by '(.+)'\??", |c| {
                format!("MATCH (p:Paper)-[:HAS_AUTHOR]->(a:Author {{name: {}}}) RETURN p.title", quote(&c[1]))
            }),
        ]
    })
}

fn paper_pat(title: &str) -> String {
    format!("(p:Paper {{title: {}}})", quote(title))
}

/// Pattern-based translation of the templated question forms. Used by the
/// offline model; `None` when no rule matches.
pub fn rule_translate(question: &str) -> Option<String> {
    let q = question.trim();
    rules().iter().find_map(|rule| rule.re.captures(q).map(|c| (rule.build)(&c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::FewShotBundles;
    use crate::graph::schema_text;
    use crate::graph::PropertyGraph;
    use crate::llm::ScriptedLlm;

    #[test]
    fn extracts_from_fenced_reply() {
        let reply = "Here you go:\n```cypher\nMATCH (p:Paper)\nRETURN p.title\n```";
        assert_eq!(extract_cypher(reply), "MATCH (p:Paper) RETURN p.title");
        assert_eq!(extract_cypher("Cypher: MATCH (n) RETURN n"), "MATCH (n) RETURN n");
    }

    #[test]
    fn repair_round_used() {
        let b = FewShotBundles::builtin();
        let llm = ScriptedLlm::sequence(["MATCH (p:Paper RETURN p", "MATCH (p:Paper) RETURN p.title"]);
        let mut calls = Vec::new();
        let t = translate_to_cypher("q", &schema_text(&PropertyGraph::new()), &llm, &b.cypher, &mut calls).unwrap();
        assert_eq!(t.cypher, "MATCH (p:Paper) RETURN p.title");
        assert_eq!(t.raw_outputs.len(), 2);
        assert!(calls[1].prompt.contains("Error: "));
    }

    #[test]
    fn malformed_twice_fails_with_both_outputs() {
        let b = FewShotBundles::builtin();
        let llm = ScriptedLlm::sequence(["nonsense", "MATCH (p) DELETE p"]);
        let err = translate_to_cypher("q", "schema", &llm, &b.cypher, &mut Vec::new()).unwrap_err();
        match err {
            AgentError::TranslationFailed { raw_outputs, errors } => {
                assert_eq!(raw_outputs, ["nonsense", "MATCH (p) DELETE p"]);
                assert_eq!(errors.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn prompt_carries_schema_and_thirty_pairs() {
        let b = FewShotBundles::builtin();
        let p = cypher_prompt("q?", "SCHEMA", &b.cypher);
        assert_eq!(p.matches("\nCypher: ").count(), 30);
        assert_eq!(prompts::section(&p, "Schema"), Some("SCHEMA"));
    }

    #[test]
    fn rules_cover_templates_and_parse() {
        for q in [
            "What is the paper 'A B' about?",
            "In which year was the paper 'A' published?",
            "Who are the authors of the paper 'A'?",
            "Which database indexes the paper 'A'?",
            "Which keywords represent the paper 'A'?",
            "How is the database 'ArXiv' related to the paper 'A'?",
            "How is the year 2021 related to the paper 'A'?",
            "Is the paper 'Children's care' represented by the keyword 'icu'?",
            "Is the keyword 'agent' associated with any paper published in 2025?",
            "How many papers were published in 2020?",
        ] {
            let c = rule_translate(q).unwrap_or_else(|| panic!("no rule for {q}"));
            parse_cypher(&c).unwrap_or_else(|e| panic!("{c}: {e}"));
        }
        assert!(rule_translate("Why does dense retrieval miss rare names?").is_none());
    }

    #[test]
    fn bundle_examples_match_rules_where_templated() {
        let b = FewShotBundles::builtin();
        for e in &b.cypher.examples {
            if let Some(c) = rule_translate(&e.question) {
                assert_eq!(parse_cypher(&c).unwrap(), parse_cypher(&e.cypher).unwrap(), "{}", e.question);
            }
        }
    }
}
