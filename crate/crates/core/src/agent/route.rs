use std::sync::OnceLock;

use regex::Regex;

use super::fewshot::RoutingBundle;
use super::{AgentError, DecidedBy, LlmCall, Tool, ToolChoice};
use crate::llm::LlmClient;
use crate::prompts;

const ROUTE_INSTRUCTION: &str = "You answer questions about a collection of scientific papers with one of two retrieval tools.\n\
- graph: runs a Cypher query over the knowledge graph of paper metadata (title, abstract, DOI, authors, publication year, source database, keywords, cited DOIs).\n\
- vector: searches the full text of the papers with keyword and semantic search.\n\
Pick the tool whose data answers the question. Reply with one line: \"Tool: graph\" or \"Tool: vector\".";

pub fn routing_prompt(question: &str, bundle: &RoutingBundle) -> String {
    let examples = bundle
        .examples
        .iter()
        .map(|e| {
            format!(
                "Question: {}\nTool: {}\nRetrieved context: {}\nAnswer: {}",
                e.question,
                e.tool,
                e.retrieved_context.trim_end().replace('\n', " | "),
                e.final_answer
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n");
    prompts::build(prompts::TASK_ROUTE, ROUTE_INSTRUCTION, &[("Examples", &examples), ("Question", question)])
}

fn retry_prompt(first_prompt: &str, bad_reply: &str) -> String {
    format!(
        "{first_prompt}\nYour previous reply could not be read as a tool choice: {:?}\nReply with exactly \"Tool: graph\" or \"Tool: vector\".\n",
        bad_reply.trim()
    )
}

fn tool_word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(graph|vector)(?:rag)?\b").expect("valid regex"))
}

/// Reads the tool from a reply. A `Tool:` line wins; otherwise the reply
/// must mention exactly one of the two tools.
pub fn parse_tool_reply(reply: &str) -> Option<Tool> {
    let from = |s: &str| -> Option<Tool> {
        let mut found: Option<Tool> = None;
        for cap in tool_word_re().captures_iter(s) {
            let t = if cap[1].eq_ignore_ascii_case("graph") { Tool::Graph } else { Tool::Vector };
            if found.is_some_and(|f| f != t) {
                return None;
            }
            found = Some(t);
        }
        found
    };
    reply
        .lines()
        .find_map(|l| {
            let l = l.trim();
            l.get(..5).filter(|p| p.eq_ignore_ascii_case("tool:")).map(|_| &l[5..])
        })
        .and_then(from)
        .or_else(|| from(reply))
}

/// Metadata cues that send a question to the graph.
const GRAPH_CUES: &[&str] = &[
    "author",
    "authors",
    "wrote",
    "written",
    "co-wrote",
    "year",
    "years",
    "published",
    "publish",
    "publication",
    "cite",
    "cites",
    "cited",
    "citation",
    "citations",
    "keyword",
    "keywords",
    "database",
    "databases",
    "indexed",
    "indexes",
    "pubmed",
    "arxiv",
    "google scholar",
    "doi",
    "dois",
    "how many",
];

fn cue_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let alts: Vec<String> = GRAPH_CUES.iter().map(|c| regex::escape(c)).collect();
        Regex::new(&format!(r"(?i)\b(?:{})\b", alts.join("|"))).expect("valid regex")
    })
}

fn quoted_paper_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)\bpaper\s+['"‘“]"#).expect("valid regex"))
}

/// Rule-based routing: metadata cue words or a quoted paper title mean graph,
/// everything else vector.
pub fn heuristic_route(question: &str) -> ToolChoice {
    if let Some(m) = cue_re().find(question) {
        return ToolChoice {
            tool: Tool::Graph,
            rationale: format!("metadata cue \"{}\"", m.as_str().to_lowercase()),
            decided_by: DecidedBy::HeuristicFallback,
        };
    }
    if quoted_paper_re().is_match(question) {
        return ToolChoice {
            tool: Tool::Graph,
            rationale: "question names a paper by title".into(),
            decided_by: DecidedBy::HeuristicFallback,
        };
    }
    ToolChoice {
        tool: Tool::Vector,
        rationale: "no metadata cue; full-text question".into(),
        decided_by: DecidedBy::HeuristicFallback,
    }
}

/// Routes with the LLM when one is given (one retry on an unreadable reply),
/// falling back to [`heuristic_route`] when allowed.
pub fn route(
    question: &str,
    llm: Option<&dyn LlmClient>,
    bundle: &RoutingBundle,
    fallback_enabled: bool,
    calls: &mut Vec<LlmCall>,
) -> Result<ToolChoice, AgentError> {
    let Some(llm) = llm else {
        if fallback_enabled {
            return Ok(heuristic_route(question));
        }
        return Err(AgentError::RoutingFailed("no router configured and fallback disabled".into()));
    };
    let first = routing_prompt(question, bundle);
    let mut prompt = first.clone();
    let mut replies = Vec::new();
    for attempt in 0..2 {
        let reply = LlmCall::run(calls, "route", llm, &prompt)?;
        if let Some(tool) = parse_tool_reply(&reply) {
            return Ok(ToolChoice { tool, rationale: reply.trim().to_string(), decided_by: DecidedBy::Llm });
        }
        replies.push(reply.clone());
        if attempt == 0 {
            prompt = retry_prompt(&first, &reply);
        }
    }
    if fallback_enabled {
        let mut choice = heuristic_route(question);
        choice.rationale = format!("router replies unreadable; {}", choice.rationale);
        return Ok(choice);
    }
    Err(AgentError::RoutingFailed(format!("unreadable router replies: {replies:?}")))
}
