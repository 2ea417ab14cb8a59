//! Prompt layouts. Every prompt opens with a `Task: <name>` line followed by
//! an instruction and `### <Section>` blocks, so replies can be audited and
//! the offline model can dispatch on the task.

pub const TASK_ROUTE: &str = "route";
pub const TASK_CYPHER: &str = "cypher";
pub const TASK_ANSWER: &str = "answer";
pub const TASK_QUESTION: &str = "question";
pub const TASK_AUX_QUESTIONS: &str = "aux_questions";
pub const TASK_STATEMENTS: &str = "statements";
pub const TASK_SUPPORT: &str = "support";
pub const TASK_RELEVANCE: &str = "relevance";

pub fn task_of(prompt: &str) -> Option<&str> {
    prompt.lines().next()?.strip_prefix("Task: ").map(str::trim)
}

/// Body of the last `### {name}` block, trimmed.
pub fn section<'a>(prompt: &'a str, name: &str) -> Option<&'a str> {
    let header = format!("### {name}\n");
    let start = prompt.rfind(&header)? + header.len();
    let rest = &prompt[start..];
    let end = rest.find("\n### ").unwrap_or(rest.len());
    Some(rest[..end].trim())
}

fn push_section(out: &mut String, name: &str, body: &str) {
    out.push_str("\n\n### ");
    out.push_str(name);
    out.push('\n');
    out.push_str(body.trim_end());
}

pub fn build(task: &str, instruction: &str, sections: &[(&str, &str)]) -> String {
    let mut out = format!("Task: {task}\n{instruction}");
    for (name, body) in sections {
        push_section(&mut out, name, body);
    }
    out.push('\n');
    out
}

/// Numbered context list: `[1] ...` blocks separated by blank lines.
pub fn numbered(contexts: &[&str]) -> String {
    contexts.iter().enumerate().map(|(i, c)| format!("[{}] {}", i + 1, c.trim())).collect::<Vec<_>>().join("\n\n")
}

/// Inverse of [`numbered`].
pub fn split_numbered(body: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for line in body.lines() {
        let trimmed = line.trim_start();
        let marker = trimmed
            .strip_prefix('[')
            .and_then(|r| r.split_once("] "))
            .filter(|(n, _)| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()));
        match marker {
            Some((_, text)) => out.push(text.to_string()),
            None => {
                if let Some(last) = out.last_mut() {
                    last.push('\n');
                    last.push_str(line);
                }
            }
        }
    }
    out.into_iter().map(|s| s.trim().to_string()).collect()
}

pub const ANSWER_INSTRUCTION: &str = "Answer the question using only the numbered context below. \
If the context does not contain the answer, say that it is not in the retrieved context. \
Be concise and do not add facts that are not in the context.";

pub fn answer_prompt(question: &str, contexts: &[&str]) -> String {
    build(TASK_ANSWER, ANSWER_INSTRUCTION, &[("Context", &numbered(contexts)), ("Question", question)])
}

pub const QUESTION_INSTRUCTION: &str = "Generate a question that can only be answered from the given context. \
Don't create generic questions. Don't mention specific figures, tables, sections or even the actual document provided. \
Focus only on its content and its main ideas.";

/// Output examples shown with the question-generation instruction.
pub const QUESTION_EXAMPLES: [(&str, &str); 3] = [
    (
        "Patients flagged by the model received antibiotics a median of 2.1 hours earlier than under the existing screening protocol, with no increase in false alarms.",
        "How much earlier did flagged patients receive antibiotics compared with the existing screening protocol?",
    ),
    (
        "Dense retrieval alone missed rare chemical names, while the lexical retriever recovered them; combining both raised recall on entity-heavy queries.",
        "Why did combining lexical and dense retrieval improve recall on entity-heavy queries?",
    ),
    (
        "The annotators disagreed most often on statements that paraphrased numerical results, which lowered agreement to a kappa of 0.61.",
        "Which kind of statements caused the most disagreement between annotators?",
    ),
];

pub fn question_prompt(chunk_text: &str) -> String {
    let examples =
        QUESTION_EXAMPLES.iter().map(|(c, q)| format!("Context: {c}\nQuestion: {q}")).collect::<Vec<_>>().join("\n\n");
    build(TASK_QUESTION, QUESTION_INSTRUCTION, &[("Examples", &examples), ("Context", chunk_text)])
}

pub fn aux_questions_prompt(answer: &str, n: usize) -> String {
    let instruction = format!(
        "Write {n} different questions that the answer below responds to. \
One question per line, no numbering."
    );
    build(TASK_AUX_QUESTIONS, &instruction, &[("Answer", answer)])
}

pub fn statements_prompt(text: &str) -> String {
    build(TASK_STATEMENTS, "Break the text into short standalone factual statements, one per line.", &[("Text", text)])
}

pub fn support_prompt(statement: &str, contexts: &[&str]) -> String {
    build(
        TASK_SUPPORT,
        "Can the statement be inferred from the context? Reply with yes or no.",
        &[("Context", &numbered(contexts)), ("Statement", statement)],
    )
}

pub fn relevance_prompt(context: &str, ground_truth: &str) -> String {
    build(
        TASK_RELEVANCE,
        "Is the context useful for arriving at the reference answer? Reply with yes or no.",
        &[("Reference answer", ground_truth), ("Context", context)],
    )
}

/// Reads a yes/no verdict from the first word of a reply.
pub fn parse_verdict(reply: &str) -> Option<bool> {
    let word: String = reply.trim().chars().take_while(|c| c.is_alphabetic()).collect::<String>().to_lowercase();
    match word.as_str() {
        "yes" | "true" => Some(true),
        "no" | "false" => Some(false),
        _ => None,
    }
}

/// Reply lines with list markers and numbering removed.
pub fn reply_lines(reply: &str) -> Vec<String> {
    reply
        .lines()
        .map(|l| {
            l.trim()
                .trim_start_matches(|c: char| c.is_ascii_digit() || matches!(c, '.' | ')' | '-' | '*'))
                .trim()
                .to_string()
        })
        .filter(|l| !l.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_roundtrip() {
        let p = answer_prompt("Who?", &["first\nline two", "second"]);
        assert_eq!(task_of(&p), Some(TASK_ANSWER));
        assert_eq!(section(&p, "Question"), Some("Who?"));
        assert_eq!(split_numbered(section(&p, "Context").unwrap()), ["first\nline two", "second"]);
    }

    #[test]
    fn question_prompt_has_instruction_and_three_examples() {
        let p = question_prompt("chunk");
        assert!(p.contains(QUESTION_INSTRUCTION));
        assert_eq!(p.matches("\nQuestion: ").count(), 3);
        assert_eq!(section(&p, "Context"), Some("chunk"));
    }

    #[test]
    fn verdicts_and_lines() {
        assert_eq!(parse_verdict("Yes."), Some(true));
        assert_eq!(parse_verdict(" no, because"), Some(false));
        assert_eq!(parse_verdict("maybe"), None);
        assert_eq!(reply_lines("1. What?\n\n- Why?\n"), ["What?", "Why?"]);
    }
}
