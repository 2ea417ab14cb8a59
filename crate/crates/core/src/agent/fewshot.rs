use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AgentError, Tool};
use crate::graph::parse_cypher;

pub const ROUTING_EXAMPLES: usize = 10;
pub const CYPHER_EXAMPLES: usize = 30;

const DEFAULT_ROUTING: &str = include_str!("../../data/routing_examples.json");
const DEFAULT_CYPHER: &str = include_str!("../../data/cypher_examples.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub question: String,
    pub tool: Tool,
    pub retrieved_context: String,
    pub final_answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CypherExample {
    pub question: String,
    pub cypher: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingBundle {
    pub examples: Vec<FewShotExample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CypherBundle {
    pub examples: Vec<CypherExample>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotBundles {
    pub routing: RoutingBundle,
    pub cypher: CypherBundle,
}

fn invalid(msg: impl Into<String>) -> AgentError {
    AgentError::InvalidBundle(msg.into())
}

impl RoutingBundle {
    pub fn from_json(text: &str) -> Result<Self, AgentError> {
        let b: Self = serde_json::from_str(text).map_err(|e| invalid(format!("routing bundle: {e}")))?;
        b.validate()?;
        Ok(b)
    }

    /// Exactly ten examples, five per tool, no empty fields.
    pub fn validate(&self) -> Result<(), AgentError> {
        if self.examples.len() != ROUTING_EXAMPLES {
            return Err(invalid(format!(
                "routing bundle has {} examples, expected {ROUTING_EXAMPLES}",
                self.examples.len()
            )));
        }
        let graph = self.examples.iter().filter(|e| e.tool == Tool::Graph).count();
        if graph != ROUTING_EXAMPLES / 2 {
            return Err(invalid(format!("routing bundle has {graph} graph examples, expected 5 per tool")));
        }
        for (i, e) in self.examples.iter().enumerate() {
            if [&e.question, &e.retrieved_context, &e.final_answer].iter().any(|s| s.trim().is_empty()) {
                return Err(invalid(format!("routing example {i} has an empty field")));
            }
        }
        Ok(())
    }
}

impl CypherBundle {
    pub fn from_json(text: &str) -> Result<Self, AgentError> {
        let b: Self = serde_json::from_str(text).map_err(|e| invalid(format!("cypher bundle: {e}")))?;
        b.validate()?;
        Ok(b)
    }

    /// Exactly thirty pairs, every query inside the supported subset.
    pub fn validate(&self) -> Result<(), AgentError> {
        if self.examples.len() != CYPHER_EXAMPLES {
            return Err(invalid(format!(
                "cypher bundle has {} examples, expected {CYPHER_EXAMPLES}",
                self.examples.len()
            )));
        }
        for (i, e) in self.examples.iter().enumerate() {
            if e.question.trim().is_empty() {
                return Err(invalid(format!("cypher example {i} has an empty question")));
            }
            parse_cypher(&e.cypher).map_err(|err| invalid(format!("cypher example {i}: {err}")))?;
        }
        Ok(())
    }
}

impl FewShotBundles {
    /// The bundles shipped in `data/`.
    pub fn builtin() -> Self {
        Self {
            routing: RoutingBundle::from_json(DEFAULT_ROUTING).expect("builtin routing bundle is valid"),
            cypher: CypherBundle::from_json(DEFAULT_CYPHER).expect("builtin cypher bundle is valid"),
        }
    }

    /// Loads operator-supplied bundle files; a missing path uses the builtin.
    pub fn load(routing: Option<&Path>, cypher: Option<&Path>) -> Result<Self, AgentError> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())));
        let builtin = Self::builtin();
        Ok(Self {
            routing: match routing {
                Some(p) => RoutingBundle::from_json(&read(p)?)?,
                None => builtin.routing,
            },
            cypher: match cypher {
                Some(p) => CypherBundle::from_json(&read(p)?)?,
                None => builtin.cypher,
            },
        })
    }
}
