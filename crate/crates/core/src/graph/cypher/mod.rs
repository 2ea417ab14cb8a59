//! Parser for the Cypher subset the agent emits.
//!
//! Grammar (keywords case-insensitive):
//!
//! ```text
//! query     := MATCH path ("," path)* [WHERE cond (AND cond)*]
//!              RETURN [DISTINCT] item ("," item)* [LIMIT int] [";"]
//! path      := node (rel node){0,2}
//! node      := "(" [var] [":" Label] ["{" key ":" literal ("," key ":" literal)* "}"] ")"
//! rel       := "-[" [var] [":" TYPE] "]->" | "<-[" ... "]-" | "-[" ... "]-"
//! cond      := operand ("=" | "<>" | "<" | "<=" | ">" | ">=" | CONTAINS) operand
//! operand   := var "." key | literal
//! item      := (var "." key | var | type(var) | count(*) | count([DISTINCT] var["." key])
//!              | exists(* | var)) [AS alias]
//! ```
//!
//! Valid Cypher outside this subset (updating clauses, OPTIONAL MATCH, WITH,
//! ORDER BY, variable-length or longer paths, OR/NOT, other functions) is
//! rejected as [`CypherError::UnsupportedFeature`].

mod ast;
mod lexer;
mod parser;

use thiserror::Error;

pub use ast::quote;
pub use ast::{
    CmpOp, Condition, Direction, Expr, Hop, NodePattern, Operand, PathPattern, Query, RelPattern, ReturnItem,
};

pub const MAX_HOPS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CypherError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported feature at offset {offset}: {feature}")]
    UnsupportedFeature { offset: usize, feature: String },
}

impl CypherError {
    pub fn offset(&self) -> usize {
        match self {
            CypherError::Parse { offset, .. } | CypherError::UnsupportedFeature { offset, .. } => *offset,
        }
    }
}

/// Parses a query in the supported subset. Offsets in errors are character
/// offsets into `text`.
pub fn parse_cypher(text: &str) -> Result<Query, CypherError> {
    let tokens = lexer::tokenize(text)?;
    parser::Parser::new(tokens).parse_query()
}
