use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub patterns: Vec<PathPattern>,
    pub conditions: Vec<Condition>,
    pub distinct: bool,
    pub items: Vec<ReturnItem>,
    pub limit: Option<u64>,
}

/// `(a)-[r]->(b)-[s]->(c)`: a start node and at most two hops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPattern {
    pub start: NodePattern,
    pub hops: Vec<Hop>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hop {
    pub rel: RelPattern,
    pub node: NodePattern,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePattern {
    pub var: Option<String>,
    pub label: Option<String>,
    pub properties: Vec<(String, Value)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelPattern {
    pub var: Option<String>,
    pub rel_type: Option<String>,
    pub direction: Direction,
}

/// Direction relative to the textual left-to-right order of the pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `-[]->`
    Right,
    /// `<-[]-`
    Left,
    /// `-[]-`
    Either,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Contains,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operand {
    Property { var: String, key: String },
    Literal(Value),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub left: Operand,
    pub op: CmpOp,
    pub right: Operand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Property {
        var: String,
        key: String,
    },
    /// A bare node variable; projects the node's natural key.
    Variable(String),
    /// `type(r)`
    RelType(String),
    /// `count(*)`, `count(x)`, `count(DISTINCT x.p)`
    Count {
        distinct: bool,
        arg: Option<Box<Expr>>,
    },
    /// `exists(*)` / `exists(x)`: true iff the group has at least one binding.
    Exists {
        arg: Option<String>,
    },
}

impl Expr {
    pub fn is_aggregate(&self) -> bool {
        matches!(self, Expr::Count { .. } | Expr::Exists { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnItem {
    pub expr: Expr,
    pub alias: Option<String>,
}

impl ReturnItem {
    pub fn column_name(&self) -> String {
        self.alias.clone().unwrap_or_else(|| self.expr.to_string())
    }
}

impl Query {
    pub fn has_aggregates(&self) -> bool {
        self.items.iter().any(|i| i.expr.is_aggregate())
    }
}

/// Cypher string literal with escaped quotes and backslashes.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn literal(v: &Value) -> String {
    match v {
        Value::Str(s) => quote(s),
        other => other.to_string(),
    }
}

impl fmt::Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        if let Some(v) = &self.var {
            f.write_str(v)?;
        }
        if let Some(l) = &self.label {
            write!(f, ":{l}")?;
        }
        if !self.properties.is_empty() {
            let body: Vec<String> = self.properties.iter().map(|(k, v)| format!("{k}: {}", literal(v))).collect();
            if self.var.is_some() || self.label.is_some() {
                f.write_str(" ")?;
            }
            write!(f, "{{{}}}", body.join(", "))?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for RelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut inner = String::new();
        if let Some(v) = &self.var {
            inner.push_str(v);
        }
        if let Some(t) = &self.rel_type {
            inner.push(':');
            inner.push_str(t);
        }
        match self.direction {
            Direction::Right => write!(f, "-[{inner}]->"),
            Direction::Left => write!(f, "<-[{inner}]-"),
            Direction::Either => write!(f, "-[{inner}]-"),
        }
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for hop in &self.hops {
            write!(f, "{}{}", hop.rel, hop.node)?;
        }
        Ok(())
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Property { var, key } => write!(f, "{var}.{key}"),
            Operand::Literal(v) => f.write_str(&literal(v)),
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Contains => "CONTAINS",
        })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op, self.right)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Property { var, key } => write!(f, "{var}.{key}"),
            Expr::Variable(v) => f.write_str(v),
            Expr::RelType(v) => write!(f, "type({v})"),
            Expr::Count { distinct, arg } => {
                let d = if *distinct { "DISTINCT " } else { "" };
                match arg {
                    Some(a) => write!(f, "count({d}{a})"),
                    None => f.write_str("count(*)"),
                }
            }
            Expr::Exists { arg } => write!(f, "exists({})", arg.as_deref().unwrap_or("*")),
        }
    }
}

impl fmt::Display for ReturnItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)?;
        if let Some(a) = &self.alias {
            write!(f, " AS {a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let patterns: Vec<String> = self.patterns.iter().map(ToString::to_string).collect();
        write!(f, "MATCH {}", patterns.join(", "))?;
        if !self.conditions.is_empty() {
            let conds: Vec<String> = self.conditions.iter().map(ToString::to_string).collect();
            write!(f, " WHERE {}", conds.join(" AND "))?;
        }
        f.write_str(" RETURN ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        let items: Vec<String> = self.items.iter().map(ToString::to_string).collect();
        f.write_str(&items.join(", "))?;
        if let Some(n) = self.limit {
            write!(f, " LIMIT {n}")?;
        }
        Ok(())
    }
}
