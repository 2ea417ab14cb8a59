use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{Tok, Token};
use super::{CypherError, MAX_HOPS};
use crate::graph::Value;

/// Clause keywords that are valid Cypher but outside the subset.
const UNSUPPORTED_CLAUSES: &[&str] = &[
    "call", "create", "delete", "detach", "foreach", "load", "merge", "optional", "order", "remove", "set", "skip",
    "union", "unwind", "with", "yield",
];

pub(super) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Variable references to validate after MATCH is complete.
    refs: Vec<(String, usize, RefKind)>,
}

#[derive(Clone, Copy, PartialEq)]
enum RefKind {
    Any,
    Node,
    Rel,
}

#[derive(Clone, Copy, PartialEq)]
enum VarKind {
    Node,
    Rel,
}

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Self { tokens, pos: 0, refs: Vec::new() }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, CypherError> {
        Err(CypherError::Parse { offset: self.offset(), message: message.into() })
    }

    fn unsupported<T>(&self, feature: impl Into<String>) -> Result<T, CypherError> {
        Err(CypherError::UnsupportedFeature { offset: self.offset(), feature: feature.into() })
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Str(_) => "string literal".into(),
            Tok::Int(i) => format!("'{i}'"),
            Tok::Eof => "end of input".into(),
            other => format!("{other:?}"),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), CypherError> {
        self.check_unsupported_clause(kw == "match")?;
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(format!("expected {kw}, found {}", Self::describe(self.peek())))
        }
    }

    fn check_unsupported_clause(&self, match_allowed: bool) -> Result<(), CypherError> {
        if let Tok::Ident(s) = self.peek() {
            let lower = s.to_ascii_lowercase();
            if UNSUPPORTED_CLAUSES.contains(&lower.as_str()) {
                return self.unsupported(format!("{} clause", s.to_ascii_uppercase()));
            }
            if lower == "match" && !match_allowed {
                return self.unsupported("multiple MATCH clauses");
            }
        }
        Ok(())
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, CypherError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.error(format!("expected {what}, found {}", Self::describe(self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), CypherError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let off = self.offset();
                self.bump();
                Ok((s, off))
            }
            other => self.error(format!("expected {what}, found {}", Self::describe(&other))),
        }
    }

    pub fn parse_query(mut self) -> Result<Query, CypherError> {
        self.expect_keyword("match")?;
        let mut patterns = vec![self.path()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            patterns.push(self.path()?);
        }
        let vars = self.collect_vars(&patterns)?;

        let mut conditions = Vec::new();
        if self.eat_keyword("where") {
            conditions.push(self.condition()?);
            loop {
                if self.eat_keyword("and") {
                    conditions.push(self.condition()?);
                } else if self.is_keyword("or") || self.is_keyword("xor") {
                    return self.unsupported("disjunction in WHERE");
                } else {
                    break;
                }
            }
        }

        self.expect_keyword("return")?;
        let distinct = self.eat_keyword("distinct");
        let mut items = vec![self.return_item()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            items.push(self.return_item()?);
        }

        let mut limit = None;
        self.check_unsupported_clause(false)?;
        if self.eat_keyword("limit") {
            match self.peek().clone() {
                Tok::Int(n) if n > 0 => {
                    self.bump();
                    limit = Some(n as u64);
                }
                _ => return self.error("LIMIT expects a positive integer"),
            }
        }
        self.check_unsupported_clause(false)?;
        if *self.peek() == Tok::Semicolon {
            self.bump();
        }
        if *self.peek() != Tok::Eof {
            return self.error(format!("unexpected {}", Self::describe(self.peek())));
        }

        for (name, offset, kind) in &self.refs {
            match (vars.get(name), kind) {
                (None, _) => {
                    return Err(CypherError::Parse {
                        offset: *offset,
                        message: format!("variable '{name}' is not bound in MATCH"),
                    })
                }
                (Some(VarKind::Rel), RefKind::Node) => {
                    return Err(CypherError::Parse {
                        offset: *offset,
                        message: format!("'{name}' is a relationship and has no properties"),
                    })
                }
                (Some(VarKind::Node), RefKind::Rel) => {
                    return Err(CypherError::Parse {
                        offset: *offset,
                        message: format!("type() expects a relationship, '{name}' is a node"),
                    })
                }
                _ => {}
            }
        }

        Ok(Query { patterns, conditions, distinct, items, limit })
    }

    fn collect_vars(&self, patterns: &[PathPattern]) -> Result<HashMap<String, VarKind>, CypherError> {
        let mut vars = HashMap::new();
        let mut rels = HashSet::new();
        let conflict = |name: &str| CypherError::Parse {
            offset: self.offset(),
            message: format!("variable '{name}' is used for both a node and a relationship"),
        };
        for p in patterns {
            let nodes = std::iter::once(&p.start).chain(p.hops.iter().map(|h| &h.node));
            for n in nodes {
                if let Some(v) = &n.var {
                    if vars.insert(v.clone(), VarKind::Node) == Some(VarKind::Rel) {
                        return Err(conflict(v));
                    }
                }
            }
            for h in &p.hops {
                if let Some(v) = &h.rel.var {
                    if !rels.insert(v.clone()) {
                        return Err(CypherError::Parse {
                            offset: self.offset(),
                            message: format!("relationship variable '{v}' bound twice"),
                        });
                    }
                    if vars.insert(v.clone(), VarKind::Rel) == Some(VarKind::Node) {
                        return Err(conflict(v));
                    }
                }
            }
        }
        Ok(vars)
    }

    fn path(&mut self) -> Result<PathPattern, CypherError> {
        let start = self.node()?;
        let mut hops = Vec::new();
        while matches!(self.peek(), Tok::Dash | Tok::Lt) {
            if hops.len() == MAX_HOPS {
                return self.unsupported(format!("paths longer than {MAX_HOPS} hops"));
            }
            let rel = self.rel()?;
            let node = self.node()?;
            hops.push(Hop { rel, node });
        }
        Ok(PathPattern { start, hops })
    }

    fn node(&mut self) -> Result<NodePattern, CypherError> {
        self.expect(Tok::LParen, "'(' to start a node pattern")?;
        let mut node = NodePattern::default();
        if let Tok::Ident(_) = self.peek() {
            node.var = Some(self.ident("variable")?.0);
        }
        if *self.peek() == Tok::Colon {
            self.bump();
            node.label = Some(self.ident("label")?.0);
            if *self.peek() == Tok::Colon {
                return self.unsupported("multiple labels");
            }
        }
        if *self.peek() == Tok::LBrace {
            self.bump();
            loop {
                let (key, _) = self.ident("property key")?;
                self.expect(Tok::Colon, "':'")?;
                let value = self.literal()?;
                node.properties.push((key, value));
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RBrace => {
                        self.bump();
                        break;
                    }
                    other => return self.error(format!("expected ',' or '}}', found {}", Self::describe(other))),
                }
            }
        }
        self.expect(Tok::RParen, "')' to close the node pattern")?;
        Ok(node)
    }

    fn rel(&mut self) -> Result<RelPattern, CypherError> {
        let left_arrow = if *self.peek() == Tok::Lt {
            self.bump();
            true
        } else {
            false
        };
        self.expect(Tok::Dash, "'-'")?;
        if *self.peek() != Tok::LBracket {
            return self.error("expected '[' in relationship pattern");
        }
        self.bump();
        let mut var = None;
        let mut rel_type = None;
        if let Tok::Ident(_) = self.peek() {
            var = Some(self.ident("variable")?.0);
        }
        if *self.peek() == Tok::Colon {
            self.bump();
            rel_type = Some(self.ident("relationship type")?.0);
            if let Tok::Other('|') = self.peek() {
                return self.unsupported("relationship type alternatives");
            }
        }
        if *self.peek() == Tok::Star {
            return self.unsupported("variable-length relationships");
        }
        if *self.peek() == Tok::LBrace {
            return self.unsupported("relationship properties");
        }
        self.expect(Tok::RBracket, "']'")?;
        self.expect(Tok::Dash, "'-'")?;
        let right_arrow = if *self.peek() == Tok::Gt {
            self.bump();
            true
        } else {
            false
        };
        let direction = match (left_arrow, right_arrow) {
            (true, false) => Direction::Left,
            (false, true) => Direction::Right,
            (false, false) => Direction::Either,
            (true, true) => return self.error("relationship cannot point both ways"),
        };
        Ok(RelPattern { var, rel_type, direction })
    }

    fn literal(&mut self) -> Result<Value, CypherError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(Value::Str(s))
            }
            Tok::Int(i) => {
                self.bump();
                Ok(Value::Int(i))
            }
            Tok::Dash => {
                if let Tok::Int(i) = self.peek_at(1).clone() {
                    self.bump();
                    self.bump();
                    Ok(Value::Int(-i))
                } else {
                    self.error("expected a literal")
                }
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("true") => {
                self.bump();
                Ok(Value::Bool(true))
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("false") => {
                self.bump();
                Ok(Value::Bool(false))
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("null") => {
                self.bump();
                Ok(Value::Null)
            }
            Tok::LBracket => self.unsupported("list literals"),
            Tok::Other('$') => self.unsupported("query parameters"),
            other => self.error(format!("expected a literal, found {}", Self::describe(&other))),
        }
    }

    fn operand(&mut self) -> Result<Operand, CypherError> {
        if let Tok::Ident(s) = self.peek().clone() {
            let lower = s.to_ascii_lowercase();
            if !matches!(lower.as_str(), "true" | "false" | "null") {
                if lower == "not" {
                    return self.unsupported("negation in WHERE");
                }
                if *self.peek_at(1) == Tok::LParen {
                    return self.unsupported(format!("function {s}() in WHERE"));
                }
                let (var, off) = self.ident("variable")?;
                self.expect(Tok::Dot, "'.' for property access")?;
                let (key, _) = self.ident("property key")?;
                self.refs.push((var.clone(), off, RefKind::Node));
                return Ok(Operand::Property { var, key });
            }
        }
        Ok(Operand::Literal(self.literal()?))
    }

    fn condition(&mut self) -> Result<Condition, CypherError> {
        if self.is_keyword("not") {
            return self.unsupported("negation in WHERE");
        }
        if self.is_keyword("exists") {
            return self.unsupported("EXISTS in WHERE");
        }
        let left = self.operand()?;
        let op = match self.peek().clone() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Ident(s) if s.eq_ignore_ascii_case("contains") => CmpOp::Contains,
            Tok::Ident(s) if ["starts", "ends", "in", "is", "=~"].contains(&s.to_ascii_lowercase().as_str()) => {
                return self.unsupported(format!("{} operator", s.to_ascii_uppercase()))
            }
            other => return self.error(format!("expected a comparison operator, found {}", Self::describe(&other))),
        };
        self.bump();
        let right = self.operand()?;
        Ok(Condition { left, op, right })
    }

    fn return_item(&mut self) -> Result<ReturnItem, CypherError> {
        let expr = self.expr()?;
        let alias = if self.eat_keyword("as") { Some(self.ident("alias")?.0) } else { None };
        Ok(ReturnItem { expr, alias })
    }

    fn expr(&mut self) -> Result<Expr, CypherError> {
        let (name, off) = self.ident("return expression")?;
        if *self.peek() == Tok::LParen {
            self.bump();
            let lower = name.to_ascii_lowercase();
            let expr = match lower.as_str() {
                "count" => {
                    if *self.peek() == Tok::Star {
                        self.bump();
                        Expr::Count { distinct: false, arg: None }
                    } else {
                        let distinct = self.eat_keyword("distinct");
                        let inner = self.simple_expr()?;
                        Expr::Count { distinct, arg: Some(Box::new(inner)) }
                    }
                }
                "exists" => {
                    if *self.peek() == Tok::Star {
                        self.bump();
                        Expr::Exists { arg: None }
                    } else {
                        let (v, voff) = self.ident("variable")?;
                        self.refs.push((v.clone(), voff, RefKind::Any));
                        Expr::Exists { arg: Some(v) }
                    }
                }
                "type" => {
                    let (v, voff) = self.ident("relationship variable")?;
                    self.refs.push((v.clone(), voff, RefKind::Rel));
                    Expr::RelType(v)
                }
                _ => {
                    return Err(CypherError::UnsupportedFeature { offset: off, feature: format!("function {name}()") })
                }
            };
            self.expect(Tok::RParen, "')'")?;
            return Ok(expr);
        }
        self.pos -= 1;
        self.simple_expr()
    }

    fn simple_expr(&mut self) -> Result<Expr, CypherError> {
        let (var, off) = self.ident("variable")?;
        if *self.peek() == Tok::Dot {
            self.bump();
            let (key, _) = self.ident("property key")?;
            self.refs.push((var.clone(), off, RefKind::Node));
            Ok(Expr::Property { var, key })
        } else {
            self.refs.push((var.clone(), off, RefKind::Any));
            Ok(Expr::Variable(var))
        }
    }
}
