//! Pattern-matching executor for parsed queries.
//!
//! Bindings are found by backtracking over adjacency lists, filtered by the
//! WHERE conjunction, then sorted by the natural keys of every bound pattern
//! element (nodes by label and key, relationships by type and endpoints) so
//! results never depend on insertion order. A relationship is bound at most
//! once per match.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cypher::{CmpOp, Direction, Expr, NodePattern, Operand, Query};
use super::{EdgeRecord, EdgeType, GraphError, Label, NodeId, PropertyGraph, Value};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header line plus one tab-separated line per row.
    pub fn to_tsv(&self) -> String {
        self.render_tsv(Value::to_string)
    }

    /// TSV for prompts: booleans read as yes/no.
    pub fn to_context(&self) -> String {
        self.render_tsv(display_value)
    }

    /// Compact answer text: a single cell on its own, otherwise cells joined
    /// by ", " and rows by "; ". An empty table reads "none".
    pub fn answer_text(&self) -> String {
        if self.rows.is_empty() {
            return "none".into();
        }
        self.rows
            .iter()
            .map(|row| row.iter().map(display_value).collect::<Vec<_>>().join(", "))
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn render_tsv(&self, cell: impl Fn(&Value) -> String) -> String {
        let clean = |s: String| s.replace(['\t', '\n', '\r'], " ");
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| clean(cell(v))).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

pub fn display_value(v: &Value) -> String {
    match v {
        Value::Bool(true) => "yes".into(),
        Value::Bool(false) => "no".into(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Elem {
    Node(NodeId),
    Edge(EdgeRecord),
}

struct CNode {
    slot: usize,
    label: Option<Label>,
    properties: Vec<(String, Value)>,
}

struct CRel {
    slot: usize,
    edge_type: Option<EdgeType>,
    direction: Direction,
}

struct CPath {
    start: CNode,
    hops: Vec<(CRel, CNode)>,
}

struct Compiled {
    paths: Vec<CPath>,
    slots: usize,
    vars: BTreeMap<String, usize>,
}

fn compile(q: &Query) -> Result<Compiled, GraphError> {
    let mut vars: BTreeMap<String, usize> = BTreeMap::new();
    let mut slots = 0;
    let mut slot_for = |var: &Option<String>| -> usize {
        match var {
            Some(v) => *vars.entry(v.clone()).or_insert_with(|| {
                slots += 1;
                slots - 1
            }),
            None => {
                slots += 1;
                slots - 1
            }
        }
    };
    let node = |n: &NodePattern, slot: usize| -> Result<CNode, GraphError> {
        let label = match &n.label {
            Some(l) => Some(Label::parse(l).ok_or_else(|| GraphError::UnknownLabel(l.clone()))?),
            None => None,
        };
        Ok(CNode { slot, label, properties: n.properties.clone() })
    };
    let mut paths = Vec::new();
    for p in &q.patterns {
        let start_slot = slot_for(&p.start.var);
        let start = node(&p.start, start_slot)?;
        let mut hops = Vec::new();
        for h in &p.hops {
            let rel_slot = slot_for(&h.rel.var);
            let edge_type = match &h.rel.rel_type {
                Some(t) => Some(EdgeType::parse(t).ok_or_else(|| GraphError::UnknownEdgeType(t.clone()))?),
                None => None,
            };
            let node_slot = slot_for(&h.node.var);
            hops.push((CRel { slot: rel_slot, edge_type, direction: h.rel.direction }, node(&h.node, node_slot)?));
        }
        paths.push(CPath { start, hops });
    }
    Ok(Compiled { paths, slots, vars })
}

struct Matcher<'g> {
    graph: &'g PropertyGraph,
    compiled: &'g Compiled,
    out: Vec<Vec<Elem>>,
}

impl Matcher<'_> {
    fn node_ok(&self, c: &CNode, id: NodeId) -> bool {
        let n = self.graph.node(id);
        c.label.is_none_or(|l| l == n.label) && c.properties.iter().all(|(k, v)| n.property(k) == v)
    }

    fn bind_node(&mut self, path: usize, hop: usize, c_slot: usize, id: NodeId, b: &mut Vec<Option<Elem>>) {
        match b[c_slot] {
            Some(Elem::Node(bound)) if bound == id => self.hops(path, hop, id, b),
            Some(_) => {}
            None => {
                b[c_slot] = Some(Elem::Node(id));
                self.hops(path, hop, id, b);
                b[c_slot] = None;
            }
        }
    }

    fn start(&mut self, path: usize, b: &mut Vec<Option<Elem>>) {
        if path == self.compiled.paths.len() {
            self.out.push(b.iter().map(|e| e.expect("all slots bound")).collect());
            return;
        }
        let c = &self.compiled.paths[path].start;
        let slot = c.slot;
        let candidates: Vec<NodeId> = match b[slot] {
            Some(Elem::Node(id)) => vec![id],
            Some(Elem::Edge(_)) => vec![],
            None => match c.label {
                Some(l) => self.graph.nodes_with_label(l).map(|n| n.id).collect(),
                None => self.graph.nodes().iter().map(|n| n.id).collect(),
            },
        };
        for id in candidates {
            if self.node_ok(&self.compiled.paths[path].start, id) {
                self.bind_node(path, 0, slot, id, b);
            }
        }
    }

    fn hops(&mut self, path: usize, hop: usize, current: NodeId, b: &mut Vec<Option<Elem>>) {
        let p = &self.compiled.paths[path];
        if hop == p.hops.len() {
            self.start(path + 1, b);
            return;
        }
        let (rel, next) = &p.hops[hop];
        let mut steps: Vec<(EdgeRecord, NodeId)> = Vec::new();
        if matches!(rel.direction, Direction::Right | Direction::Either) {
            for &(t, dst) in self.graph.outgoing(current) {
                steps.push((EdgeRecord { src: current, edge_type: t, dst }, dst));
            }
        }
        if matches!(rel.direction, Direction::Left | Direction::Either) {
            for &(t, src) in self.graph.incoming(current) {
                steps.push((EdgeRecord { src, edge_type: t, dst: current }, src));
            }
        }
        let (rel_slot, next_slot) = (rel.slot, next.slot);
        for (edge, nbr) in steps {
            if rel.edge_type.is_some_and(|t| t != edge.edge_type) {
                continue;
            }
            if b.contains(&Some(Elem::Edge(edge))) {
                continue;
            }
            if !self.node_ok(next, nbr) {
                continue;
            }
            b[rel_slot] = Some(Elem::Edge(edge));
            self.bind_node(path, hop + 1, next_slot, nbr, b);
            b[rel_slot] = None;
        }
    }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum SortKey<'a> {
    Node(Label, &'a Value),
    Edge(EdgeType, &'a Value, &'a Value),
}

fn sort_key<'a>(g: &'a PropertyGraph, e: &Elem) -> SortKey<'a> {
    match e {
        Elem::Node(id) => {
            let n = g.node(*id);
            SortKey::Node(n.label, n.natural_key())
        }
        Elem::Edge(edge) => {
            SortKey::Edge(edge.edge_type, g.node(edge.src).natural_key(), g.node(edge.dst).natural_key())
        }
    }
}

struct Ctx<'a> {
    graph: &'a PropertyGraph,
    vars: &'a BTreeMap<String, usize>,
}

impl Ctx<'_> {
    fn elem<'b>(&self, binding: &'b [Elem], var: &str) -> &'b Elem {
        &binding[self.vars[var]]
    }

    fn property(&self, binding: &[Elem], var: &str, key: &str) -> Value {
        match self.elem(binding, var) {
            Elem::Node(id) => self.graph.node(*id).property(key).clone(),
            Elem::Edge(_) => Value::Null,
        }
    }

    fn operand(&self, binding: &[Elem], op: &Operand) -> Value {
        match op {
            Operand::Property { var, key } => self.property(binding, var, key),
            Operand::Literal(v) => v.clone(),
        }
    }

    fn scalar(&self, binding: &[Elem], expr: &Expr) -> Value {
        match expr {
            Expr::Property { var, key } => self.property(binding, var, key),
            Expr::Variable(var) => match self.elem(binding, var) {
                Elem::Node(id) => self.graph.node(*id).natural_key().clone(),
                Elem::Edge(e) => Value::from(e.edge_type.as_str()),
            },
            Expr::RelType(var) => match self.elem(binding, var) {
                Elem::Edge(e) => Value::from(e.edge_type.as_str()),
                Elem::Node(_) => Value::Null,
            },
            Expr::Count { .. } | Expr::Exists { .. } => unreachable!("aggregates are evaluated per group"),
        }
    }

    fn aggregate(&self, group: &[&Vec<Elem>], expr: &Expr) -> Value {
        match expr {
            Expr::Count { arg: None, .. } => Value::Int(group.len() as i64),
            Expr::Count { distinct, arg: Some(inner) } => {
                let values = group.iter().map(|b| self.scalar(b, inner)).filter(|v| *v != Value::Null);
                if *distinct {
                    Value::Int(values.collect::<std::collections::BTreeSet<_>>().len() as i64)
                } else {
                    Value::Int(values.count() as i64)
                }
            }
            Expr::Exists { .. } => Value::Bool(!group.is_empty()),
            other => self.scalar(group[0], other),
        }
    }
}

pub(crate) fn compare(left: &Value, op: CmpOp, right: &Value) -> bool {
    use Value::*;
    match (left, right) {
        (Null, _) | (_, Null) => false,
        (Str(a), Str(b)) => match op {
            CmpOp::Contains => a.to_lowercase().contains(&b.to_lowercase()),
            _ => ordered(a.cmp(b), op),
        },
        (Int(a), Int(b)) => ordered(a.cmp(b), op),
        (Bool(a), Bool(b)) => match op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            _ => false,
        },
        _ => op == CmpOp::Ne,
    }
}

fn ordered(ord: std::cmp::Ordering, op: CmpOp) -> bool {
    use std::cmp::Ordering::*;
    match op {
        CmpOp::Eq => ord == Equal,
        CmpOp::Ne => ord != Equal,
        CmpOp::Lt => ord == Less,
        CmpOp::Le => ord != Greater,
        CmpOp::Gt => ord == Greater,
        CmpOp::Ge => ord != Less,
        CmpOp::Contains => false,
    }
}

/// Runs a parsed query. Aggregates (`count`, `exists`) group by the
/// non-aggregate return items; without grouping items they yield exactly one
/// row even when nothing matches.
pub fn execute(query: &Query, graph: &PropertyGraph) -> Result<ResultTable, GraphError> {
    let compiled = compile(query)?;
    let mut matcher = Matcher { graph, compiled: &compiled, out: Vec::new() };
    let mut scratch = vec![None; compiled.slots];
    matcher.start(0, &mut scratch);
    let ctx = Ctx { graph, vars: &compiled.vars };

    let mut bindings: Vec<Vec<Elem>> = matcher
        .out
        .into_iter()
        .filter(|b| query.conditions.iter().all(|c| compare(&ctx.operand(b, &c.left), c.op, &ctx.operand(b, &c.right))))
        .collect();
    bindings.sort_by(|a, b| {
        let ka = a.iter().map(|e| sort_key(graph, e));
        let kb = b.iter().map(|e| sort_key(graph, e));
        ka.cmp(kb)
    });

    let columns: Vec<String> = query.items.iter().map(|i| i.column_name()).collect();
    let mut rows: Vec<Vec<Value>> = if query.has_aggregates() {
        let mut groups: BTreeMap<Vec<Value>, Vec<&Vec<Elem>>> = BTreeMap::new();
        let keys: Vec<&Expr> = query.items.iter().map(|i| &i.expr).filter(|e| !e.is_aggregate()).collect();
        if keys.is_empty() {
            groups.insert(Vec::new(), bindings.iter().collect());
        } else {
            for b in &bindings {
                let key = keys.iter().map(|e| ctx.scalar(b, e)).collect();
                groups.entry(key).or_default().push(b);
            }
        }
        groups.values().map(|group| query.items.iter().map(|i| ctx.aggregate(group, &i.expr)).collect()).collect()
    } else {
        bindings.iter().map(|b| query.items.iter().map(|i| ctx.scalar(b, &i.expr)).collect()).collect()
    };
    if query.distinct {
        let mut seen = std::collections::HashSet::new();
        rows.retain(|r| seen.insert(r.clone()));
    }
    if let Some(n) = query.limit {
        rows.truncate(n as usize);
    }
    Ok(ResultTable { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_cypher;
    use crate::ingest::test_support::record;
    use crate::ingest::KeywordVector;

    fn graph() -> PropertyGraph {
        let mut g = PropertyGraph::new();
        let mut a = record("10.1/a", "Agentic RAG", "About agents.");
        a.authors = vec!["Ann".into(), "Bob".into()];
        a.year = Some(2025);
        let mut b = record("10.1/b", "Graph QA", "About graphs.");
        b.authors = vec!["Bob".into()];
        b.year = Some(2024);
        let kw = |t: &[&str]| KeywordVector::new(t.iter().map(|s| (s.to_string(), 1.0)).collect());
        g.upsert_paper(&a, &kw(&["agent", "healthcare"]), &["10.9/x".into()]).unwrap();
        g.upsert_paper(&b, &kw(&["graph", "agent"]), &[]).unwrap();
        g
    }

    fn run(q: &str) -> ResultTable {
        execute(&parse_cypher(q).unwrap(), &graph()).unwrap()
    }

    #[test]
    fn fact_check_true_and_false() {
        let t = run(
            r#"MATCH (p:Paper {title: "Agentic RAG"})-[:HAS_KEYWORD]->(k:Keyword {term: "healthcare"}) RETURN exists(*) AS answer"#,
        );
        assert_eq!(t.rows, vec![vec![Value::Bool(true)]]);
        let t = run(
            r#"MATCH (p:Paper {title: "Graph QA"})-[:HAS_KEYWORD]->(k:Keyword {term: "healthcare"}) RETURN exists(*) AS answer"#,
        );
        assert_eq!(t.rows, vec![vec![Value::Bool(false)]]);
    }

    #[test]
    fn grouped_count_and_ordering() {
        let t = run("MATCH (p:Paper)-[:PUBLISHED_IN]->(y:Year) RETURN y.value, count(p) AS papers");
        assert_eq!(t.columns, vec!["y.value", "papers"]);
        assert_eq!(t.rows, vec![vec![Value::Int(2024), Value::Int(1)], vec![Value::Int(2025), Value::Int(1)]]);
        let t = run("MATCH (p:Paper)-[:HAS_AUTHOR]->(a:Author) RETURN a.name, p.doi");
        let names: Vec<String> = t.rows.iter().map(|r| r[0].to_string()).collect();
        // Paper key is bound first, so rows are ordered by paper doi then author
        assert_eq!(names, vec!["Ann", "Bob", "Bob"]);
    }

    #[test]
    fn two_hop_indirect_and_predicate() {
        let t = run(
            r#"MATCH (k:Keyword {term: "agent"})<-[:HAS_KEYWORD]-(p:Paper)-[:PUBLISHED_IN]->(y:Year {value: 2024}) RETURN exists(*)"#,
        );
        assert_eq!(t.rows[0][0], Value::Bool(true));
        let t = run(r#"MATCH (p:Paper {title: "Agentic RAG"})-[r]->(d:Database {name: "ArXiv"}) RETURN type(r)"#);
        assert_eq!(t.rows, vec![vec![Value::from("INDEXED_IN")]]);
        let t = run(
            r#"MATCH (a:Author)<-[:HAS_AUTHOR]-(p:Paper)-[:HAS_AUTHOR]->(b:Author) WHERE a.name = "Ann" RETURN b.name"#,
        );
        // the same HAS_AUTHOR edge is never bound twice, so Ann does not co-author with herself
        assert_eq!(t.rows, vec![vec![Value::from("Bob")]]);
    }

    #[test]
    fn where_contains_is_case_insensitive() {
        let t = run(r#"MATCH (p:Paper) WHERE p.title CONTAINS "rag" RETURN p.doi"#);
        assert_eq!(t.rows, vec![vec![Value::from("10.1/a")]]);
        let t = run("MATCH (p:Paper)-[:PUBLISHED_IN]->(y:Year) WHERE y.value >= 2025 RETURN count(*)");
        assert_eq!(t.rows, vec![vec![Value::Int(1)]]);
    }

    #[test]
    fn empty_results_and_limit() {
        let t = run(r#"MATCH (p:Paper {doi: "nope"}) RETURN p.title"#);
        assert!(t.is_empty());
        assert_eq!(t.columns, vec!["p.title"]);
        let t = run("MATCH (k:Keyword) RETURN k.term LIMIT 2");
        assert_eq!(t.rows, vec![vec![Value::from("agent")], vec![Value::from("graph")]]);
        let t = run("MATCH (p:Paper)-[:HAS_KEYWORD]->(k:Keyword) RETURN DISTINCT k.term");
        assert_eq!(t.rows.len(), 3);
    }

    #[test]
    fn unknown_schema_elements() {
        let g = graph();
        let q = parse_cypher("MATCH (j:Journal) RETURN j").unwrap();
        assert_eq!(execute(&q, &g), Err(GraphError::UnknownLabel("Journal".into())));
        let q = parse_cypher("MATCH (p:Paper)-[:WROTE]->(a) RETURN a").unwrap();
        assert_eq!(execute(&q, &g), Err(GraphError::UnknownEdgeType("WROTE".into())));
    }

    #[test]
    fn tsv_rendering() {
        let t =
            ResultTable { columns: vec!["a".into(), "b".into()], rows: vec![vec![Value::from("x\ty"), Value::Int(3)]] };
        assert_eq!(t.to_tsv(), "a\tb\nx y\t3\n");
    }
}
