//! Shared fixtures: a small bibliographic graph plus a brute-force oracle
//! that answers golden queries straight from the paper list.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use hybridrag::graph::{database_name, execute, parse_cypher, PropertyGraph, Value};
use hybridrag::ingest::{BibRecord, KeywordVector, PlainTextExtractor, SourceDb};
use hybridrag::pipeline::{
    build_benchmark, load_snapshot, run_benchmark, run_ingestion, save_snapshot, transport_for, Config, CorpusSnapshot,
    Engine,
};

pub struct Paper {
    pub doi: &'static str,
    pub title: &'static str,
    pub year: i32,
    pub source: SourceDb,
    pub authors: &'static [&'static str],
    pub keywords: &'static [&'static str],
    pub cites: &'static [&'static str],
}

pub const PAPERS: [Paper; 6] = [
    Paper {
        doi: "10.1000/p1",
        title: "Graph retrieval for clinical notes",
        year: 2021,
        source: SourceDb::Pubmed,
        authors: &["Ada Byron", "Ben Ng"],
        keywords: &["graph", "clinical"],
        cites: &["10.2000/c1", "10.2000/c2"],
    },
    Paper {
        doi: "10.1000/p2",
        title: "Agents that route questions",
        year: 2022,
        source: SourceDb::Arxiv,
        authors: &["Ben Ng", "Cy Ortiz"],
        keywords: &["agent", "routing", "llm"],
        cites: &["10.2000/c2"],
    },
    Paper {
        doi: "10.1000/p3",
        title: "Dense and sparse hybrid search",
        year: 2023,
        source: SourceDb::Arxiv,
        authors: &["Dee Park"],
        keywords: &["retrieval", "llm"],
        cites: &["10.2000/c3", "10.2000/c4"],
    },
    Paper {
        doi: "10.1000/p4",
        title: "Knowledge GRAPH question answering",
        year: 2023,
        source: SourceDb::Scholar,
        authors: &["Ada Byron", "Dee Park", "Eve Quinn"],
        keywords: &["graph", "agent"],
        cites: &["10.2000/c1"],
    },
    Paper {
        doi: "10.1000/p5",
        title: "Clinical trial summarization",
        year: 2024,
        source: SourceDb::Pubmed,
        authors: &["Fay Roy"],
        keywords: &["clinical", "llm", "retrieval"],
        cites: &[],
    },
    Paper {
        doi: "10.1000/p6",
        title: "Evaluating retrieval agents",
        year: 2024,
        source: SourceDb::Scholar,
        authors: &["Cy Ortiz", "Fay Roy", "Ada Byron"],
        keywords: &["agent", "retrieval"],
        cites: &["10.2000/c5", "10.2000/c2"],
    },
];

pub fn record(p: &Paper) -> BibRecord {
    BibRecord {
        doi: p.doi.into(),
        title: p.title.into(),
        abstract_text: format!("Abstract of {}.", p.title),
        year: Some(p.year),
        authors: p.authors.iter().map(|a| a.to_string()).collect(),
        pdf_url: format!("https://example.org/{}.pdf", p.doi),
        source_db: p.source,
    }
}

pub fn fixture_graph() -> PropertyGraph {
    let mut g = PropertyGraph::new();
    for p in &PAPERS {
        let kv = KeywordVector::new(p.keywords.iter().map(|k| (k.to_string(), 1.0)).collect());
        let cites: Vec<String> = p.cites.iter().map(|c| c.to_string()).collect();
        g.upsert_paper(&record(p), &kv, &cites).unwrap();
    }
    g
}

fn s(x: &str) -> Value {
    Value::from(x)
}

fn int(x: impl Into<i64>) -> Value {
    Value::Int(x.into())
}

fn distinct<T: Ord>(it: impl IntoIterator<Item = T>) -> BTreeSet<T> {
    it.into_iter().collect()
}

fn authors() -> BTreeSet<&'static str> {
    distinct(PAPERS.iter().flat_map(|p| p.authors.iter().copied()))
}

fn keywords() -> BTreeSet<&'static str> {
    distinct(PAPERS.iter().flat_map(|p| p.keywords.iter().copied()))
}

/// A query and its expected rows; rows compare as a sorted multiset.
/// `kind` names the benchmark question type the query shape belongs to, or
/// "other".
pub struct Golden {
    pub kind: &'static str,
    pub query: String,
    pub expected: Vec<Vec<Value>>,
}

fn golden(query: impl Into<String>, expected: Vec<Vec<Value>>) -> Golden {
    Golden { kind: "other", query: query.into(), expected }
}

fn typed(kind: &'static str, query: impl Into<String>, expected: Vec<Vec<Value>>) -> Golden {
    Golden { kind, query: query.into(), expected }
}

pub fn golden_cases() -> Vec<Golden> {
    let mut out = vec![
        golden("MATCH (p:Paper) RETURN p.doi", PAPERS.iter().map(|p| vec![s(p.doi)]).collect()),
        golden("MATCH (p:Paper) RETURN count(*) AS n", vec![vec![int(PAPERS.len() as i64)]]),
        golden("MATCH (a:Author) RETURN count(a)", vec![vec![int(authors().len() as i64)]]),
        golden(
            "MATCH (p:Paper)-[:HAS_KEYWORD]->(k:Keyword) RETURN count(DISTINCT k.term)",
            vec![vec![int(keywords().len() as i64)]],
        ),
    ];

    for p in &PAPERS {
        out.push(typed(
            "object_discovery",
            format!(r#"MATCH (p:Paper {{title: "{}"}})-[:HAS_AUTHOR]->(a:Author) RETURN a.name"#, p.title),
            p.authors.iter().map(|a| vec![s(a)]).collect(),
        ));
    }

    for a in authors() {
        out.push(golden(
            format!(r#"MATCH (p:Paper)-[:HAS_AUTHOR]->(a:Author {{name: "{a}"}}) RETURN p.title"#),
            PAPERS.iter().filter(|p| p.authors.contains(&a)).map(|p| vec![s(p.title)]).collect(),
        ));
        // co-authors, excluding the author via edge uniqueness
        let co = distinct(
            PAPERS
                .iter()
                .filter(|p| p.authors.contains(&a))
                .flat_map(|p| p.authors.iter().copied())
                .filter(|b| *b != a),
        );
        out.push(golden(
            format!(r#"MATCH (a:Author {{name: "{a}"}})<-[:HAS_AUTHOR]-(p:Paper)-[:HAS_AUTHOR]->(b:Author) RETURN DISTINCT b.name"#),
            co.into_iter().map(|b| vec![s(b)]).collect(),
        ));
        out.push(golden(
            format!(r#"MATCH (a:Author {{name: "{a}"}})-[:HAS_AUTHOR]-(p:Paper) RETURN p.doi"#),
            PAPERS.iter().filter(|p| p.authors.contains(&a)).map(|p| vec![s(p.doi)]).collect(),
        ));
    }

    for k in keywords() {
        out.push(golden(
            format!(r#"MATCH (p:Paper)-[:HAS_KEYWORD]->(k:Keyword {{term: "{k}"}}) RETURN p.doi"#),
            PAPERS.iter().filter(|p| p.keywords.contains(&k)).map(|p| vec![s(p.doi)]).collect(),
        ));
        let years = distinct(PAPERS.iter().filter(|p| p.keywords.contains(&k)).map(|p| p.year));
        out.push(typed(
            "indirect_relationship",
            format!(r#"MATCH (k:Keyword {{term: "{k}"}})<-[:HAS_KEYWORD]-(p:Paper)-[:PUBLISHED_IN]->(y:Year) RETURN DISTINCT y.value"#),
            years.iter().map(|y| vec![int(*y)]).collect(),
        ));
        out.push(typed(
            "indirect_relationship",
            format!(r#"MATCH (k:Keyword {{term: "{k}"}})<-[:HAS_KEYWORD]-(p:Paper)-[:PUBLISHED_IN]->(y:Year {{value: 2023}}) RETURN exists(*)"#),
            vec![vec![Value::Bool(years.contains(&2023))]],
        ));
    }

    // fact checks, every paper against every keyword
    for p in &PAPERS {
        for k in keywords() {
            out.push(typed(
                "fact_check",
                format!(
                    r#"MATCH (p:Paper {{title: "{}"}})-[:HAS_KEYWORD]->(k:Keyword {{term: "{k}"}}) RETURN exists(*) AS answer"#,
                    p.title
                ),
                vec![vec![Value::Bool(p.keywords.contains(&k))]],
            ));
        }
        out.push(golden(
            format!(r#"MATCH (p:Paper {{doi: "{}"}})-[r]->(d:Database) RETURN type(r), d.name"#, p.doi),
            vec![vec![s("INDEXED_IN"), s(database_name(p.source))]],
        ));
        out.push(typed(
            "subject_centered",
            format!(r#"MATCH (p:Paper {{title: "{}"}}) RETURN p.doi, p.abstract"#, p.title),
            vec![vec![s(p.doi), s(&record(p).abstract_text)]],
        ));
        let pt = p.title;
        out.push(typed(
            "predicate_discovery",
            format!(r#"MATCH (p:Paper {{title: "{pt}"}})-[r]->(n:Author {{name: "{}"}}) RETURN type(r)"#, p.authors[0]),
            vec![vec![s("HAS_AUTHOR")]],
        ));
        out.push(typed(
            "predicate_discovery",
            format!(r#"MATCH (p:Paper {{title: "{pt}"}})-[r]->(n:Year {{value: {}}}) RETURN type(r)"#, p.year),
            vec![vec![s("PUBLISHED_IN")]],
        ));
        // a keyword the paper lacks relates to it by no edge at all
        let missing = keywords().into_iter().find(|k| !p.keywords.contains(k)).unwrap();
        out.push(typed(
            "predicate_discovery",
            format!(r#"MATCH (p:Paper {{title: "{pt}"}})-[r]->(n:Keyword {{term: "{missing}"}}) RETURN type(r)"#),
            vec![],
        ));
    }

    let mut per_year: BTreeMap<i32, i64> = BTreeMap::new();
    for p in &PAPERS {
        *per_year.entry(p.year).or_default() += 1;
    }
    out.push(golden(
        "MATCH (p:Paper)-[:PUBLISHED_IN]->(y:Year) RETURN y.value, count(p) AS papers",
        per_year.iter().map(|(y, n)| vec![int(*y), int(*n)]).collect(),
    ));

    let mut per_db: BTreeMap<&str, i64> = BTreeMap::new();
    for p in &PAPERS {
        *per_db.entry(database_name(p.source)).or_default() += 1;
    }
    out.push(golden(
        "MATCH (p:Paper)-[:INDEXED_IN]->(d:Database) RETURN d.name, count(*)",
        per_db.iter().map(|(d, n)| vec![s(d), int(*n)]).collect(),
    ));

    let mut cited: BTreeMap<&str, i64> = BTreeMap::new();
    for p in &PAPERS {
        for c in p.cites {
            *cited.entry(c).or_default() += 1;
        }
    }
    out.push(golden(
        "MATCH (p:Paper)-[:CITES]->(c:Citation) RETURN c.doi, count(p)",
        cited.iter().map(|(c, n)| vec![s(c), int(*n)]).collect(),
    ));

    let mut per_author: BTreeMap<&str, i64> = BTreeMap::new();
    for p in &PAPERS {
        for a in p.authors {
            *per_author.entry(a).or_default() += 1;
        }
    }
    out.push(golden(
        "MATCH (p:Paper)-[:HAS_AUTHOR]->(a:Author) RETURN a.name, count(DISTINCT p) AS n",
        per_author.iter().map(|(a, n)| vec![s(a), int(*n)]).collect(),
    ));

    out.push(golden(
        "MATCH (p:Paper)-[:PUBLISHED_IN]->(y:Year) WHERE y.value >= 2023 RETURN p.doi",
        PAPERS.iter().filter(|p| p.year >= 2023).map(|p| vec![s(p.doi)]).collect(),
    ));
    out.push(golden(
        r#"MATCH (p:Paper)-[:PUBLISHED_IN]->(y:Year) WHERE y.value < 2023 AND y.value <> 2021 RETURN p.doi"#,
        PAPERS.iter().filter(|p| p.year < 2023 && p.year != 2021).map(|p| vec![s(p.doi)]).collect(),
    ));
    out.push(golden(
        r#"MATCH (p:Paper) WHERE p.title CONTAINS "graph" RETURN p.doi"#,
        PAPERS.iter().filter(|p| p.title.to_lowercase().contains("graph")).map(|p| vec![s(p.doi)]).collect(),
    ));
    for p in &PAPERS {
        let years = distinct(PAPERS.iter().filter(|q| q.source == p.source).map(|q| (q.doi, q.year)));
        out.push(golden(
            format!(
                r#"MATCH (p:Paper)-[:PUBLISHED_IN]->(y:Year), (p)-[:INDEXED_IN]->(d:Database {{name: "{}"}}) RETURN p.doi, y.value"#,
                database_name(p.source)
            ),
            years.into_iter().map(|(d, y)| vec![s(d), int(y)]).collect(),
        ));
    }
    out.push(golden(r#"MATCH (p:Paper {doi: "10.0/none"}) RETURN p.title"#, vec![]));
    out.push(typed(
        "fact_check",
        r#"MATCH (p:Paper {doi: "10.0/none"})-[:HAS_AUTHOR]->(a:Author) RETURN exists(*)"#,
        vec![vec![Value::Bool(false)]],
    ));
    out
}

/// Runs one golden query; `Err` describes the mismatch.
pub fn check_golden(graph: &PropertyGraph, case: &Golden) -> Result<(), String> {
    let q = parse_cypher(&case.query).map_err(|e| format!("{}: {e}", case.query))?;
    let table = execute(&q, graph).map_err(|e| format!("{}: {e}", case.query))?;
    let mut got = table.rows;
    let mut want = case.expected.clone();
    got.sort();
    want.sort();
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: got {got:?}, want {want:?}", case.query))
    }
}

/// 8 fetched records: the 6 fixture papers, a copy of the first with a
/// resolver-prefixed upper-case DOI and ragged whitespace (a duplicate once
/// normalized) and a copy of the second with a blank abstract (incomplete).
/// Dropping incomplete leaves 7, dedup leaves 6.
pub fn stage_fixture() -> Vec<BibRecord> {
    let mut out: Vec<BibRecord> = PAPERS.iter().map(record).collect();
    let mut dup = record(&PAPERS[0]);
    dup.doi = "https://doi.org/10.1000/P1".into();
    dup.title = format!("  {}  ", dup.title.replace(' ', "   "));
    out.push(dup);
    let mut incomplete = record(&PAPERS[1]);
    incomplete.abstract_text = "  ".into();
    out.push(incomplete);
    out
}

/// Ingest, save, reload, answer and benchmark into `dir`; returns every
/// output file keyed by name.
pub fn full_run(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut cfg = Config::default();
    cfg.eval.kg_per_type = 2;
    cfg.eval.vs_questions = 10;
    let t = transport_for(&cfg).unwrap();
    let corpus = run_ingestion(&cfg, t.as_ref(), &PlainTextExtractor, cfg.embedding.build().as_ref()).unwrap();
    let snap_path = dir.join("snapshot.json");
    save_snapshot(&CorpusSnapshot::from_corpus(&corpus, &cfg.hash()), &snap_path).unwrap();
    let engine = Engine::new(load_snapshot(&snap_path).unwrap(), &cfg).unwrap();

    let mut answers = String::new();
    for q in [
        "How many papers were published in 2023?",
        "What do language model agents achieve in healthcare triage?",
        "Which papers were published in 2022?",
    ] {
        let out = engine.answer(q).unwrap();
        answers.push_str(&serde_json::to_string(&out.answer).unwrap());
        answers.push('\n');
    }
    std::fs::write(dir.join("answers.jsonl"), answers).unwrap();

    let items = build_benchmark(&engine, &cfg).unwrap();
    let out = dir.join("bench");
    run_benchmark(&engine, &cfg, &items, Some(&out)).unwrap();

    let mut files = BTreeMap::new();
    for d in [dir.to_path_buf(), out] {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_file() {
                files.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

/// Files every full run must produce.
pub const RUN_OUTPUTS: [&str; 5] =
    ["snapshot.json", "answers.jsonl", "benchmark.jsonl", "summary.tsv", "bootstrap.tsv"];

/// Compares two runs file by file. Traces are skipped since they carry
/// wall-clock timings.
pub fn compare_runs(first: &BTreeMap<String, Vec<u8>>, second: &BTreeMap<String, Vec<u8>>) -> Result<usize, String> {
    for expected in RUN_OUTPUTS {
        if !first.contains_key(expected) {
            return Err(format!("missing {expected}"));
        }
    }
    if first.keys().ne(second.keys()) {
        return Err(format!("file sets differ: {:?} vs {:?}", first.keys(), second.keys()));
    }
    let mut compared = 0;
    for (name, bytes) in first {
        if name == "traces.jsonl" {
            continue;
        }
        if second.get(name) != Some(bytes) {
            return Err(format!("{name} differs between runs"));
        }
        compared += 1;
    }
    Ok(compared)
}
