//! Built-in demo corpus: raw responses for the three sources plus full-text
//! documents, served through a [`FixtureTransport`].

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::json;

use super::PipelineError;
use crate::ingest::{BibRecord, FixtureTransport, SourceDb, SourceEndpoints};

struct Topic {
    title: &'static str,
    subject: &'static str,
    facts: &'static [&'static str],
}

const RELEVANT: &[Topic] = &[
    Topic {
        title: "Retrieval Augmented Language Model Agents for Clinical Question Answering in Healthcare",
        subject: "language model agents with retrieval augmented generation for clinical question answering in healthcare",
        facts: &[
            "Grounding each answer in retrieved guideline passages reduced unsupported claims to {a} percent of responses.",
            "The retriever returned {k} passages per question from a corpus of {n} clinical guidelines.",
            "Physicians rated {b} percent of grounded answers as safe to act on without edits.",
            "Answers that cited the retrieved passage were preferred over unreferenced answers in {c} of {k2} paired comparisons.",
            "Latency stayed below {d} seconds per question on a single accelerator.",
        ],
    },
    Topic {
        title: "Language Model Agents for Hospital Triage in Healthcare",
        subject: "language model agents that route tasks between tools for hospital triage in healthcare",
        facts: &[
            "The agent selected the correct tool for {b} percent of triage requests.",
            "Escalations to a human nurse happened in {a} percent of sessions.",
            "Tool routing errors were concentrated in requests that mixed scheduling and medication questions.",
            "Each agent session issued a median of {k} tool calls before producing a recommendation.",
            "The evaluation covered {n} anonymized emergency department encounters.",
        ],
    },
    Topic {
        title: "Knowledge Graphs and Language Model Agents for Healthcare Literature Review",
        subject: "language model agents that query knowledge graphs with Cypher for healthcare literature review",
        facts: &[
            "Translating questions into Cypher succeeded for {b} percent of metadata questions.",
            "The graph linked {n} papers to their authors, keywords and cited works.",
            "Citation edges allowed reviewers to trace {k} generations of follow-up studies.",
            "Metadata questions about authors and publication years were answered exactly by graph queries.",
            "Full-text questions required passage retrieval instead of graph lookups in {a} percent of cases.",
        ],
    },
    Topic {
        title: "Hallucination Assessment of Language Model Agents in Healthcare",
        subject: "hallucination and faithfulness of retrieval augmented language model agents in healthcare",
        facts: &[
            "Faithfulness scores rose from {a} to {b} percent when retrieved context was supplied.",
            "Reviewers flagged fabricated dosage values in {k} of {n} unsupported answers.",
            "Statement-level verification caught errors that answer-level grading missed.",
            "Context precision improved when a reranker reordered the retrieved passages.",
            "Agreement between the automatic judge and clinicians reached a kappa of 0.{c}.",
        ],
    },
    Topic {
        title: "Hybrid Sparse and Dense Retrieval for Healthcare Language Model Agents",
        subject: "hybrid BM25 and dense embedding retrieval for language model agents in healthcare search",
        facts: &[
            "Combining BM25 with dense embeddings raised recall at {k} from {a} to {b} percent.",
            "Lexical matching recovered rare drug names that dense retrieval missed.",
            "Reciprocal rank fusion was used when the cross encoder reranker was unavailable.",
            "The index held {n} passages split into overlapping character windows.",
            "Reranking added {d} milliseconds per query on average.",
        ],
    },
    Topic {
        title: "Preference Optimization of Healthcare Language Model Agents",
        subject: "preference optimization of language model agents for grounded healthcare answers",
        facts: &[
            "Annotators produced {n} preference pairs contrasting grounded and ungrounded answers.",
            "The tuned assistant abstained more often when the retrieved context lacked the answer.",
            "Answer relevance improved by {a} points after preference tuning.",
            "Preference pairs were collected with a fixed context snapshot for every prompt.",
            "The tuned model kept {b} percent of its original fluency ratings.",
        ],
    },
];

const OTHER: &[Topic] = &[
    Topic {
        title: "Soil Microbiome Responses to Crop Rotation",
        subject: "soil microbiome diversity under crop rotation",
        facts: &[
            "Fungal diversity increased by {a} percent after three rotation cycles.",
            "Nitrogen fixing bacteria dominated plots planted with legumes.",
            "Samples were taken from {n} plots across {k} seasons.",
            "Tillage reduced microbial biomass in the upper soil layer.",
            "Rotation plots retained {b} percent more soil moisture.",
        ],
    },
    Topic {
        title: "Exoplanet Atmosphere Spectroscopy",
        subject: "transmission spectroscopy of exoplanet atmospheres",
        facts: &[
            "Water vapour absorption was detected in {k} of {n} observed transits.",
            "Cloud decks flattened the spectra of the cooler planets.",
            "The telescope collected {a} hours of transit observations.",
            "Sodium lines constrained the upper atmosphere temperature.",
            "Retrieval models favoured metal rich compositions for {b} percent of targets.",
        ],
    },
    Topic {
        title: "Durability of Recycled Aggregate Concrete",
        subject: "durability of concrete made with recycled aggregate",
        facts: &[
            "Chloride penetration rose by {a} percent with full aggregate replacement.",
            "Curing for {k} days restored most of the compressive strength.",
            "Freeze thaw cycling caused surface scaling after {n} cycles.",
            "Fly ash additions reduced shrinkage cracking.",
            "Recycled mixes reached {b} percent of the reference strength.",
        ],
    },
    Topic {
        title: "Songbird Migration Timing and Climate",
        subject: "songbird migration timing under a warming climate",
        facts: &[
            "Spring arrival advanced by {k} days per decade.",
            "Radar tracked {n} nocturnal migration events.",
            "Tailwinds explained {a} percent of the variation in passage rates.",
            "Long distance migrants adjusted their timing less than short distance migrants.",
            "Stopover duration shortened in warmer springs for {b} percent of species.",
        ],
    },
    Topic {
        title: "Electrolyte Additives for Lithium Batteries",
        subject: "electrolyte additives for lithium metal batteries",
        facts: &[
            "Fluorinated additives extended cycle life to {n} cycles.",
            "Dendrite growth slowed at current densities below {k} milliamperes.",
            "Coulombic efficiency reached {b} percent with the best additive.",
            "Gas evolution was measured during the first formation cycle.",
            "Impedance rose by {a} percent after extended storage.",
        ],
    },
    Topic {
        title: "Urban Traffic Flow Prediction",
        subject: "urban traffic flow prediction with sensor networks",
        facts: &[
            "Loop detectors at {n} intersections supplied the training data.",
            "Prediction error grew by {a} percent during holidays.",
            "Signal timing changes were detected within {k} minutes.",
            "Weather features improved forecasts during heavy rain.",
            "The model ran on {b} percent fewer sensors without accuracy loss.",
        ],
    },
];

const QUALIFIERS: &[&str] = &["A Study of", "Evaluating", "Revisiting", "Towards", "Lessons from", "Scaling"];
const SETTINGS: &[&str] = &[
    "a Multicenter Study",
    "a Retrospective Cohort",
    "a Pilot Deployment",
    "a Simulation Study",
    "an Ablation Study",
    "a Prospective Evaluation",
    "a Benchmark Study",
    "a Case Series",
    "a Reproducibility Study",
    "a Field Trial",
    "a Comparative Analysis",
    "a Cross-Sectional Survey",
];

const FIRST: &[&str] = &["Maria", "Kenji", "Amara", "Lucas", "Priya", "Jonas", "Chen", "Fatima", "Diego", "Ingrid"];
const LAST: &[&str] =
    &["Okafor", "Lindqvist", "Tanaka", "Moreau", "Patel", "Novak", "Garcia", "Haddad", "Schmidt", "Wu"];

/// One generated paper: its metadata and full text.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoPaper {
    pub record: BibRecord,
    pub fulltext: String,
    /// Extra PubMed id / arXiv id used in the raw responses.
    pub source_id: String,
}

fn fill(template: &str, seed: usize) -> String {
    let v = |m: usize, lo: usize, span: usize| lo + (seed * m + m / 2) % span;
    template
        .replace("{a}", &v(7, 12, 40).to_string())
        .replace("{b}", &v(11, 55, 40).to_string())
        .replace("{c}", &v(13, 40, 50).to_string())
        .replace("{d}", &v(3, 2, 9).to_string())
        .replace("{k2}", &v(5, 60, 30).to_string())
        .replace("{k}", &v(5, 3, 9).to_string())
        .replace("{n}", &(v(17, 120, 900)).to_string())
}

fn doi_for(source: SourceDb, i: usize) -> String {
    match source {
        SourceDb::Pubmed => format!("10.5555/med.{:04}", 1000 + i),
        SourceDb::Arxiv => format!("10.48550/arXiv.2401.{:05}", 10000 + i),
        SourceDb::Scholar => format!("10.7777/sch.{:04}", 2000 + i),
    }
}

fn fulltext(topic: &Topic, title: &str, seed: usize, cites: &[String]) -> String {
    let mut out = format!("{title}\n\nIntroduction\n");
    out.push_str(&format!(
        "This work studies {}. Prior studies left open how these methods behave outside controlled benchmarks. ",
        topic.subject
    ));
    for round in 0..6 {
        let heading = ["Methods", "Results", "Analysis", "Discussion", "Limitations", "Conclusion"][round];
        out.push_str(&format!("\n\n{heading}\n"));
        for (j, fact) in topic.facts.iter().enumerate() {
            let s = fill(fact, seed + round * 31 + j);
            out.push_str(&s);
            out.push(' ');
            if (j + round) % 2 == 0 {
                out.push_str(&format!(
                    "In the {} setting this finding held for cohort {} as well. ",
                    heading.to_lowercase(),
                    (seed + round + j) % 9 + 1
                ));
            }
        }
    }
    out.push_str("\n\nReferences\n");
    for (i, d) in cites.iter().enumerate() {
        out.push_str(&format!("[{}] Related work on {}. doi:{d}\n", i + 1, topic.subject));
    }
    out
}

/// Generates `per_source` papers for each source database. One in five is
/// on the demo query's topic. Two scholar entries duplicate PubMed
/// papers and two records per source lack an abstract.
pub fn demo_papers(per_source: usize) -> Vec<(SourceDb, DemoPaper)> {
    let mut out = Vec::new();
    let mut all_dois: Vec<String> = Vec::new();
    for (si, source) in SourceDb::ALL.into_iter().enumerate() {
        for i in 0..per_source {
            all_dois.push(doi_for(source, i + si * 100));
        }
    }
    for (si, source) in SourceDb::ALL.into_iter().enumerate() {
        for i in 0..per_source {
            let g = i + si * 100;
            let idx = si * per_source + i;
            let relevant = i % 5 == 0;
            let topic =
                if relevant { &RELEVANT[(i / 5 + si * 2) % RELEVANT.len()] } else { &OTHER[(i + si) % OTHER.len()] };
            let qualifier = QUALIFIERS[idx % QUALIFIERS.len()];
            let setting = SETTINGS[(idx / QUALIFIERS.len()) % SETTINGS.len()];
            let title = format!("{qualifier} {}: {setting}", topic.title);
            let seed = g * 7 + 3;
            let abstract_text = if i % per_source.max(1) == per_source.saturating_sub(1) || i == 1 {
                String::new()
            } else if relevant {
                format!(
                    "Language model agents are entering healthcare. We investigate {}. {} {} \
The results inform how healthcare teams deploy language model agents.",
                    topic.subject,
                    fill(topic.facts[0], seed),
                    fill(topic.facts[1], seed)
                )
            } else {
                format!(
                    "We investigate {}. {} {}",
                    topic.subject,
                    fill(topic.facts[0], seed),
                    fill(topic.facts[1], seed)
                )
            };
            let authors = vec![
                format!("{} {}", FIRST[g % FIRST.len()], LAST[(g / 3) % LAST.len()]),
                format!("{} {}", FIRST[(g + 4) % FIRST.len()], LAST[(g + 5) % LAST.len()]),
            ];
            let doi = doi_for(source, g);
            let cites: Vec<String> = (1..=2)
                .map(|k| all_dois[(all_dois.iter().position(|d| *d == doi).unwrap() + k * 5) % all_dois.len()].clone())
                .chain(std::iter::once(format!("10.9999/ext.{}", g % 7)))
                .collect();
            let source_id = match source {
                SourceDb::Pubmed => format!("{}", 30_000_000 + g),
                SourceDb::Arxiv => format!("2401.{:05}", 10000 + g),
                SourceDb::Scholar => format!("S{g:05}"),
            };
            let pdf_url = match source {
                SourceDb::Pubmed => format!("https://www.ncbi.nlm.nih.gov/pmc/articles/PMC{}/pdf/", 900_000 + g),
                SourceDb::Arxiv => format!("http://arxiv.org/pdf/{source_id}v1"),
                SourceDb::Scholar => format!("https://oa.example.org/{source_id}.pdf"),
            };
            let record = BibRecord {
                doi,
                title: title.clone(),
                abstract_text,
                year: Some(2019 + ((g * 3) % 7) as i32),
                authors,
                pdf_url,
                source_db: source,
            };
            out.push((source, DemoPaper { fulltext: fulltext(topic, &title, seed, &cites), record, source_id }));
        }
    }
    // cross-source duplicates
    let dups: Vec<DemoPaper> = out
        .iter()
        .filter(|(s, p)| *s == SourceDb::Pubmed && !p.record.abstract_text.is_empty())
        .take(2)
        .map(|(_, p)| {
            let mut d = p.clone();
            d.record.source_db = SourceDb::Scholar;
            d.record.pdf_url = format!("https://oa.example.org/dup-{}.pdf", p.source_id);
            d.source_id = format!("D{}", p.source_id);
            d
        })
        .collect();
    out.extend(dups.into_iter().map(|d| (SourceDb::Scholar, d)));
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn pubmed_xml(papers: &[&DemoPaper]) -> String {
    let mut xml = String::from("<?xml version=\"1.0\"?>\n<PubmedArticleSet>\n");
    for p in papers {
        let r = &p.record;
        let authors: String = r
            .authors
            .iter()
            .map(|a| {
                let (fore, last) = a.split_once(' ').unwrap_or(("", a));
                format!(
                    "<Author><LastName>{}</LastName><ForeName>{}</ForeName></Author>",
                    xml_escape(last),
                    xml_escape(fore)
                )
            })
            .collect();
        let pmc = r.pdf_url.split('/').find(|s| s.starts_with("PMC")).unwrap_or_default();
        xml.push_str(&format!(
            "<PubmedArticle><MedlineCitation><PMID>{}</PMID><Article><ArticleTitle>{}</ArticleTitle>\
<Abstract><AbstractText>{}</AbstractText></Abstract><AuthorList>{authors}</AuthorList>\
<Journal><JournalIssue><PubDate><Year>{}</Year></PubDate></JournalIssue></Journal></Article></MedlineCitation>\
<PubmedData><ArticleIdList><ArticleId IdType=\"doi\">{}</ArticleId><ArticleId IdType=\"pmc\">{pmc}</ArticleId></ArticleIdList></PubmedData></PubmedArticle>\n",
            p.source_id,
            xml_escape(&r.title),
            xml_escape(&r.abstract_text),
            r.year.unwrap_or_default(),
            xml_escape(&r.doi),
        ));
    }
    xml.push_str("</PubmedArticleSet>\n");
    xml
}

fn arxiv_atom(papers: &[&DemoPaper]) -> String {
    let mut xml = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<feed xmlns=\"http://www.w3.org/2005/Atom\" xmlns:arxiv=\"http://arxiv.org/schemas/atom\">\n",
    );
    for p in papers {
        let r = &p.record;
        let authors: String =
            r.authors.iter().map(|a| format!("<author><name>{}</name></author>", xml_escape(a))).collect();
        xml.push_str(&format!(
            "<entry><id>http://arxiv.org/abs/{}v1</id><published>{}-03-01T00:00:00Z</published><title>{}</title>\
<summary>{}</summary>{authors}<link title=\"pdf\" href=\"{}\" rel=\"related\" type=\"application/pdf\"/></entry>\n",
            p.source_id,
            r.year.unwrap_or_default(),
            xml_escape(&r.title),
            xml_escape(&r.abstract_text),
            xml_escape(&r.pdf_url),
        ));
    }
    xml.push_str("</feed>\n");
    xml
}

fn scholar_json(papers: &[&DemoPaper]) -> String {
    let data: Vec<serde_json::Value> = papers
        .iter()
        .map(|p| {
            let r = &p.record;
            json!({
                "paperId": p.source_id,
                "title": r.title,
                "abstract": if r.abstract_text.is_empty() { serde_json::Value::Null } else { json!(r.abstract_text) },
                "year": r.year,
                "authors": r.authors.iter().map(|a| json!({"name": a})).collect::<Vec<_>>(),
                "externalIds": {"DOI": r.doi},
                "openAccessPdf": {"url": r.pdf_url},
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({ "total": data.len(), "data": data })).expect("json")
}

/// URL to file name and contents for every route of the demo corpus.
pub fn demo_files(per_source: usize, endpoints: &SourceEndpoints) -> BTreeMap<String, (String, Vec<u8>)> {
    let papers = demo_papers(per_source);
    let of = |s: SourceDb| papers.iter().filter(|(src, _)| *src == s).map(|(_, p)| p).collect::<Vec<_>>();
    let pubmed = of(SourceDb::Pubmed);
    let ids: Vec<&str> = pubmed.iter().map(|p| p.source_id.as_str()).collect();
    let esearch = json!({"esearchresult": {"count": ids.len().to_string(), "idlist": ids}});

    let mut files = BTreeMap::new();
    files.insert(endpoints.pubmed_esearch_url(), ("pubmed_esearch.json".into(), esearch.to_string().into_bytes()));
    files.insert(endpoints.pubmed_efetch_url(), ("pubmed_efetch.xml".into(), pubmed_xml(&pubmed).into_bytes()));
    files
        .insert(endpoints.arxiv_query_url(), ("arxiv_query.xml".into(), arxiv_atom(&of(SourceDb::Arxiv)).into_bytes()));
    files.insert(
        endpoints.scholar_search_url(),
        ("scholar_search.json".into(), scholar_json(&of(SourceDb::Scholar)).into_bytes()),
    );
    for (_, p) in &papers {
        let name = format!("fulltext/{}.txt", p.source_id);
        files.insert(p.record.pdf_url.clone(), (name, p.fulltext.clone().into_bytes()));
    }
    files
}

pub const DEMO_PER_SOURCE: usize = 24;

pub fn demo_transport(endpoints: &SourceEndpoints) -> FixtureTransport {
    demo_files(DEMO_PER_SOURCE, endpoints)
        .into_iter()
        .fold(FixtureTransport::new(), |t, (url, (_, bytes))| t.with_bytes(url, bytes))
}

/// Writes the demo corpus as a fixture directory readable by
/// [`FixtureTransport::from_dir`].
pub fn write_demo_corpus(dir: &Path, endpoints: &SourceEndpoints) -> Result<usize, PipelineError> {
    let files = demo_files(DEMO_PER_SOURCE, endpoints);
    let io = |e: std::io::Error| PipelineError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir.join("fulltext")).map_err(io)?;
    let mut routes = BTreeMap::new();
    for (url, (name, bytes)) in &files {
        std::fs::write(dir.join(name), bytes).map_err(io)?;
        routes.insert(url.clone(), name.clone());
    }
    let manifest = serde_json::to_string_pretty(&json!({ "routes": routes })).expect("json");
    std::fs::write(dir.join("manifest.json"), manifest).map_err(io)?;
    Ok(files.len())
}
