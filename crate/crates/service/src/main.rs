use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result, bail};
use clap::{Args, Parser, Subcommand};
use hybridrag::agent::Tool;
use hybridrag::eval::read_benchmark;
use hybridrag::graph::{execute, parse_cypher};
use hybridrag::ingest::PlainTextExtractor;
use hybridrag::pipeline::{
    Config, CorpusSnapshot, Engine, build_benchmark, fixtures, load_snapshot, run_benchmark, run_ingestion,
    save_snapshot, transport_for,
};
use hybridrag_service::{AppState, router};

#[derive(Parser)]
#[command(name = "hybridrag", version, about = "Agentic hybrid graph/vector QA over scientific literature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fetch, filter, download and index a corpus into a snapshot.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshot: PathBuf,
    },
    /// Answer one question against a snapshot; prints the routed answer as JSON.
    Query {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshot: PathBuf,
        /// Skip routing and use this tool.
        #[arg(long)]
        tool: Option<Tool>,
        /// Print the full trace instead of the answer.
        #[arg(long)]
        trace: bool,
        question: String,
    },
    /// Generate (or load) the benchmark and evaluate baseline and agentic modes.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshot: PathBuf,
        /// Output directory for reports.
        #[arg(long)]
        out: PathBuf,
        /// Existing benchmark JSONL to evaluate instead of generating one.
        #[arg(long)]
        benchmark: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        common: Common,
        /// Snapshot to load at startup and to write on /ingest.
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Directory for /benchmark/run reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a snapshot file and print its summary.
    Snapshot { path: PathBuf },
    /// Run a Cypher query against a snapshot's graph; prints TSV.
    Cypher {
        #[arg(long)]
        snapshot: PathBuf,
        query: String,
    },
    /// Write the built-in demo corpus as a fixture directory.
    DemoCorpus {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn engine_for(snapshot: &Path, cfg: &Config) -> Result<Engine> {
    let snap = load_snapshot(snapshot).with_context(|| format!("loading {}", snapshot.display()))?;
    if snap.config_hash != cfg.hash() {
        tracing::warn!(snapshot = %snap.config_hash, config = %cfg.hash(), "snapshot was built with a different config");
    }
    Ok(Engine::new(snap, cfg)?)
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let written = serde_json::to_writer_pretty(&mut out, v).map_err(std::io::Error::from).and_then(|_| writeln!(out));
    match written {
        // reader went away (e.g. `| head`); nothing left to report to
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "hybridrag=info,warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest { common, snapshot } => {
            let cfg = common.load()?;
            let transport = transport_for(&cfg)?;
            let embedder = cfg.embedding.build();
            let corpus = run_ingestion(&cfg, transport.as_ref(), &PlainTextExtractor, embedder.as_ref())?;
            let snap = CorpusSnapshot::from_corpus(&corpus, &cfg.hash());
            let id = save_snapshot(&snap, &snapshot)?;
            print_json(&serde_json::json!({ "snapshot_id": id, "config_hash": cfg.hash(), "report": corpus.report }))
        }
        Command::Query { common, snapshot, tool, trace, question } => {
            let cfg = common.load()?;
            let engine = engine_for(&snapshot, &cfg)?;
            match engine.answer_with(&question, tool, None) {
                Ok(o) if trace => print_json(&o.trace),
                Ok(o) => print_json(&o.answer),
                Err(f) => {
                    print_json(&f.trace)?;
                    bail!("{}", f.error)
                }
            }
        }
        Command::Bench { common, snapshot, out, benchmark } => {
            let cfg = common.load()?;
            let engine = engine_for(&snapshot, &cfg)?;
            let items = match benchmark {
                Some(p) => {
                    let f = std::fs::File::open(&p).with_context(|| p.display().to_string())?;
                    read_benchmark(std::io::BufReader::new(f))?
                }
                None => build_benchmark(&engine, &cfg)?,
            };
            let run = run_benchmark(&engine, &cfg, &items, Some(&out))?;
            for r in &run.reports {
                eprintln!("{}: routing accuracy {:?}", r.mode, r.routing_accuracy);
            }
            print!("{}", std::fs::read_to_string(out.join("summary.tsv"))?);
            Ok(())
        }
        Command::Serve { common, snapshot, addr, out } => {
            let cfg = common.load()?;
            let engine = match &snapshot {
                Some(p) if p.exists() => Some(engine_for(p, &cfg)?),
                _ => None,
            };
            let state = Arc::new(AppState::new(cfg, engine, snapshot, out));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&addr).await?;
                tracing::info!(%addr, "listening");
                axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                Ok(())
            })
        }
        Command::Snapshot { path } => {
            let snap = load_snapshot(&path)?;
            print_json(&serde_json::json!({
                "snapshot_id": snap.id(),
                "config_hash": snap.config_hash,
                "papers": snap.records.len(),
                "chunks": snap.store.len(),
                "graph_nodes": snap.graph.nodes.len(),
                "graph_edges": snap.graph.edges.len(),
                "report": snap.report,
            }))
        }
        Command::Cypher { snapshot, query } => {
            let corpus = load_snapshot(&snapshot)?.into_corpus()?;
            let q = parse_cypher(&query)?;
            print!("{}", execute(&q, &corpus.graph)?.to_tsv());
            Ok(())
        }
        Command::DemoCorpus { dir, common } => {
            let cfg = common.load()?;
            let n = fixtures::write_demo_corpus(&dir, &cfg.endpoints)?;
            eprintln!("wrote {n} fixture routes to {}", dir.display());
            Ok(())
        }
    }
}
