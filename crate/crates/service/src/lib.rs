//! HTTP JSON API over a loaded corpus snapshot.
//!
//! | Method | Path | Body | Response |
//! |---|---|---|---|
//! | POST | `/query` | `{"question": str, "tool"?: "graph"\|"vector"}` | routed answer with `trace_id` |
//! | POST | `/ingest` | search request (`query`, `date_from`, `date_to`, `sources`) | ingestion report and snapshot id |
//! | GET | `/graph/schema` | | `{"schema": str}` |
//! | POST | `/benchmark/run` | `{"seed"?, "kg_per_type"?, "vs_questions"?}` | one report per evaluated system |
//! | GET | `/benchmark/latest` | | reports of the last run |
//! | GET | `/trace/{id}` | | recorded trace |
//! | GET | `/health` | | `{"loaded": bool, "snapshot_id"?: str}` |
//!
//! Errors are `{"error": str, "trace"?: trace}` with status 400 for invalid
//! input, 404 for unknown ids, 502 when a model call fails and 503 before a
//! snapshot is loaded.

use std::collections::{HashMap, VecDeque};
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hybridrag::agent::{AgentError, RoutedAnswer, Tool, Trace};
use hybridrag::eval::RunReport;
use hybridrag::ingest::{PlainTextExtractor, SearchRequest};
use hybridrag::pipeline::{
    Config, CorpusSnapshot, Engine, IngestionReport, PipelineError, build_benchmark, run_benchmark, run_ingestion,
    save_snapshot, transport_for,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Traces kept for `/trace/{id}`; the oldest are evicted first.
const TRACE_CAPACITY: usize = 4096;

#[derive(Default)]
struct TraceLog {
    order: VecDeque<String>,
    by_id: HashMap<String, Trace>,
}

impl TraceLog {
    fn insert(&mut self, trace: Trace) {
        if !self.by_id.contains_key(&trace.trace_id) {
            self.order.push_back(trace.trace_id.clone());
        }
        self.by_id.insert(trace.trace_id.clone(), trace);
        while self.order.len() > TRACE_CAPACITY {
            if let Some(old) = self.order.pop_front() {
                self.by_id.remove(&old);
            }
        }
    }
}

pub struct AppState {
    config: Config,
    snapshot_path: Option<PathBuf>,
    engine: RwLock<Option<Arc<Engine>>>,
    traces: RwLock<TraceLog>,
    latest: RwLock<Option<Arc<Vec<RunReport>>>>,
    out_dir: Option<PathBuf>,
}

impl AppState {
    /// `snapshot_path` is where `/ingest` writes new snapshots.
    pub fn new(
        config: Config,
        engine: Option<Engine>,
        snapshot_path: Option<PathBuf>,
        out_dir: Option<PathBuf>,
    ) -> Self {
        Self {
            config,
            snapshot_path,
            engine: RwLock::new(engine.map(Arc::new)),
            traces: RwLock::new(TraceLog::default()),
            latest: RwLock::new(None),
            out_dir,
        }
    }

    fn engine(&self) -> Result<Arc<Engine>, ApiError> {
        self.engine
            .read()
            .expect("engine lock")
            .clone()
            .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no corpus snapshot is loaded"))
    }

    fn record(&self, trace: Trace) {
        self.traces.write().expect("trace lock").insert(trace);
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    trace: Option<Box<Trace>>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into(), trace: None }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::Config(_) | PipelineError::Ingest(hybridrag::ingest::IngestError::InvalidRequest(_)) => {
                StatusCode::BAD_REQUEST
            }
            PipelineError::Ingest(hybridrag::ingest::IngestError::AllSourcesFailed(_)) => StatusCode::BAD_GATEWAY,
            PipelineError::Eval(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let trace_id = self.trace.as_ref().map(|t| t.trace_id.clone());
        let mut body = json!({ "error": self.message });
        if let Some(t) = self.trace {
            body["trace"] = serde_json::to_value(&t).unwrap_or_default();
        }
        let mut resp = (self.status, Json(body)).into_response();
        if let Some(id) = trace_id.and_then(|id| HeaderValue::from_str(&id).ok()) {
            resp.headers_mut().insert("x-trace-id", id);
        }
        resp
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)
}

#[derive(Debug, Deserialize)]
pub struct QueryRequest {
    #[serde(default)]
    pub question: String,
    #[serde(default)]
    pub tool: Option<Tool>,
}

fn agent_status(e: &AgentError) -> StatusCode {
    match e {
        AgentError::EmptyQuestion => StatusCode::BAD_REQUEST,
        AgentError::Llm { .. } | AgentError::RoutingFailed(_) | AgentError::TranslationFailed { .. } => {
            StatusCode::BAD_GATEWAY
        }
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

async fn query(State(state): State<Arc<AppState>>, body: Option<Json<QueryRequest>>) -> Result<Response, ApiError> {
    let Some(Json(req)) = body else {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "body must be JSON with a question"));
    };
    if req.question.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "question is empty"));
    }
    let engine = state.engine()?;
    let outcome = blocking(move || engine.answer_with(&req.question, req.tool, None)).await?;
    match outcome {
        Ok(o) => {
            let answer: RoutedAnswer = o.answer;
            state.record(o.trace);
            let mut resp = Json(&answer).into_response();
            if let Ok(v) = HeaderValue::from_str(&answer.trace_id) {
                resp.headers_mut().insert("x-trace-id", v);
            }
            Ok(resp)
        }
        Err(f) => {
            state.record(f.trace.clone());
            Err(ApiError {
                status: agent_status(&f.error),
                message: f.error.to_string(),
                trace: Some(Box::new(f.trace)),
            })
        }
    }
}

#[derive(Debug, Serialize)]
struct IngestResponse {
    snapshot_id: String,
    config_hash: String,
    report: IngestionReport,
}

async fn ingest(
    State(state): State<Arc<AppState>>,
    Json(req): Json<SearchRequest>,
) -> Result<Json<IngestResponse>, ApiError> {
    let st = state.clone();
    let (engine, resp) = blocking(move || -> Result<_, ApiError> {
        let mut cfg = st.config.clone();
        cfg.search = req;
        cfg.validate()?;
        let transport = transport_for(&cfg)?;
        let embedder = cfg.embedding.build();
        let corpus = run_ingestion(&cfg, transport.as_ref(), &PlainTextExtractor, embedder.as_ref())?;
        let snapshot = CorpusSnapshot::from_corpus(&corpus, &cfg.hash());
        if let Some(path) = &st.snapshot_path {
            save_snapshot(&snapshot, path)?;
        }
        let resp = IngestResponse { snapshot_id: snapshot.id(), config_hash: cfg.hash(), report: corpus.report };
        Ok((Engine::new(snapshot, &cfg)?, resp))
    })
    .await??;
    // New snapshot replaces the old one; in-flight requests keep their Arc.
    *state.engine.write().expect("engine lock") = Some(Arc::new(engine));
    Ok(Json(resp))
}

async fn schema(State(state): State<Arc<AppState>>) -> Result<Json<serde_json::Value>, ApiError> {
    let engine = state.engine()?;
    Ok(Json(json!({ "schema": engine.schema(), "snapshot_id": engine.snapshot_id })))
}

#[derive(Debug, Default, Deserialize)]
pub struct BenchmarkRequest {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub kg_per_type: Option<usize>,
    #[serde(default)]
    pub vs_questions: Option<usize>,
}

async fn benchmark(
    State(state): State<Arc<AppState>>,
    body: Option<Json<BenchmarkRequest>>,
) -> Result<Json<Vec<RunReport>>, ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let engine = state.engine()?;
    let st = state.clone();
    let run = blocking(move || -> Result<_, ApiError> {
        let mut cfg = st.config.clone();
        if let Some(s) = req.seed {
            cfg.seed = s;
        }
        if let Some(n) = req.kg_per_type {
            cfg.eval.kg_per_type = n;
        }
        if let Some(n) = req.vs_questions {
            cfg.eval.vs_questions = n;
        }
        let items = build_benchmark(&engine, &cfg)?;
        Ok(run_benchmark(&engine, &cfg, &items, st.out_dir.as_deref())?)
    })
    .await??;
    {
        let mut log = state.traces.write().expect("trace lock");
        for (_, t) in run.traces {
            log.insert(t);
        }
    }
    let reports = Arc::new(run.reports);
    *state.latest.write().expect("report lock") = Some(reports.clone());
    Ok(Json(reports.as_ref().clone()))
}

async fn latest(State(state): State<Arc<AppState>>) -> Result<Json<Vec<RunReport>>, ApiError> {
    let latest = state.latest.read().expect("report lock").clone();
    latest
        .map(|r| Json(r.as_ref().clone()))
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "no benchmark has run yet"))
}

async fn trace(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Trace>, ApiError> {
    state
        .traces
        .read()
        .expect("trace lock")
        .by_id
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no trace {id}")))
}

async fn health(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let engine = state.engine.read().expect("engine lock").clone();
    Json(json!({ "loaded": engine.is_some(), "snapshot_id": engine.map(|e| e.snapshot_id.clone()) }))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/query", post(query))
        .route("/ingest", post(ingest))
        .route("/graph/schema", get(schema))
        .route("/benchmark/run", post(benchmark))
        .route("/benchmark/latest", get(latest))
        .route("/trace/{id}", get(trace))
        .route("/health", get(health))
        .with_state(state)
}
