use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::Json;
use landscape::agent::SweepReport;
use landscape::aspect::{
    extract_from_texts, AspectKeywords, ExclusionList, ExtractOptions, NormalizeMode,
};
use landscape::config::LandscapeConfig;
use landscape::corpus::{load_corpus, CorpusFormat};
use landscape::reports::{
    export_comparison_bundle, export_model_heatmap, export_sweep, sweep_iteration, Table,
};
use landscape::session::{self, SessionConfig, SessionState, Status, Validation};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{ApiError, ErrorCode};
use crate::store::{valid_name, CorpusEntry};
use crate::AppState;

type ApiResult<T> = Result<T, ApiError>;

/// JSON body extractor whose rejections use the API error shape.
pub struct Body<T>(pub T);

impl<S, T> axum::extract::FromRequest<S> for Body<T>
where
    T: serde::de::DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(e) => Err(rejection(e)),
        }
    }
}

fn rejection(e: JsonRejection) -> ApiError {
    ApiError::bad_request(e.body_text())
}

pub async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

pub async fn list_corpora(State(app): State<AppState>) -> Json<Vec<CorpusEntry>> {
    Json(app.store.corpora())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterCorpus {
    name: String,
    path: PathBuf,
    format: Option<CorpusFormat>,
}

pub async fn register_corpus(
    State(app): State<AppState>,
    Body(req): Body<RegisterCorpus>,
) -> ApiResult<(StatusCode, Json<CorpusEntry>)> {
    if !valid_name(&req.name) {
        return Err(ApiError::bad_request(
            "corpus names use letters, digits, '-', '_' and '.'",
        ));
    }
    let format = req
        .format
        .unwrap_or_else(|| CorpusFormat::from_path(&req.path));
    let path = req.path.clone();
    let corpus = tokio::task::spawn_blocking(move || load_corpus(&path, format))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::new(ErrorCode::InvalidData, e.to_string()))?;
    let path = std::fs::canonicalize(&req.path).unwrap_or(req.path);
    let entry = CorpusEntry {
        name: req.name,
        path,
        format,
        documents: corpus.len(),
    };
    app.store.register_corpus(entry.clone())?;
    Ok((StatusCode::CREATED, Json(entry)))
}

/// What clients see of a session.
#[derive(Serialize)]
pub struct SessionSummary {
    id: String,
    corpus_ref: String,
    status: Status,
    ctp1: String,
    ctp2: Option<String>,
    topics: Vec<String>,
    iterations: usize,
    qtable: BTreeMap<String, f64>,
    staged_aspect: Option<AspectKeywords>,
    config: SessionConfig,
}

fn summary(s: &SessionState) -> SessionSummary {
    SessionSummary {
        id: s.id.clone(),
        corpus_ref: s.corpus_ref.clone(),
        status: s.status,
        ctp1: s.ctp1.clone(),
        ctp2: s.ctp2.clone(),
        topics: s.current_model().labels().to_vec(),
        iterations: s.iterations.len(),
        qtable: s.qtable.q.clone(),
        staged_aspect: s.staged_aspect.clone(),
        config: s.config,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    corpus: String,
    id: Option<String>,
    config: Option<LandscapeConfig>,
    seed: Option<u64>,
}

fn fresh_id(corpus: &str) -> String {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let digest = Sha256::digest(format!("{corpus}/{nanos}/{n}/{}", std::process::id()));
    format!("s-{}", hex::encode(&digest[..6]))
}

pub async fn create_session(
    State(app): State<AppState>,
    Body(req): Body<CreateSession>,
) -> ApiResult<(StatusCode, Json<SessionSummary>)> {
    let id = match req.id {
        Some(id) if !valid_name(&id) => {
            return Err(ApiError::bad_request(
                "session ids use letters, digits, '-', '_' and '.'",
            ))
        }
        Some(id) => id,
        None => fresh_id(&req.corpus),
    };
    if app.store.exists(&id) {
        return Err(ApiError::new(
            ErrorCode::Conflict,
            format!("session {id} already exists"),
        ));
    }
    let config = req
        .config
        .unwrap_or_else(|| (*app.defaults).clone())
        .with_seed(req.seed);
    let corpus = app
        .store
        .load_corpus(&req.corpus, &app.defaults.preprocess)?;
    let corpus_ref = req.corpus.clone();
    let state = tokio::task::spawn_blocking(move || {
        session::create_session(
            id,
            corpus_ref,
            &corpus,
            &config.lda,
            config.split.as_ref(),
            config.session_config(),
        )
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    let state = app.store.create(state).await?;
    Ok((StatusCode::CREATED, Json(summary(&state))))
}

pub async fn get_session(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionSummary>> {
    Ok(Json(summary(&*app.store.snapshot(&id)?)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitAspect {
    label: String,
    /// Expert terms with weights; phrases are split and stemmed.
    entries: Option<Vec<(String, f64)>>,
    /// Raw texts to extract keywords from.
    texts: Option<Vec<String>>,
    max_k: Option<usize>,
    min_score: Option<f64>,
    #[serde(default)]
    exclusions: Vec<String>,
    #[serde(default)]
    normalize: NormalizeMode,
}

pub async fn submit_aspect(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<SubmitAspect>,
) -> ApiResult<Json<AspectKeywords>> {
    let aspect = match (req.entries, req.texts) {
        (Some(entries), None) => AspectKeywords::from_raw_terms(req.label, &entries)?,
        (None, Some(texts)) => {
            let defaults = ExtractOptions::default();
            let opts = ExtractOptions {
                label: req.label,
                max_k: req.max_k.unwrap_or(defaults.max_k),
                min_score: req.min_score.unwrap_or(defaults.min_score),
            };
            let preprocess = app.defaults.preprocess.clone();
            let exclusions = ExclusionList::from_words(req.exclusions);
            tokio::task::spawn_blocking(move || {
                extract_from_texts(&texts, &preprocess, &opts, &exclusions)
            })
            .await
            .map_err(|e| ApiError::internal(e.to_string()))??
        }
        _ => {
            return Err(ApiError::bad_request(
                "give exactly one of `entries` or `texts`",
            ))
        }
    };
    let aspect = aspect.normalize(req.normalize)?;
    let staged = aspect.clone();
    app.store
        .mutate(&id, move |s| s.stage_aspect(staged))
        .await?;
    Ok(Json(aspect))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunIteration {
    /// Registered corpus to validate against.
    validation_corpus: String,
    /// Used instead of the staged aspect when present.
    aspect: Option<AspectKeywords>,
}

pub async fn run_iteration(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<RunIteration>,
) -> ApiResult<Json<Value>> {
    let docs = app
        .store
        .load_corpus(&req.validation_corpus, &app.defaults.preprocess)?;
    let validation = Validation::documents(req.validation_corpus, docs);
    let aspect = req.aspect;
    let (_, record) = app
        .store
        .mutate(&id, move |s| {
            session::run_iteration(s, aspect.as_ref(), &validation)
        })
        .await?;
    Ok(Json(
        serde_json::to_value(&record).map_err(|e| ApiError::internal(e.to_string()))?,
    ))
}

fn iteration_of(state: &SessionState, n: usize) -> ApiResult<&session::IterationRecord> {
    state
        .iteration(n)
        .map_err(|_| ApiError::not_found(format!("iteration {n} of session {}", state.id)))
}

pub async fn get_iteration(
    State(app): State<AppState>,
    Path((id, n)): Path<(String, usize)>,
) -> ApiResult<Json<Value>> {
    let s = app.store.snapshot(&id)?;
    let rec = iteration_of(&s, n)?;
    Ok(Json(
        serde_json::to_value(rec).map_err(|e| ApiError::internal(e.to_string()))?,
    ))
}

#[derive(Serialize)]
pub struct Heatmap {
    bundle: landscape::metrics::MetricsBundle,
    table: Table,
    model_heatmap: Table,
}

pub async fn get_heatmap(
    State(app): State<AppState>,
    Path((id, n)): Path<(String, usize)>,
) -> ApiResult<Json<Heatmap>> {
    let s = app.store.snapshot(&id)?;
    let rec = iteration_of(&s, n)?;
    Ok(Json(Heatmap {
        bundle: rec.bundle.clone(),
        table: export_comparison_bundle(&rec.bundle),
        model_heatmap: export_model_heatmap(s.model(&rec.model)?, 10),
    }))
}

pub async fn get_docsim(
    State(app): State<AppState>,
    Path((id, n)): Path<(String, usize)>,
) -> ApiResult<Json<landscape::agent::DocTopicMatrix>> {
    let s = app.store.snapshot(&id)?;
    let rec = iteration_of(&s, n)?;
    rec.doc_matrix
        .clone()
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("iteration {n} has no document matrix")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decision {
    #[serde(rename = "continue")]
    continue_: bool,
    #[serde(default)]
    notes: String,
    edited_aspect: Option<AspectKeywords>,
}

pub async fn decide(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<Decision>,
) -> ApiResult<Json<SessionSummary>> {
    let (state, _) = app
        .store
        .mutate(&id, move |s| {
            session::record_decision(s, req.continue_, req.edited_aspect, &req.notes)
        })
        .await?;
    Ok(Json(summary(&state)))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepRequest {
    iteration: Option<usize>,
    alphas: Vec<f64>,
    lambdas: Vec<f64>,
    zip: bool,
}

#[derive(Serialize)]
pub struct SweepResponse {
    iteration: usize,
    report: SweepReport,
    table: Table,
}

pub async fn sweep(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<SweepRequest>,
) -> ApiResult<Json<SweepResponse>> {
    let s = app.store.snapshot(&id)?;
    let n = req.iteration.unwrap_or(s.iterations.len());
    iteration_of(&s, n)?;
    let report = sweep_iteration(&s, n, &req.alphas, &req.lambdas, req.zip)?;
    Ok(Json(SweepResponse {
        iteration: n,
        table: export_sweep(&report),
        report,
    }))
}
