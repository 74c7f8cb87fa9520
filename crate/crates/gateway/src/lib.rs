//! HTTP interface to exploration sessions.
//!
//! Sessions live under `<store>/sessions/<id>/` in the on-disk layout of
//! [`landscape::session::save_session`]; registered corpora are listed in
//! `<store>/corpora.json`. Mutations on one session are serialized; reads
//! are served from the last saved snapshot.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/health` | liveness |
//! | GET, POST | `/corpora` | list / register corpus files |
//! | POST | `/sessions` | fit a baseline and open a session |
//! | GET | `/sessions/{id}` | state summary |
//! | POST | `/sessions/{id}/aspects` | stage aspect keywords |
//! | POST | `/sessions/{id}/iterations` | run one iteration |
//! | GET | `/sessions/{id}/iterations/{n}` | iteration record |
//! | GET | `/sessions/{id}/iterations/{n}/heatmap` | comparison bundle |
//! | GET | `/sessions/{id}/iterations/{n}/docsim` | document-topic matrix |
//! | POST | `/sessions/{id}/decision` | continue or stop |
//! | POST | `/sessions/{id}/sweep` | alpha / lambda sweep |
//!
//! POST requests carrying an `Idempotency-Key` header are answered once and
//! replayed verbatim afterwards.

mod error;
mod handlers;
mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::{to_bytes, Body};
use axum::extract::{Request, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use landscape::config::LandscapeConfig;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use error::{ApiError, ErrorCode};
pub use store::Store;

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub store_dir: PathBuf,
    /// Origins allowed by CORS; `"*"` allows any.
    pub cors_origins: Vec<String>,
    /// Defaults for sessions created without an explicit config.
    pub defaults: LandscapeConfig,
}

impl GatewayConfig {
    pub fn new(store_dir: impl Into<PathBuf>) -> Self {
        GatewayConfig {
            store_dir: store_dir.into(),
            cors_origins: vec!["http://localhost:5173".into()],
            defaults: LandscapeConfig::default(),
        }
    }
}

type Replay = Arc<tokio::sync::Mutex<Option<(StatusCode, Vec<(String, HeaderValue)>, Vec<u8>)>>>;

#[derive(Clone)]
pub struct AppState {
    pub(crate) store: Arc<Store>,
    pub(crate) defaults: Arc<LandscapeConfig>,
    replays: Arc<Mutex<HashMap<String, Replay>>>,
}

impl AppState {
    pub fn new(config: &GatewayConfig) -> Result<Self, ApiError> {
        Ok(AppState {
            store: Arc::new(Store::open(&config.store_dir)?),
            defaults: Arc::new(config.defaults.clone()),
            replays: Arc::default(),
        })
    }
}

const REPLAY_BODY_LIMIT: usize = 64 * 1024 * 1024;

async fn idempotency(State(state): State<AppState>, req: Request, next: Next) -> Response {
    let key = match (req.method(), req.headers().get("idempotency-key")) {
        (&Method::POST, Some(k)) => match k.to_str() {
            Ok(k) => format!("{} {}", req.uri().path(), k),
            Err(_) => {
                return ApiError::bad_request("Idempotency-Key must be visible ASCII")
                    .into_response()
            }
        },
        _ => return next.run(req).await,
    };
    let slot = state
        .replays
        .lock()
        .expect("replay map")
        .entry(key)
        .or_default()
        .clone();
    let mut guard = slot.lock().await;
    if let Some((status, headers, body)) = guard.as_ref() {
        let mut resp = Response::new(Body::from(body.clone()));
        *resp.status_mut() = *status;
        for (k, v) in headers {
            resp.headers_mut().insert(
                axum::http::HeaderName::try_from(k.as_str()).expect("stored header"),
                v.clone(),
            );
        }
        resp.headers_mut()
            .insert("idempotent-replay", HeaderValue::from_static("true"));
        return resp;
    }
    let resp = next.run(req).await;
    let (parts, body) = resp.into_parts();
    let bytes = match to_bytes(body, REPLAY_BODY_LIMIT).await {
        Ok(b) => b.to_vec(),
        Err(e) => return ApiError::internal(format!("buffering response: {e}")).into_response(),
    };
    let headers = parts
        .headers
        .iter()
        .filter(|(k, _)| *k == axum::http::header::CONTENT_TYPE)
        .map(|(k, v)| (k.as_str().to_string(), v.clone()))
        .collect();
    *guard = Some((parts.status, headers, bytes.clone()));
    Response::from_parts(parts, Body::from(bytes))
}

fn cors(origins: &[String]) -> CorsLayer {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers(Any);
    if origins.iter().any(|o| o == "*") {
        layer.allow_origin(Any)
    } else {
        let list: Vec<HeaderValue> = origins
            .iter()
            .filter_map(|o| HeaderValue::from_str(o).ok())
            .collect();
        layer.allow_origin(AllowOrigin::list(list))
    }
}

pub fn router(state: AppState, cors_origins: &[String]) -> Router {
    Router::new()
        .route("/health", get(handlers::health))
        .route(
            "/corpora",
            get(handlers::list_corpora).post(handlers::register_corpus),
        )
        .route("/sessions", post(handlers::create_session))
        .route("/sessions/{id}", get(handlers::get_session))
        .route("/sessions/{id}/aspects", post(handlers::submit_aspect))
        .route("/sessions/{id}/iterations", post(handlers::run_iteration))
        .route(
            "/sessions/{id}/iterations/{n}",
            get(handlers::get_iteration),
        )
        .route(
            "/sessions/{id}/iterations/{n}/heatmap",
            get(handlers::get_heatmap),
        )
        .route(
            "/sessions/{id}/iterations/{n}/docsim",
            get(handlers::get_docsim),
        )
        .route("/sessions/{id}/decision", post(handlers::decide))
        .route("/sessions/{id}/sweep", post(handlers::sweep))
        .fallback(|| async { ApiError::new(ErrorCode::NotFound, "no such endpoint") })
        .layer(middleware::from_fn_with_state(state.clone(), idempotency))
        .layer(cors(cors_origins))
        .with_state(state)
}

/// Bind and serve until the process is stopped.
pub async fn serve(addr: SocketAddr, config: GatewayConfig) -> std::io::Result<()> {
    let state = AppState::new(&config).map_err(|e| std::io::Error::other(e.message))?;
    let app = router(state, &config.cors_origins);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, store = %config.store_dir.display(), "gateway listening");
    axum::serve(listener, app).await
}
